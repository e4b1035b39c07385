#pragma once

// Binary sequences split into g exchangeable groups (partial
// exchangeability in de Finetti's sense). A law of order (n1,...,ng) is
// carried in one of three exactly equivalent parameterizations: class
// weights, moments, or means plus generalized covariances.

#include "exchkit/core.hpp"
#include "exchkit/polytope.hpp"

#include <vector>

namespace exchkit {

/// Group sizes (n1,...,ng). Individual groups may be empty (ni = 0), which
/// arises when marginalizing or extending in one direction only, but the
/// total length must be positive.
class DfpeOrder {
 public:
  DfpeOrder() = default;
  explicit DfpeOrder(std::vector<int> sizes);
  DfpeOrder(std::initializer_list<int> sizes) : DfpeOrder(std::vector<int>(sizes)) {}

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t groups() const { return sizes_.size(); }
  int operator[](std::size_t i) const { return sizes_[i]; }
  IndexGrid grid() const { return IndexGrid(sizes_); }
  std::size_t class_total() const { return grid().size(); }

  /// Componentwise <=.
  bool within(const DfpeOrder& other) const;
  std::string str() const;

  friend bool operator==(const DfpeOrder&, const DfpeOrder&) = default;
  friend auto operator<=>(const DfpeOrder& a, const DfpeOrder& b) { return a.sizes_ <=> b.sizes_; }

 private:
  std::vector<int> sizes_;
};

/// Class weights w^{(n)}_k, dense in the lexicographic layout of order().grid().
class DfpeDistribution {
 public:
  DfpeDistribution(DfpeOrder order, std::vector<Rational> weights);  // unchecked; use validate_dfpe

  const DfpeOrder& order() const { return order_; }
  const std::vector<Rational>& weights() const { return weights_; }
  const Rational& weight(const MultiIndex& k) const { return weights_[order_.grid().rank(k)]; }

  friend bool operator==(const DfpeDistribution&, const DfpeDistribution&) = default;

 private:
  DfpeOrder order_;
  std::vector<Rational> weights_;
};

/// Moments w_{k}: the probability that any chosen k1 members of group 1, k2
/// of group 2, ... are all 1. The entry at the all-zero index is always 1.
class MomentVector {
 public:
  MomentVector(DfpeOrder order, std::vector<Rational> values);

  const DfpeOrder& order() const { return order_; }
  const std::vector<Rational>& values() const { return values_; }
  const Rational& at(const MultiIndex& k) const { return values_[order_.grid().rank(k)]; }
  /// Mean of group i, i.e. the moment at the unit index e_i (0 for an empty group).
  Rational mean(std::size_t group) const;

  /// Coordinates with sum(k) > 0, i.e. the point of the moment polytope.
  PointV to_point() const;

  friend bool operator==(const MomentVector&, const MomentVector&) = default;

 private:
  DfpeOrder order_;
  std::vector<Rational> values_;
};

/// Means w(i) and generalized covariances Cov_k. The covariance layout
/// includes Cov_{0..0} = 1 and the zero entries at unit indices.
class CovarianceVector {
 public:
  CovarianceVector(DfpeOrder order, std::vector<Rational> means, std::vector<Rational> covariances);

  const DfpeOrder& order() const { return order_; }
  const std::vector<Rational>& means() const { return means_; }
  const std::vector<Rational>& covariances() const { return covariances_; }
  const Rational& at(const MultiIndex& k) const { return covariances_[order_.grid().rank(k)]; }

  friend bool operator==(const CovarianceVector&, const CovarianceVector&) = default;

 private:
  DfpeOrder order_;
  std::vector<Rational> means_;
  std::vector<Rational> covariances_;
};

DfpeDistribution validate_dfpe(std::vector<Rational> raw_weights, const DfpeOrder& order);

/// Number of sequences with group sums k: prod_i C(ni, ki).
Integer class_count(const DfpeOrder& order, const MultiIndex& k);

std::vector<Rational> weights_to_point_probs(const DfpeDistribution& dist);

/// Law of the first m_i members of each group (hypergeometric thinning).
DfpeDistribution marginalize(const DfpeDistribution& dist, const DfpeOrder& m);

MomentVector moments_from_weights(const DfpeDistribution& dist);

/// Inverts moments_from_weights by finite differences; throws
/// SignConditionViolated when mv is not the moment vector of any law.
DfpeDistribution weights_from_moments(const MomentVector& mv);

/// Indices k whose signed finite difference (-1)^{|n-k|} D^{n-k} w_k is negative.
std::vector<MultiIndex> check_moment_conditions(const MomentVector& mv);

CovarianceVector covariances_from_moments(const MomentVector& mv);
MomentVector moments_from_covariances(const CovarianceVector& cv);

/// Central mixed moment at index k of the moment table `moment`, centred at
/// `means`: sum_j prod_i C(ki,ji) (-mean_i)^{ji} moment(k - j). Shared by the
/// DFPE covariances and the Markov mixed-moment checks.
template <typename MomentLookup>
Rational central_moment(const MultiIndex& k, const std::vector<Rational>& means, MomentLookup&& moment) {
  Rational sum = 0;
  IndexGrid inner(k.components);
  for (const auto& j : inner.all()) {
    Rational term = 1;
    MultiIndex rest = k;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (j[i] == 0) continue;
      Rational power;
      mpz_pow_ui(power.get_num_mpz_t(), means[i].get_num_mpz_t(), static_cast<unsigned long>(j[i]));
      mpz_pow_ui(power.get_den_mpz_t(), means[i].get_den_mpz_t(), static_cast<unsigned long>(j[i]));
      term *= Rational(binom(k[i], j[i])) * power;
      if (j[i] % 2) term = -term;
      rest[i] -= j[i];
    }
    if (sgn(term) != 0) sum += term * moment(rest);
  }
  return sum;
}

/// Exact test of nonnegative definiteness by symmetric pivoting.
bool is_nonnegative_definite(std::vector<std::vector<Rational>> matrix);
Rational determinant(std::vector<std::vector<Rational>> matrix);

struct InfiniteReport {
  /// Even indices (2k1,...,2kg), not all zero, with negative covariance.
  std::vector<MultiIndex> even_cov_violations;
  /// Whether the covariance matrix of the groups with ni >= 2 is
  /// nonnegative definite.
  bool psd = true;
  std::vector<std::size_t> matrix_groups;
  std::vector<std::vector<Rational>> matrix;
  Rational det = 0;

  bool passes() const { return even_cov_violations.empty() && psd; }
};

/// Necessary conditions for the law to be the initial segment of an infinite
/// partially exchangeable sequence.
InfiniteReport check_infinite_necessary(const CovarianceVector& cv);

/// Vertex lambda^{(n)}_{k;r}: the moments up to order n of the extremal law
/// of order r concentrated on class k.
MomentVector lambda_vertex(const MultiIndex& k, const DfpeOrder& r, const DfpeOrder& n);

/// All prod(ri+1) projected vertices, in the canonical order of r's grid.
std::vector<MomentVector> extendibility_vertices(const DfpeOrder& n, const DfpeOrder& r);

std::string lambda_tag(const DfpeOrder& n);

/// Decides whether dist is the initial segment of a law of order r.
MembershipCertificate dfpe_extendible(const DfpeDistribution& dist, const DfpeOrder& r);
MembershipCertificate dfpe_extendible(const MomentVector& mv, const DfpeOrder& r);

struct FrontierResult {
  /// Orders to which the law extends but not one step further in any
  /// direction, all strictly inside the search box.
  std::vector<DfpeOrder> exact;
  /// Maximal extendible orders that touch the search bound, whose exactness
  /// could not be settled.
  std::vector<DfpeOrder> bound_limited;
  /// Number of extendible orders found in the box.
  std::size_t extendible_count = 0;

  bool bound_too_small() const { return !bound_limited.empty(); }
};

/// Breadth-first search of the extendible orders between dist.order() and
/// max_r, using that extendibility is closed downwards.
FrontierResult extendibility_frontier(const DfpeDistribution& dist, const DfpeOrder& max_r);

/// Fraction of the moment polytope of order n that extends to r.
VolumeEstimate dfpe_volume_ratio(const DfpeOrder& n, const DfpeOrder& r, const VolumeOptions& options);

}  // namespace exchkit
