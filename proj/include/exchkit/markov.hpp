#pragma once

// Binary Markov exchangeable laws: sequences are grouped by first state and
// transition-count matrix. All laws here start at state 0.

#include "exchkit/core.hpp"
#include "exchkit/dfpe.hpp"
#include "exchkit/polytope.hpp"

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace exchkit {

using TransitionCounts = std::array<int, 4>;  // n00, n01, n10, n11

/// A consistent transition-count matrix together with its start state.
struct TransitionCountMatrix {
  TransitionCounts counts{};
  int start = 0;

  int n00() const { return counts[0]; }
  int n01() const { return counts[1]; }
  int n10() const { return counts[2]; }
  int n11() const { return counts[3]; }
  int count(int from, int to) const { return counts[2 * from + to]; }
  int exits(int state) const { return count(state, 0) + count(state, 1); }
  int entries(int state) const { return count(0, state) + count(1, state); }
  /// Implied sequence length, 1 + number of transitions.
  int length() const { return 1 + counts[0] + counts[1] + counts[2] + counts[3]; }
  /// 1 when the sequence returns to its start state, 2 otherwise.
  int kind() const;

  friend bool operator==(const TransitionCountMatrix&, const TransitionCountMatrix&) = default;
  friend auto operator<=>(const TransitionCountMatrix&, const TransitionCountMatrix&) = default;
};

std::string format_tcm(const TransitionCountMatrix& m);

/// Final state of any sequence with these counts from `start`, or nullopt
/// when the counts are not realizable (flow imbalance, negative entries or
/// a disconnected transition graph).
std::optional<int> realized_end_state(const TransitionCounts& counts, int start);

TransitionCountMatrix validate_tcm(const TransitionCounts& counts, int start);

int ending_state(const TransitionCountMatrix& m);

struct PhiSets {
  std::vector<TransitionCountMatrix> first_kind;
  std::vector<TransitionCountMatrix> second_kind;

  /// First kind then second kind: the canonical class order.
  std::vector<TransitionCountMatrix> all() const;
  std::size_t size() const { return first_kind.size() + second_kind.size(); }
};

/// Transition-count matrices of length-n sequences starting at 0, each kind
/// sorted by (n01, n00).
PhiSets enumerate_phi(int n);

/// Number of sequences realizing m (binary closed form).
Integer whittle_count(const TransitionCountMatrix& m);

/// The same count from the general determinant formula
/// det(B with the end state removed) * prod n_i^+! / prod n_ij!.
Rational whittle_determinant_count(const TransitionCountMatrix& m);

/// Number of sequences from `start` with transition counts `counts`; 0 when
/// the counts are not realizable from that state.
Integer sequence_count(const TransitionCounts& counts, int start);

/// Class weights w_{0,N} of a length-n law, dense over enumerate_phi(n).all().
class MeDistribution {
 public:
  MeDistribution(int n, std::vector<Rational> weights);  // unchecked; use validate_me

  int length() const { return n_; }
  const std::vector<TransitionCountMatrix>& classes() const { return classes_; }
  const std::vector<Rational>& weights() const { return weights_; }
  std::size_t index_of(const TransitionCountMatrix& m) const;
  const Rational& weight(const TransitionCountMatrix& m) const { return weights_[index_of(m)]; }

  friend bool operator==(const MeDistribution& a, const MeDistribution& b) {
    return a.n_ == b.n_ && a.weights_ == b.weights_;
  }

 private:
  int n_;
  std::vector<TransitionCountMatrix> classes_;
  std::vector<Rational> weights_;
};

MeDistribution validate_me(int n, std::vector<Rational> weights);
MeDistribution me_point_mass(const TransitionCountMatrix& m);

std::vector<Rational> me_weights_to_point_probs(const MeDistribution& d);

/// Law of the first k steps.
MeDistribution me_marginalize(const MeDistribution& d, int k);

/// Coordinates w_{0,a,b}: the probability of the block "a transitions 0->0,
/// one 0->1, then b transitions 1->1" for a+b <= n-2, plus the special pair
/// (n-1,0) holding the probability of the all-zeros sequence.
class GammaPoint {
 public:
  GammaPoint(int n, std::vector<Rational> values);

  /// Canonical order: regular pairs lexicographically, then the special pair.
  static std::vector<std::pair<int, int>> pairs(int n);

  int length() const { return n_; }
  const std::vector<Rational>& values() const { return values_; }
  const Rational& regular(int a, int b) const;
  const Rational& special() const { return values_.back(); }
  PointV to_point() const;

  friend bool operator==(const GammaPoint&, const GammaPoint&) = default;

 private:
  int n_;
  std::vector<Rational> values_;
};

std::string gamma_tag(int n);

GammaPoint gamma_from_weights(const MeDistribution& d);

/// Inverse of gamma_from_weights; throws SignConditionViolated when some
/// class probability comes out negative and NotNormalized when the implied
/// class weights do not sum to 1.
MeDistribution weights_from_gamma(const GammaPoint& g);

struct GammaConditionReport {
  /// Classes whose implied point probability is negative.
  std::vector<TransitionCountMatrix> violations;
  /// Total mass of the implied class weights (1 on the simplex).
  Rational total_mass = 0;

  bool satisfied() const { return violations.empty() && total_mass == 1; }
};

GammaConditionReport check_gamma_conditions(const GammaPoint& g);

/// gamma^{(n)}_R: coordinates in L_n of the extremal law concentrated on R,
/// a class of length r >= n.
GammaPoint gamma_vertex(const TransitionCountMatrix& r_class, int n);

/// Projected vertices for every R in Phi(0,r), in canonical order.
std::vector<PointV> gamma_extension_vertices(int n, int r);

MembershipCertificate me_extendible(const MeDistribution& d, int r);
MembershipCertificate me_extendible(const GammaPoint& g, int r);

/// Fraction of Gamma_n whose points extend to length r.
VolumeEstimate me_volume_ratio(int n, int r, const VolumeOptions& options);

using PairMap = std::map<std::pair<int, int>, Rational>;

/// Input for recovering the mixed moments m_{a,b} of a law whose first
/// state is independent of its transition counts.
struct MixedMomentInput {
  Rational q0;  // P(X1 = 0)
  Rational q1;  // P(X1 = 1)
  /// w_{0,a,b} as joint probabilities with X1 = 0 (not conditional on it);
  /// the special pair is P(X1..Xn all 0).
  GammaPoint gamma0;
  /// p1_blocks[b] = P(X1 = ... = X_{b+1} = 1), b = 0..n-1.
  std::vector<Rational> p1_blocks;
};

/// m_{a,b} for a+b <= n-1 by m_{0,b} = p1_blocks[b]/q1 and
/// m_{a,b} = m_{a-1,b} - w_{0,a-1,b}/q0. Throws IndependenceViolated when
/// any consequence of the independence premise fails.
PairMap me_mixed_moments(const MixedMomentInput& input);

struct MeInfiniteReport {
  Rational mean00;
  Rational mean11;
  /// Central mixed moments of (theta00, theta11) for a+b <= n-1.
  PairMap covariances;
  InfiniteReport conditions;
};

/// Treats m as mixed moments of (theta00, theta11) and checks the even
/// central moments and the 2x2 covariance matrix. `n` is the sequence length
/// (m is defined for a+b <= n-1).
MeInfiniteReport me_infinite_necessary(const PairMap& m, int n);

}  // namespace exchkit
