#include "exchkit/dfpe.hpp"

#include <deque>
#include <map>
#include <sstream>

namespace exchkit {

DfpeOrder::DfpeOrder(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw Error(ErrorKind::InvalidArgument, "order needs at least one group");
  int total = 0;
  for (int s : sizes_) {
    if (s < 0) throw Error(ErrorKind::InvalidArgument, "negative group size");
    total += s;
  }
  if (total < 1) throw Error(ErrorKind::InvalidArgument, "order has no variables");
}

bool DfpeOrder::within(const DfpeOrder& other) const {
  if (groups() != other.groups()) return false;
  for (std::size_t i = 0; i < groups(); ++i) {
    if (sizes_[i] > other.sizes_[i]) return false;
  }
  return true;
}

std::string DfpeOrder::str() const { return format_index(MultiIndex(sizes_)); }

DfpeDistribution::DfpeDistribution(DfpeOrder order, std::vector<Rational> weights)
    : order_(std::move(order)), weights_(std::move(weights)) {
  if (weights_.size() != order_.class_total()) throw Error(ErrorKind::LengthMismatch, "weight vector length");
}

MomentVector::MomentVector(DfpeOrder order, std::vector<Rational> values)
    : order_(std::move(order)), values_(std::move(values)) {
  if (values_.size() != order_.class_total()) throw Error(ErrorKind::LengthMismatch, "moment vector length");
  if (values_.front() != 1) throw Error(ErrorKind::InvalidArgument, "moment at the zero index must be 1");
}

Rational MomentVector::mean(std::size_t group) const {
  if (order_[group] == 0) return 0;
  MultiIndex unit(std::vector<int>(order_.groups(), 0));
  unit[group] = 1;
  return at(unit);
}

std::string lambda_tag(const DfpeOrder& n) { return "Lambda" + n.str(); }

PointV MomentVector::to_point() const {
  return PointV{std::vector<Rational>(values_.begin() + 1, values_.end()), lambda_tag(order_)};
}

CovarianceVector::CovarianceVector(DfpeOrder order, std::vector<Rational> means, std::vector<Rational> covariances)
    : order_(std::move(order)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (means_.size() != order_.groups()) throw Error(ErrorKind::LengthMismatch, "means vector length");
  if (covariances_.size() != order_.class_total()) throw Error(ErrorKind::LengthMismatch, "covariance vector length");
  if (covariances_.front() != 1) throw Error(ErrorKind::InvalidArgument, "Cov at the zero index must be 1");
  const IndexGrid grid = order_.grid();
  for (std::size_t g = 0; g < order_.groups(); ++g) {
    if (order_[g] == 0) continue;
    MultiIndex unit(std::vector<int>(order_.groups(), 0));
    unit[g] = 1;
    if (covariances_[grid.rank(unit)] != 0) {
      throw Error(ErrorKind::InvalidArgument, "first-order covariance " + format_index(unit) + " must be 0");
    }
  }
}

DfpeDistribution validate_dfpe(std::vector<Rational> raw_weights, const DfpeOrder& order) {
  const IndexGrid grid = order.grid();
  if (raw_weights.size() != grid.size()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(grid.size()) + " weights, got " +
                                               std::to_string(raw_weights.size()));
  }
  Rational total = 0;
  for (std::size_t i = 0; i < raw_weights.size(); ++i) {
    if (raw_weights[i] < 0) throw Error(ErrorKind::NegativeWeight, "at index " + format_index(grid.unrank(i)));
    total += raw_weights[i];
  }
  if (total != 1) throw Error(ErrorKind::NotNormalized, "weights sum to " + format_rational(total));
  return DfpeDistribution(order, std::move(raw_weights));
}

Integer class_count(const DfpeOrder& order, const MultiIndex& k) {
  if (!order.grid().contains(k)) throw Error(ErrorKind::IndexOutOfRange, format_index(k));
  Integer count = 1;
  for (std::size_t i = 0; i < k.size(); ++i) count *= binom(order[i], k[i]);
  return count;
}

std::vector<Rational> weights_to_point_probs(const DfpeDistribution& dist) {
  const auto classes = dist.order().grid().all();
  std::vector<Rational> out(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out[i] = dist.weights()[i] / Rational(class_count(dist.order(), classes[i]));
  }
  return out;
}

DfpeDistribution marginalize(const DfpeDistribution& dist, const DfpeOrder& m) {
  const DfpeOrder& n = dist.order();
  if (!m.within(n)) throw Error(ErrorKind::IndexOutOfRange, "marginal order " + m.str() + " exceeds " + n.str());
  const auto sub = m.grid().all();
  const auto full = n.grid().all();
  Integer denominator = 1;
  for (std::size_t i = 0; i < n.groups(); ++i) denominator *= binom(n[i], m[i]);

  std::vector<Rational> out(sub.size(), Rational(0));
  for (std::size_t a = 0; a < sub.size(); ++a) {
    const auto& l = sub[a];
    for (std::size_t b = 0; b < full.size(); ++b) {
      if (sgn(dist.weights()[b]) == 0) continue;
      const auto& k = full[b];
      Integer numerator = 1;
      for (std::size_t i = 0; i < n.groups() && numerator != 0; ++i) {
        numerator *= binom(k[i], l[i]) * binom(n[i] - k[i], m[i] - l[i]);
      }
      if (numerator != 0) out[a] += make_rational(numerator, denominator) * dist.weights()[b];
    }
  }
  return DfpeDistribution(m, std::move(out));
}

MomentVector moments_from_weights(const DfpeDistribution& dist) {
  const DfpeOrder& n = dist.order();
  const auto idx = n.grid().all();
  std::vector<Rational> values(idx.size(), Rational(0));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto& k = idx[a];
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (sgn(dist.weights()[b]) == 0) continue;
      const auto& i = idx[b];
      Rational factor = 1;
      for (std::size_t g = 0; g < n.groups() && sgn(factor) != 0; ++g) {
        factor *= make_rational(falling(i[g], k[g]), falling(n[g], k[g]));
      }
      if (sgn(factor) != 0) values[a] += factor * dist.weights()[b];
    }
  }
  return MomentVector(n, std::move(values));
}

namespace {

// (-1)^{|n-k|} D_1^{n1-k1} ... D_g^{ng-kg} w_k
Rational signed_difference(const MomentVector& mv, const MultiIndex& k) {
  const DfpeOrder& n = mv.order();
  std::vector<int> span(n.groups());
  for (std::size_t i = 0; i < n.groups(); ++i) span[i] = n[i] - k[i];
  Rational sum = 0;
  for (const auto& j : IndexGrid(span).all()) {
    Integer coefficient = 1;
    MultiIndex at = k;
    for (std::size_t i = 0; i < n.groups(); ++i) {
      coefficient *= binom(span[i], j[i]);
      at[i] += j[i];
    }
    if (j.total() % 2) coefficient = -coefficient;
    sum += Rational(coefficient) * mv.at(at);
  }
  return sum;
}

}  // namespace

std::vector<MultiIndex> check_moment_conditions(const MomentVector& mv) {
  std::vector<MultiIndex> violations;
  for (const auto& k : mv.order().grid().all()) {
    if (signed_difference(mv, k) < 0) violations.push_back(k);
  }
  return violations;
}

DfpeDistribution weights_from_moments(const MomentVector& mv) {
  const DfpeOrder& n = mv.order();
  const auto idx = n.grid().all();
  std::vector<Rational> weights(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    Rational diff = signed_difference(mv, idx[a]);
    if (diff < 0) {
      throw Error(ErrorKind::SignConditionViolated,
                  "difference at " + format_index(idx[a]) + " is " + format_rational(diff));
    }
    weights[a] = Rational(class_count(n, idx[a])) * diff;
  }
  return DfpeDistribution(n, std::move(weights));
}

CovarianceVector covariances_from_moments(const MomentVector& mv) {
  const DfpeOrder& n = mv.order();
  std::vector<Rational> means(n.groups());
  for (std::size_t i = 0; i < n.groups(); ++i) means[i] = mv.mean(i);
  const auto idx = n.grid().all();
  std::vector<Rational> cov(idx.size());
  auto lookup = [&](const MultiIndex& k) -> const Rational& { return mv.at(k); };
  for (std::size_t a = 0; a < idx.size(); ++a) cov[a] = central_moment(idx[a], means, lookup);
  return CovarianceVector(n, std::move(means), std::move(cov));
}

MomentVector moments_from_covariances(const CovarianceVector& cv) {
  const DfpeOrder& n = cv.order();
  std::vector<Rational> negated(cv.means().size());
  for (std::size_t i = 0; i < negated.size(); ++i) negated[i] = -cv.means()[i];
  const auto idx = n.grid().all();
  std::vector<Rational> values(idx.size());
  auto lookup = [&](const MultiIndex& k) -> const Rational& { return cv.at(k); };
  for (std::size_t a = 0; a < idx.size(); ++a) values[a] = central_moment(idx[a], negated, lookup);
  return MomentVector(n, std::move(values));
}

bool is_nonnegative_definite(std::vector<std::vector<Rational>> a) {
  while (!a.empty()) {
    const std::size_t size = a.size();
    std::size_t pivot = size;
    for (std::size_t i = 0; i < size; ++i) {
      if (sgn(a[i][i]) > 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == size) {
      // No positive pivot left: the remainder must vanish entirely.
      for (const auto& row : a) {
        for (const auto& x : row) {
          if (sgn(x) != 0) return false;
        }
      }
      return true;
    }
    std::vector<std::vector<Rational>> schur;
    schur.reserve(size - 1);
    for (std::size_t i = 0; i < size; ++i) {
      if (i == pivot) continue;
      std::vector<Rational> row;
      row.reserve(size - 1);
      for (std::size_t j = 0; j < size; ++j) {
        if (j == pivot) continue;
        row.push_back(a[i][j] - a[i][pivot] * a[pivot][j] / a[pivot][pivot]);
      }
      schur.push_back(std::move(row));
    }
    a = std::move(schur);
  }
  return true;
}

Rational determinant(std::vector<std::vector<Rational>> a) {
  const std::size_t size = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < size; ++c) {
    std::size_t p = c;
    while (p < size && sgn(a[p][c]) == 0) ++p;
    if (p == size) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t i = c + 1; i < size; ++i) {
      if (sgn(a[i][c]) == 0) continue;
      Rational factor = a[i][c] / a[c][c];
      for (std::size_t j = c; j < size; ++j) a[i][j] -= factor * a[c][j];
    }
  }
  return det;
}

InfiniteReport check_infinite_necessary(const CovarianceVector& cv) {
  const DfpeOrder& n = cv.order();
  const std::size_t g = n.groups();
  InfiniteReport report;

  std::vector<int> halves(g);
  for (std::size_t i = 0; i < g; ++i) halves[i] = n[i] / 2;
  for (const auto& k : IndexGrid(halves).all()) {
    if (k.is_zero()) continue;
    MultiIndex even = k;
    for (std::size_t i = 0; i < g; ++i) even[i] *= 2;
    if (cv.at(even) < 0) report.even_cov_violations.push_back(even);
  }

  for (std::size_t i = 0; i < g; ++i) {
    if (n[i] >= 2) report.matrix_groups.push_back(i);
  }
  const std::size_t size = report.matrix_groups.size();
  report.matrix.assign(size, std::vector<Rational>(size));
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      MultiIndex k(std::vector<int>(g, 0));
      k[report.matrix_groups[a]] += 1;
      k[report.matrix_groups[b]] += 1;
      report.matrix[a][b] = cv.at(k);
    }
  }
  report.det = size ? determinant(report.matrix) : Rational(1);
  report.psd = is_nonnegative_definite(report.matrix);
  return report;
}

MomentVector lambda_vertex(const MultiIndex& k, const DfpeOrder& r, const DfpeOrder& n) {
  if (!r.grid().contains(k)) throw Error(ErrorKind::IndexOutOfRange, format_index(k) + " outside " + r.str());
  if (!n.within(r)) throw Error(ErrorKind::IndexOutOfRange, "projection order " + n.str() + " exceeds " + r.str());
  const auto idx = n.grid().all();
  std::vector<Rational> values(idx.size(), Rational(0));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto& l = idx[a];
    Rational v = 1;
    for (std::size_t i = 0; i < n.groups(); ++i) {
      if (l[i] > k[i]) {
        v = 0;
        break;
      }
      v *= make_rational(falling(k[i], l[i]), falling(r[i], l[i]));
    }
    values[a] = v;
  }
  return MomentVector(n, std::move(values));
}

std::vector<MomentVector> extendibility_vertices(const DfpeOrder& n, const DfpeOrder& r) {
  if (!n.within(r)) throw Error(ErrorKind::IndexOutOfRange, "target order " + r.str() + " below " + n.str());
  std::vector<MomentVector> out;
  for (const auto& k : r.grid().all()) out.push_back(lambda_vertex(k, r, n));
  return out;
}

MembershipCertificate dfpe_extendible(const MomentVector& mv, const DfpeOrder& r) {
  const auto vertices = extendibility_vertices(mv.order(), r);
  std::vector<PointV> points;
  points.reserve(vertices.size());
  for (const auto& v : vertices) points.push_back(v.to_point());
  return lp_membership(mv.to_point(), points);
}

MembershipCertificate dfpe_extendible(const DfpeDistribution& dist, const DfpeOrder& r) {
  return dfpe_extendible(moments_from_weights(dist), r);
}

FrontierResult extendibility_frontier(const DfpeDistribution& dist, const DfpeOrder& max_r) {
  const DfpeOrder& n = dist.order();
  if (!n.within(max_r)) throw Error(ErrorKind::IndexOutOfRange, "bound " + max_r.str() + " below " + n.str());
  const MomentVector mv = moments_from_weights(dist);
  std::map<DfpeOrder, bool> known;
  auto extendible = [&](const DfpeOrder& r) {
    auto it = known.find(r);
    if (it != known.end()) return it->second;
    bool inside = dfpe_extendible(mv, r).inside();
    known.emplace(r, inside);
    return inside;
  };

  FrontierResult result;
  std::deque<DfpeOrder> queue{n};
  known.emplace(n, true);
  std::map<DfpeOrder, bool> expanded;
  while (!queue.empty()) {
    DfpeOrder r = queue.front();
    queue.pop_front();
    if (expanded.count(r)) continue;
    expanded.emplace(r, true);
    ++result.extendible_count;

    bool maximal = true;
    bool touches_bound = false;
    for (std::size_t i = 0; i < n.groups(); ++i) {
      if (r[i] >= max_r[i]) {
        touches_bound = true;
        continue;
      }
      std::vector<int> next = r.sizes();
      ++next[i];
      DfpeOrder up(next);
      if (extendible(up)) {
        maximal = false;
        if (!expanded.count(up)) queue.push_back(up);
      }
    }
    if (maximal) (touches_bound ? result.bound_limited : result.exact).push_back(r);
  }
  std::sort(result.exact.begin(), result.exact.end());
  std::sort(result.bound_limited.begin(), result.bound_limited.end());
  return result;
}

VolumeEstimate dfpe_volume_ratio(const DfpeOrder& n, const DfpeOrder& r, const VolumeOptions& options) {
  VolumeProblem problem;
  for (const auto& v : extendibility_vertices(n, n)) problem.ambient_vertices.push_back(v.to_point());
  for (const auto& v : extendibility_vertices(n, r)) problem.target_vertices.push_back(v.to_point());
  return volume_ratio(problem, options);
}

}  // namespace exchkit
