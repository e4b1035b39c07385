#include "exchkit/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace exchkit {

std::string_view to_string(Verdict verdict) { return verdict == Verdict::Inside ? "Inside" : "Outside"; }

namespace {

void check_dimensions(const PointV& w, const std::vector<PointV>& vertices) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "empty vertex list");
  for (const auto& v : vertices) {
    if (v.dimension() != w.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "vertex has " + std::to_string(v.dimension()) +
                                                    " coordinates, query has " + std::to_string(w.dimension()));
    }
    if (!v.space_tag.empty() && !w.space_tag.empty() && v.space_tag != w.space_tag) {
      throw Error(ErrorKind::DimensionMismatch, "space " + v.space_tag + " vs " + w.space_tag);
    }
  }
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

bool verify_certificate(const MembershipCertificate& cert, const PointV& w, const std::vector<PointV>& vertices) {
  if (cert.verdict == Verdict::Outside) {
    if (!cert.hyperplane) return false;
    const auto& h = *cert.hyperplane;
    if (h.z.size() != w.dimension()) return false;
    for (const auto& v : vertices) {
      if (dot(h.z, v.coords) > h.z0) return false;
    }
    return dot(h.z, w.coords) > h.z0;
  }
  if (!cert.barycentric) return false;
  const auto& mu = *cert.barycentric;
  if (mu.size() != vertices.size()) return false;
  Rational total = 0;
  std::vector<Rational> combo(w.dimension(), Rational(0));
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu[j] < 0) return false;
    total += mu[j];
    if (mu[j] == 0) continue;
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] += mu[j] * vertices[j].coords[i];
  }
  return total == 1 && combo == w.coords;
}

MembershipCertificate lp_membership(const PointV& w, const std::vector<PointV>& vertices) {
  check_dimensions(w, vertices);
  const std::size_t d = w.dimension();
  const std::size_t m = d + 1;
  const std::size_t nv = vertices.size();
  const std::size_t ncols = nv + m;

  // Rows: coordinates of the hull equation, then the convexity row. Each row
  // is negated if needed so the right-hand side is nonnegative.
  std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(ncols, Rational(0)));
  std::vector<Rational> rhs(m);
  std::vector<int> sign(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = i < d ? w.coords[i] : Rational(1);
    if (rhs[i] < 0) sign[i] = -1;
    for (std::size_t j = 0; j < nv; ++j) {
      tab[i][j] = i < d ? vertices[j].coords[i] : Rational(1);
      if (sign[i] < 0) tab[i][j] = -tab[i][j];
    }
    if (sign[i] < 0) rhs[i] = -rhs[i];
    tab[i][nv + i] = 1;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = nv + i;

  // Reduced costs of the phase-one objective (sum of artificials).
  std::vector<Rational> cost(ncols, Rational(0));
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < m; ++i) cost[j] -= tab[i][j];
  }

  for (;;) {
    std::size_t enter = ncols;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (sgn(cost[j]) < 0) {
        enter = j;
        break;
      }
    }
    if (enter == ncols) break;

    std::size_t leave = m;
    Rational best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (sgn(tab[i][enter]) <= 0) continue;
      Rational ratio = rhs[i] / tab[i][enter];
      if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    // Phase one is bounded below by zero, so a pivot row always exists.
    if (leave == m) throw Error(ErrorKind::InvalidArgument, "unbounded phase-one program");

    Rational pivot = tab[leave][enter];
    for (std::size_t j = 0; j < ncols; ++j) {
      if (sgn(tab[leave][j]) != 0) tab[leave][j] /= pivot;
    }
    rhs[leave] /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || sgn(tab[i][enter]) == 0) continue;
      Rational factor = tab[i][enter];
      for (std::size_t j = 0; j < ncols; ++j) {
        if (sgn(tab[leave][j]) != 0) tab[i][j] -= factor * tab[leave][j];
      }
      rhs[i] -= factor * rhs[leave];
    }
    if (sgn(cost[enter]) != 0) {
      Rational factor = cost[enter];
      for (std::size_t j = 0; j < ncols; ++j) {
        if (sgn(tab[leave][j]) != 0) cost[j] -= factor * tab[leave][j];
      }
    }
    basis[leave] = enter;
  }

  Rational infeasibility = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= nv) infeasibility += rhs[i];
  }

  MembershipCertificate cert;
  if (infeasibility == 0) {
    cert.verdict = Verdict::Inside;
    std::vector<Rational> mu(nv, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < nv) mu[basis[i]] = rhs[i];
    }
    cert.barycentric = std::move(mu);
    return cert;
  }

  // Simplex multipliers of the sign-adjusted rows are 1 - (reduced cost of
  // the row's artificial); undo the sign flip to get (z, -z0).
  Hyperplane h;
  h.z.resize(d);
  for (std::size_t i = 0; i < m; ++i) {
    Rational pi = (Rational(1) - cost[nv + i]) * sign[i] / infeasibility;
    if (i < d) {
      h.z[i] = pi;
    } else {
      h.z0 = -pi;
    }
  }
  cert.verdict = Verdict::Outside;
  cert.hyperplane = std::move(h);
  return cert;
}

std::vector<double> sample_simplex(int dim, std::mt19937_64& rng) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "simplex dimension must be >= 1");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> cuts(static_cast<std::size_t>(dim));
  for (auto& c : cuts) c = uniform(rng);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out(static_cast<std::size_t>(dim) + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    out[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  out.back() = 1.0 - prev;
  return out;
}

FloatHullLp::FloatHullLp(const std::vector<PointV>& vertices)
    : vertex_count_(vertices.size()), dimension_(vertices.empty() ? 0 : vertices.front().dimension()) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "empty vertex list");
  const std::size_t m = dimension_ + 1;
  columns_.assign(m * vertex_count_, 0.0);
  for (std::size_t j = 0; j < vertex_count_; ++j) {
    if (vertices[j].dimension() != dimension_) throw Error(ErrorKind::DimensionMismatch, "ragged vertex list");
    for (std::size_t i = 0; i < dimension_; ++i) columns_[i * vertex_count_ + j] = vertices[j].coords[i].get_d();
    columns_[dimension_ * vertex_count_ + j] = 1.0;
  }
}

FloatHullLp::Result FloatHullLp::solve(const std::vector<double>& point) const {
  if (point.size() != dimension_) throw Error(ErrorKind::DimensionMismatch, "query dimension");
  constexpr double kPivotTol = 1e-11;
  constexpr double kCostTol = 1e-12;
  const std::size_t m = dimension_ + 1;
  const std::size_t nv = vertex_count_;
  const std::size_t ncols = nv + m;
  const std::size_t stride = ncols + 1;  // last column is the right-hand side

  std::vector<double> tab(m * stride, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double b = i < dimension_ ? point[i] : 1.0;
    double s = b < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) tab[i * stride + j] = s * columns_[i * nv + j];
    tab[i * stride + nv + i] = 1.0;
    tab[i * stride + ncols] = s * b;
  }
  std::vector<double> cost(ncols, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < m; ++i) cost[j] -= tab[i * stride + j];
  }
  std::vector<int> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = static_cast<int>(nv + i);

  Result result;
  const std::size_t max_iter = 50 * (m + ncols);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = ncols;
    double most_negative = -kCostTol;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (cost[j] < most_negative) {
        most_negative = cost[j];
        enter = j;
      }
    }
    if (enter == ncols) {
      result.converged = true;
      break;
    }
    std::size_t leave = m;
    double best_ratio = 0.0;
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double a = tab[i * stride + enter];
      if (a <= kPivotTol) continue;
      double ratio = tab[i * stride + ncols] / a;
      if (leave == m || ratio < best_ratio - 1e-14 || (ratio <= best_ratio + 1e-14 && a > best_pivot)) {
        leave = i;
        best_ratio = ratio;
        best_pivot = a;
      }
    }
    if (leave == m) break;
    double* prow = &tab[leave * stride];
    const double pivot = prow[enter];
    for (std::size_t j = 0; j < stride; ++j) prow[j] /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      double* row = &tab[i * stride];
      const double factor = row[enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < stride; ++j) row[j] -= factor * prow[j];
    }
    const double factor = cost[enter];
    for (std::size_t j = 0; j < ncols; ++j) cost[j] -= factor * prow[j];
    basis[leave] = static_cast<int>(enter);
  }

  double infeasibility = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (static_cast<std::size_t>(basis[i]) >= nv) infeasibility += std::max(0.0, tab[i * stride + ncols]);
  }
  result.objective = infeasibility;
  result.basis = std::move(basis);
  return result;
}

std::optional<std::vector<Rational>> prove_inside_from_basis(const PointV& w, const std::vector<PointV>& vertices,
                                                             const std::vector<int>& basis) {
  const std::size_t d = w.dimension();
  const std::size_t m = d + 1;
  const std::size_t nv = vertices.size();
  if (basis.size() != m) return std::nullopt;

  // Augmented system B x = b in the original (unflipped) rows.
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1, Rational(0)));
  for (std::size_t c = 0; c < m; ++c) {
    const auto col = static_cast<std::size_t>(basis[c]);
    if (col < nv) {
      for (std::size_t i = 0; i < d; ++i) a[i][c] = vertices[col].coords[i];
      a[d][c] = 1;
    } else {
      a[col - nv][c] = 1;
    }
  }
  for (std::size_t i = 0; i < d; ++i) a[i][m] = w.coords[i];
  a[d][m] = 1;

  for (std::size_t c = 0; c < m; ++c) {
    std::size_t p = c;
    while (p < m && sgn(a[p][c]) == 0) ++p;
    if (p == m) return std::nullopt;
    std::swap(a[p], a[c]);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == c || sgn(a[i][c]) == 0) continue;
      Rational factor = a[i][c] / a[c][c];
      for (std::size_t j = c; j <= m; ++j) {
        if (sgn(a[c][j]) != 0) a[i][j] -= factor * a[c][j];
      }
    }
  }

  std::vector<Rational> mu(nv, Rational(0));
  for (std::size_t c = 0; c < m; ++c) {
    Rational x = a[c][m] / a[c][c];
    const auto col = static_cast<std::size_t>(basis[c]);
    if (col < nv) {
      if (x < 0) return std::nullopt;
      mu[col] += x;
    } else if (x != 0) {
      return std::nullopt;
    }
  }
  return mu;
}

namespace {

struct WorkerTally {
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  std::uint64_t exact = 0;
  std::uint64_t audited = 0;
  std::uint64_t disagreements = 0;
};

void run_volume_worker(const VolumeProblem& problem, const VolumeOptions& options, const FloatHullLp& lp,
                       const std::vector<std::vector<double>>& ambient_float, unsigned worker,
                       std::uint64_t sample_count, WorkerTally& tally) {
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(options.seed >> 32), static_cast<std::uint32_t>(worker)};
  std::mt19937_64 rng(seq);
  const std::size_t dim = lp.dimension();
  const int simplex_dim = static_cast<int>(problem.ambient_vertices.size()) - 1;
  const auto& target = problem.target_vertices;

  auto exact_point = [&](const std::vector<double>& bary) {
    std::vector<Rational> weights(bary.size());
    Rational total = 0;
    for (std::size_t j = 0; j < bary.size(); ++j) {
      weights[j] = Rational(bary[j]);
      total += weights[j];
    }
    PointV w{std::vector<Rational>(dim, Rational(0)), target.front().space_tag};
    for (std::size_t j = 0; j < bary.size(); ++j) {
      if (sgn(weights[j]) == 0) continue;
      Rational wj = weights[j] / total;
      for (std::size_t i = 0; i < dim; ++i) w.coords[i] += wj * problem.ambient_vertices[j].coords[i];
    }
    return w;
  };

  for (std::uint64_t s = 0; s < sample_count; ++s) {
    std::vector<double> bary;
    if (simplex_dim >= 1) {
      bary = sample_simplex(simplex_dim, rng);
    } else {
      bary = {1.0};
    }
    std::vector<double> point(dim, 0.0);
    for (std::size_t j = 0; j < bary.size(); ++j) {
      for (std::size_t i = 0; i < dim; ++i) point[i] += bary[j] * ambient_float[j][i];
    }
    auto res = lp.solve(point);

    bool inside = false;
    std::optional<PointV> exact;
    if (res.converged && res.objective > options.epsilon) {
      inside = false;
    } else {
      ++tally.exact;
      exact = exact_point(bary);
      if (res.converged && prove_inside_from_basis(*exact, target, res.basis)) {
        inside = true;
      } else {
        inside = lp_membership(*exact, target).inside();
      }
    }

    if (options.audit_stride > 0 && s % options.audit_stride == 0) {
      if (!exact) exact = exact_point(bary);
      bool audit_inside = lp_membership(*exact, target).inside();
      ++tally.audited;
      if (audit_inside != inside) {
        ++tally.disagreements;
        inside = audit_inside;
      }
    }
    ++tally.samples;
    if (inside) ++tally.hits;
  }
}

}  // namespace

VolumeEstimate volume_ratio(const VolumeProblem& problem, const VolumeOptions& options) {
  if (options.samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  if (problem.ambient_vertices.empty() || problem.target_vertices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty vertex list");
  }
  const std::size_t dim = problem.ambient_vertices.front().dimension();
  for (const auto& v : problem.ambient_vertices) {
    if (v.dimension() != dim) throw Error(ErrorKind::DimensionMismatch, "ambient vertex dimension");
  }
  for (const auto& v : problem.target_vertices) {
    if (v.dimension() != dim) throw Error(ErrorKind::DimensionMismatch, "target vertex dimension");
  }

  FloatHullLp lp(problem.target_vertices);
  std::vector<std::vector<double>> ambient_float;
  ambient_float.reserve(problem.ambient_vertices.size());
  for (const auto& v : problem.ambient_vertices) {
    std::vector<double> coords(dim);
    for (std::size_t i = 0; i < dim; ++i) coords[i] = v.coords[i].get_d();
    ambient_float.push_back(std::move(coords));
  }

  const unsigned workers = std::max(1u, options.workers);
  std::vector<WorkerTally> tallies(workers);
  std::vector<std::uint64_t> counts(workers, options.samples / workers);
  for (unsigned i = 0; i < options.samples % workers; ++i) ++counts[i];

  if (workers == 1) {
    run_volume_worker(problem, options, lp, ambient_float, 0, counts[0], tallies[0]);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) {
      threads.emplace_back(run_volume_worker, std::cref(problem), std::cref(options), std::cref(lp),
                           std::cref(ambient_float), i, counts[i], std::ref(tallies[i]));
    }
    for (auto& t : threads) t.join();
  }

  VolumeEstimate out;
  out.seed = options.seed;
  for (const auto& t : tallies) {
    out.samples += t.samples;
    out.hits += t.hits;
    out.exact_escalations += t.exact;
    out.audited += t.audited;
    out.audit_disagreements += t.disagreements;
  }
  out.ratio = static_cast<double>(out.hits) / static_cast<double>(out.samples);
  out.std_error = std::sqrt(out.ratio * (1.0 - out.ratio) / static_cast<double>(out.samples));
  return out;
}

}  // namespace exchkit
