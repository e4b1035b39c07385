#pragma once

// Convex-hull membership by exact linear programming, and Monte Carlo
// estimation of the volume fraction of a sub-polytope.

#include "exchkit/core.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace exchkit {

/// A point in some coordinate space. The tag names the space (e.g. "Lambda(2,2)"
/// or "Gamma_4") so that points from different spaces are never compared.
struct PointV {
  std::vector<Rational> coords;
  std::string space_tag;

  std::size_t dimension() const { return coords.size(); }
};

enum class Verdict { Inside, Outside };

std::string_view to_string(Verdict verdict);

/// The hyperplane {x : z.x = z0}.
struct Hyperplane {
  std::vector<Rational> z;
  Rational z0;
};

struct MembershipCertificate {
  Verdict verdict = Verdict::Inside;
  /// Present iff Outside; scaled so that z.w - z0 = 1 (the optimum of the
  /// bounded separation program).
  std::optional<Hyperplane> hyperplane;
  /// Present iff Inside: convex weights reproducing the query point.
  std::optional<std::vector<Rational>> barycentric;

  bool inside() const { return verdict == Verdict::Inside; }
};

/// Re-checks a certificate in exact arithmetic: for Outside every vertex
/// satisfies z.v <= z0 and the query z.w > z0; for Inside the barycentric
/// weights are nonnegative, sum to 1 and reproduce w.
bool verify_certificate(const MembershipCertificate& cert, const PointV& w, const std::vector<PointV>& vertices);

/// Decides w in conv(vertices) exactly.
///
/// The separation program
///   maximize z.w - z0  s.t.  z.v - z0 <= 0 for every vertex v,  z.w - z0 <= 1
/// has optimum 0 when w is in the hull and 1 otherwise. It is solved through
/// its dual, the hull feasibility problem sum_j mu_j v_j = w, sum_j mu_j = 1,
/// mu >= 0, by a phase-one rational simplex with Bland's rule. On
/// infeasibility the optimal dual multipliers are the separating (z, z0).
MembershipCertificate lp_membership(const PointV& w, const std::vector<PointV>& vertices);

/// Uniform point of the standard simplex with dim+1 barycentric coordinates,
/// from the spacings of dim sorted uniforms.
std::vector<double> sample_simplex(int dim, std::mt19937_64& rng);

/// Floating-point phase-one simplex (Dantzig rule) over a fixed vertex set.
/// Used to classify Monte Carlo samples; anything it cannot settle with a
/// clear margin is escalated to exact arithmetic by the caller.
class FloatHullLp {
 public:
  explicit FloatHullLp(const std::vector<PointV>& vertices);

  struct Result {
    double objective = 0.0;          // phase-one infeasibility, >= 0
    bool converged = false;
    std::vector<int> basis;          // column per row; columns >= vertex count are artificials
  };

  Result solve(const std::vector<double>& point) const;

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t vertex_count_;
  std::size_t dimension_;
  std::vector<double> columns_;  // (dimension_+1) x vertex_count_, row-major
};

/// Tries to prove w in conv(vertices) exactly from a candidate basis: solves
/// the basis system in rationals and checks feasibility. Returns the convex
/// weights on success.
std::optional<std::vector<Rational>> prove_inside_from_basis(const PointV& w, const std::vector<PointV>& vertices,
                                                             const std::vector<int>& basis);

struct VolumeEstimate {
  double ratio = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  std::uint64_t seed = 0;
  /// Samples whose verdict required exact arithmetic (inside proofs and full
  /// exact solves).
  std::uint64_t exact_escalations = 0;
  /// Samples re-decided by a full exact solve for auditing, and how many of
  /// those disagreed with the float-path verdict.
  std::uint64_t audited = 0;
  std::uint64_t audit_disagreements = 0;
};

struct VolumeOptions {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 20240601;
  unsigned workers = 1;
  /// Float phase-one objectives above this are taken as Outside without
  /// escalation.
  double epsilon = 1e-9;
  /// Every k-th sample (per worker) is audited with a full exact solve.
  std::uint64_t audit_stride = 100;
};

/// A source simplex given by its (affinely independent) vertices and a
/// target polytope given as a convex hull, in the same coordinates.
struct VolumeProblem {
  std::vector<PointV> ambient_vertices;
  std::vector<PointV> target_vertices;
};

/// Fraction of the ambient simplex lying in the target hull. Samples are
/// split over workers; worker i draws from an mt19937_64 seeded with
/// (seed, i), so results are deterministic for a fixed (seed, workers).
VolumeEstimate volume_ratio(const VolumeProblem& problem, const VolumeOptions& options);

}  // namespace exchkit
