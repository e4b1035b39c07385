#include "exchkit/markov.hpp"

#include <algorithm>
#include <sstream>

namespace exchkit {

int TransitionCountMatrix::kind() const { return ending_state(*this) == start ? 1 : 2; }

std::string format_tcm(const TransitionCountMatrix& m) {
  std::ostringstream out;
  out << "[[" << m.n00() << ',' << m.n01() << "],[" << m.n10() << ',' << m.n11() << "]]";
  if (m.start != 0) out << " start " << m.start;
  return out.str();
}

namespace {

enum class Defect { None, Negative, Flow, Disconnected };

Defect classify(const TransitionCounts& c, int start, int& end) {
  for (int v : c) {
    if (v < 0) return Defect::Negative;
  }
  const int out0 = c[0] + c[1], in0 = c[0] + c[2];
  const int out1 = c[2] + c[3], in1 = c[1] + c[3];
  const int balance[2] = {out0 - in0, out1 - in1};
  if (balance[0] == 0 && balance[1] == 0) {
    end = start;
  } else if (balance[start] == 1 && balance[1 - start] == -1) {
    end = 1 - start;
  } else {
    return Defect::Flow;
  }
  // Both states are visited iff the other state appears at all; they are
  // then connected only through a cross transition.
  const int other = 1 - start;
  const bool other_visited = (other == 0 ? out0 + in0 : out1 + in1) > 0;
  if (other_visited && c[1] + c[2] == 0) return Defect::Disconnected;
  return Defect::None;
}

}  // namespace

std::optional<int> realized_end_state(const TransitionCounts& counts, int start) {
  if (start != 0 && start != 1) return std::nullopt;
  int end = start;
  if (classify(counts, start, end) != Defect::None) return std::nullopt;
  return end;
}

TransitionCountMatrix validate_tcm(const TransitionCounts& counts, int start) {
  if (start != 0 && start != 1) throw Error(ErrorKind::InvalidArgument, "start state must be 0 or 1");
  int end = start;
  switch (classify(counts, start, end)) {
    case Defect::Negative: throw Error(ErrorKind::NegativeCount, "negative transition count");
    case Defect::Flow: throw Error(ErrorKind::FlowImbalance, "counts do not balance from start " + std::to_string(start));
    case Defect::Disconnected: throw Error(ErrorKind::NotIrreducible, "transition graph is disconnected");
    case Defect::None: break;
  }
  return TransitionCountMatrix{counts, start};
}

int ending_state(const TransitionCountMatrix& m) {
  auto end = realized_end_state(m.counts, m.start);
  if (!end) throw Error(ErrorKind::InvalidMatrix, format_tcm(m));
  return *end;
}

std::vector<TransitionCountMatrix> PhiSets::all() const {
  std::vector<TransitionCountMatrix> out = first_kind;
  out.insert(out.end(), second_kind.begin(), second_kind.end());
  return out;
}

PhiSets enumerate_phi(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "length must be >= 1");
  const int transitions = n - 1;
  PhiSets out;
  out.first_kind.push_back(TransitionCountMatrix{{transitions, 0, 0, 0}, 0});
  for (int k = 1; 2 * k <= transitions; ++k) {
    for (int n00 = 0; n00 <= transitions - 2 * k; ++n00) {
      out.first_kind.push_back(TransitionCountMatrix{{n00, k, k, transitions - 2 * k - n00}, 0});
    }
  }
  for (int k = 0; 2 * k + 1 <= transitions; ++k) {
    for (int n00 = 0; n00 <= transitions - 2 * k - 1; ++n00) {
      out.second_kind.push_back(TransitionCountMatrix{{n00, k + 1, k, transitions - 2 * k - 1 - n00}, 0});
    }
  }
  return out;
}

Integer sequence_count(const TransitionCounts& counts, int start) {
  auto end = realized_end_state(counts, start);
  if (!end) return 0;
  const int out0 = counts[0] + counts[1];
  const int out1 = counts[2] + counts[3];
  // The last exit of every state other than the end state is forced to be
  // the cross transition; all other exits are freely ordered.
  if (*end == 0) {
    return binom(out0, counts[0]) * (out1 == 0 ? Integer(1) : binom(out1 - 1, counts[3]));
  }
  return (out0 == 0 ? Integer(1) : binom(out0 - 1, counts[0])) * binom(out1, counts[3]);
}

Integer whittle_count(const TransitionCountMatrix& m) {
  (void)ending_state(m);
  return sequence_count(m.counts, m.start);
}

Rational whittle_determinant_count(const TransitionCountMatrix& m) {
  const int end = ending_state(m);
  const int other = 1 - end;
  // Removing the end state leaves the 1x1 minor b_oo = 1 - n_oo/n_o^+; an
  // unvisited state contributes an empty factor.
  Rational minor = 1;
  if (m.exits(other) > 0) minor = make_rational(m.count(other, end), m.exits(other));
  Integer numerator = factorial(m.exits(0)) * factorial(m.exits(1));
  Integer denominator = 1;
  for (int v : m.counts) denominator *= factorial(v);
  return minor * make_rational(numerator, denominator);
}

MeDistribution::MeDistribution(int n, std::vector<Rational> weights)
    : n_(n), classes_(enumerate_phi(n).all()), weights_(std::move(weights)) {
  if (weights_.size() != classes_.size()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(classes_.size()) + " weights, got " +
                                               std::to_string(weights_.size()));
  }
}

std::size_t MeDistribution::index_of(const TransitionCountMatrix& m) const {
  auto it = std::find(classes_.begin(), classes_.end(), m);
  if (it == classes_.end()) throw Error(ErrorKind::InvalidMatrix, format_tcm(m) + " not in Phi(0," + std::to_string(n_) + ")");
  return static_cast<std::size_t>(it - classes_.begin());
}

MeDistribution validate_me(int n, std::vector<Rational> weights) {
  MeDistribution d(n, std::move(weights));
  Rational total = 0;
  for (std::size_t i = 0; i < d.weights().size(); ++i) {
    if (d.weights()[i] < 0) throw Error(ErrorKind::NegativeWeight, "class " + format_tcm(d.classes()[i]));
    total += d.weights()[i];
  }
  if (total != 1) throw Error(ErrorKind::NotNormalized, "weights sum to " + format_rational(total));
  return d;
}

MeDistribution me_point_mass(const TransitionCountMatrix& m) {
  if (m.start != 0) throw Error(ErrorKind::InvalidMatrix, "Markov laws here start at 0");
  (void)ending_state(m);
  const int n = m.length();
  std::vector<Rational> weights(enumerate_phi(n).size(), Rational(0));
  MeDistribution d(n, weights);
  weights[d.index_of(m)] = 1;
  return MeDistribution(n, std::move(weights));
}

std::vector<Rational> me_weights_to_point_probs(const MeDistribution& d) {
  std::vector<Rational> out(d.weights().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.weights()[i] / Rational(whittle_count(d.classes()[i]));
  return out;
}

MeDistribution me_marginalize(const MeDistribution& d, int k) {
  if (k < 1 || k > d.length()) {
    throw Error(ErrorKind::IndexOutOfRange, "marginal length " + std::to_string(k) + " outside 1.." +
                                                std::to_string(d.length()));
  }
  if (k == d.length()) return d;
  const auto probs = me_weights_to_point_probs(d);
  const auto prefixes = enumerate_phi(k).all();
  std::vector<Rational> weights(prefixes.size(), Rational(0));
  for (std::size_t a = 0; a < prefixes.size(); ++a) {
    const auto& prefix = prefixes[a];
    const int junction = ending_state(prefix);
    // Each specific prefix sequence extends to the completions of the
    // residual counts from the junction state.
    Rational p = 0;
    for (std::size_t b = 0; b < d.classes().size(); ++b) {
      if (sgn(probs[b]) == 0) continue;
      TransitionCounts residual;
      for (int i = 0; i < 4; ++i) residual[i] = d.classes()[b].counts[i] - prefix.counts[i];
      Integer completions = sequence_count(residual, junction);
      if (completions != 0) p += Rational(completions) * probs[b];
    }
    weights[a] = Rational(whittle_count(prefix)) * p;
  }
  return MeDistribution(k, std::move(weights));
}

std::string gamma_tag(int n) { return "Gamma_" + std::to_string(n); }

GammaPoint::GammaPoint(int n, std::vector<Rational> values) : n_(n), values_(std::move(values)) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "length must be >= 1");
  if (values_.size() != pairs(n).size()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(pairs(n).size()) + " coordinates, got " +
                                               std::to_string(values_.size()));
  }
}

std::vector<std::pair<int, int>> GammaPoint::pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a <= n - 2; ++a) {
    for (int b = 0; a + b <= n - 2; ++b) out.emplace_back(a, b);
  }
  out.emplace_back(n - 1, 0);
  return out;
}

namespace {

// Position of the regular pair (a,b), a+b <= n-2, in the canonical order.
std::size_t regular_rank(int n, int a, int b) {
  const int top = n - 2;
  // Rows a' < a contribute (top - a' + 1) pairs each.
  std::size_t pos = 0;
  for (int r = 0; r < a; ++r) pos += static_cast<std::size_t>(top - r + 1);
  return pos + static_cast<std::size_t>(b);
}

// Contribution factor of class N to w_{0,a,b}: the fraction of N's
// sequences that begin with the block 0^{a+1} 1^{b+1}.
Rational block_fraction(const TransitionCountMatrix& m, int a, int b) {
  if (m.n01() == 0) return 0;
  Integer num, den;
  if (m.kind() == 1) {
    num = falling(m.n00(), a) * m.n01() * falling(m.n11(), b);
    if (num == 0) return 0;
    den = falling(m.exits(0), a + 1) * falling(m.exits(1) - 1, b);
  } else if (m.n10() == 0) {
    // A single sequence 0^{n00+1} 1^{n11+1}; the urn form below would count
    // its only 0->1 exit as forced and miss it.
    return (a == m.n00() && b <= m.n11()) ? 1 : 0;
  } else {
    num = falling(m.n00(), a) * (m.n01() - 1) * falling(m.n11(), b);
    if (num == 0) return 0;
    den = falling(m.exits(0) - 1, a + 1) * falling(m.exits(1), b);
  }
  return make_rational(num, den);
}

bool is_all_zeros(const TransitionCountMatrix& m) { return m.n01() == 0 && m.n10() == 0 && m.n11() == 0; }

// (-1)^{c+d-1} D0^{c-1} D1^d w_{0,n00,n11} with c = n01, d = n10.
Rational class_probability(const GammaPoint& g, const TransitionCountMatrix& m) {
  if (is_all_zeros(m)) return g.special();
  const int c = m.n01() - 1;
  const int d = m.n10();
  Rational sum = 0;
  for (int i = 0; i <= c; ++i) {
    for (int j = 0; j <= d; ++j) {
      Integer coefficient = binom(c, i) * binom(d, j);
      if ((i + j) % 2) coefficient = -coefficient;
      sum += Rational(coefficient) * g.regular(m.n00() + i, m.n11() + j);
    }
  }
  return sum;
}

}  // namespace

const Rational& GammaPoint::regular(int a, int b) const {
  if (a < 0 || b < 0 || a + b > n_ - 2) {
    throw Error(ErrorKind::IndexOutOfRange, "(" + std::to_string(a) + "," + std::to_string(b) + ") not a regular pair");
  }
  return values_[regular_rank(n_, a, b)];
}

PointV GammaPoint::to_point() const { return PointV{values_, gamma_tag(n_)}; }

GammaPoint gamma_from_weights(const MeDistribution& d) {
  const int n = d.length();
  const auto pairs = GammaPoint::pairs(n);
  std::vector<Rational> values(pairs.size(), Rational(0));
  const auto probs = me_weights_to_point_probs(d);
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    for (std::size_t c = 0; c < d.classes().size(); ++c) {
      if (sgn(d.weights()[c]) == 0) continue;
      Rational f = block_fraction(d.classes()[c], a, b);
      if (sgn(f) != 0) values[i] += f * d.weights()[c];
    }
  }
  values.back() = probs.front();  // the all-zeros class has a single sequence
  return GammaPoint(n, std::move(values));
}

GammaConditionReport check_gamma_conditions(const GammaPoint& g) {
  GammaConditionReport report;
  for (const auto& m : enumerate_phi(g.length()).all()) {
    Rational p = class_probability(g, m);
    if (p < 0) report.violations.push_back(m);
    report.total_mass += Rational(whittle_count(m)) * p;
  }
  return report;
}

MeDistribution weights_from_gamma(const GammaPoint& g) {
  const auto classes = enumerate_phi(g.length()).all();
  std::vector<Rational> weights(classes.size());
  Rational total = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    Rational p = class_probability(g, classes[i]);
    if (p < 0) {
      throw Error(ErrorKind::SignConditionViolated,
                  "class " + format_tcm(classes[i]) + " gets probability " + format_rational(p));
    }
    weights[i] = Rational(whittle_count(classes[i])) * p;
    total += weights[i];
  }
  if (total != 1) throw Error(ErrorKind::NotNormalized, "class weights sum to " + format_rational(total));
  return MeDistribution(g.length(), std::move(weights));
}

GammaPoint gamma_vertex(const TransitionCountMatrix& r_class, int n) {
  if (r_class.start != 0 || !realized_end_state(r_class.counts, 0)) {
    throw Error(ErrorKind::InvalidMatrix, format_tcm(r_class));
  }
  const int r = r_class.length();
  if (n < 1 || n > r) {
    throw Error(ErrorKind::IndexOutOfRange, "projection length " + std::to_string(n) + " for class of length " +
                                                std::to_string(r));
  }
  const auto pairs = GammaPoint::pairs(n);
  std::vector<Rational> values(pairs.size(), Rational(0));
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) values[i] = block_fraction(r_class, pairs[i].first, pairs[i].second);

  // Special pair: the fraction of R's sequences whose first n states are 0.
  TransitionCounts residual = r_class.counts;
  residual[0] -= n - 1;
  Integer completions = sequence_count(residual, 0);
  values.back() = make_rational(completions, whittle_count(r_class));
  return GammaPoint(n, std::move(values));
}

std::vector<PointV> gamma_extension_vertices(int n, int r) {
  if (r < n) throw Error(ErrorKind::IndexOutOfRange, "target length below current length");
  std::vector<PointV> out;
  for (const auto& m : enumerate_phi(r).all()) out.push_back(gamma_vertex(m, n).to_point());
  return out;
}

MembershipCertificate me_extendible(const GammaPoint& g, int r) {
  if (r < g.length()) {
    throw Error(ErrorKind::IndexOutOfRange, "target length " + std::to_string(r) + " below " +
                                                std::to_string(g.length()));
  }
  return lp_membership(g.to_point(), gamma_extension_vertices(g.length(), r));
}

MembershipCertificate me_extendible(const MeDistribution& d, int r) { return me_extendible(gamma_from_weights(d), r); }

VolumeEstimate me_volume_ratio(int n, int r, const VolumeOptions& options) {
  VolumeProblem problem;
  problem.ambient_vertices = gamma_extension_vertices(n, n);
  problem.target_vertices = gamma_extension_vertices(n, r);
  return volume_ratio(problem, options);
}

PairMap me_mixed_moments(const MixedMomentInput& input) {
  const int n = input.gamma0.length();
  auto violated = [](const std::string& what) { return Error(ErrorKind::IndependenceViolated, what); };
  if (sgn(input.q0) <= 0 || sgn(input.q1) <= 0) throw violated("both start states need positive probability");
  if (input.q0 + input.q1 != 1) throw violated("q0 + q1 = " + format_rational(input.q0 + input.q1));
  if (input.p1_blocks.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(n) + " start-1 block probabilities");
  }

  PairMap m;
  for (int b = 0; b <= n - 1; ++b) m[{0, b}] = input.p1_blocks[static_cast<std::size_t>(b)] / input.q1;
  for (int a = 1; a <= n - 1; ++a) {
    for (int b = 0; a + b <= n - 1; ++b) {
      m[{a, b}] = m[{a - 1, b}] - input.gamma0.regular(a - 1, b) / input.q0;
    }
  }

  if (m[{0, 0}] != 1) throw violated("P(X1 = 1) block disagrees with q1");
  for (const auto& [ab, value] : m) {
    if (value < 0 || value > 1) {
      throw violated("m" + format_index({ab.first, ab.second}) + " = " + format_rational(value) + " outside [0,1]");
    }
    auto next = m.find({ab.first, ab.second + 1});
    if (next != m.end() && next->second > value) {
      throw violated("m" + format_index({ab.first, ab.second}) + " increases in b");
    }
  }
  // The all-zeros probability is q0 * m_{n-1,0} under independence.
  if (n >= 2 && input.gamma0.special() != input.q0 * m[{n - 1, 0}]) {
    throw violated("all-zeros probability inconsistent with the recurrence");
  }
  if (n == 1 && input.gamma0.special() != input.q0) throw violated("P(X1 = 0) disagrees with q0");
  return m;
}

MeInfiniteReport me_infinite_necessary(const PairMap& m, int n) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "needs sequences of length >= 3");
  const int top = n - 1;
  for (int a = 0; a <= top; ++a) {
    for (int b = 0; a + b <= top; ++b) {
      if (!m.count({a, b})) throw Error(ErrorKind::LengthMismatch, "missing m" + format_index({a, b}));
    }
  }
  MeInfiniteReport report;
  report.mean00 = m.at({1, 0});
  report.mean11 = m.at({0, 1});
  const std::vector<Rational> means{report.mean00, report.mean11};
  auto lookup = [&](const MultiIndex& k) -> const Rational& { return m.at({k[0], k[1]}); };
  for (int a = 0; a <= top; ++a) {
    for (int b = 0; a + b <= top; ++b) report.covariances[{a, b}] = central_moment(MultiIndex{a, b}, means, lookup);
  }
  for (int a = 0; 2 * a <= top; ++a) {
    for (int b = 0; 2 * a + 2 * b <= top; ++b) {
      if (a == 0 && b == 0) continue;
      if (report.covariances.at({2 * a, 2 * b}) < 0) report.conditions.even_cov_violations.push_back(MultiIndex{2 * a, 2 * b});
    }
  }
  auto& c = report.conditions;
  c.matrix_groups = {0, 1};
  c.matrix = {{report.covariances.at({2, 0}), report.covariances.at({1, 1})},
              {report.covariances.at({1, 1}), report.covariances.at({0, 2})}};
  c.det = determinant(c.matrix);
  c.psd = is_nonnegative_definite(c.matrix);
  return report;
}

}  // namespace exchkit
