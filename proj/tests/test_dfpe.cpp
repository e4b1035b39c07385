#include <doctest.h>

#include "exchkit/dfpe.hpp"
#include "exchkit/oracle.hpp"
#include "support.hpp"

#include <random>

using namespace exchkit;
using testsupport::Layout;

namespace {

std::vector<Rational> rats(std::initializer_list<const char*> text) {
  std::vector<Rational> out;
  for (const char* t : text) out.push_back(parse_rational(t));
  return out;
}

DfpeDistribution worked_example() {
  return validate_dfpe(rats({"3/16", "3/16", "0", "1/16", "3/16", "0", "1/16", "0", "5/16"}), {2, 2});
}

DfpeDistribution iid_fair(const DfpeOrder& order) {
  std::vector<Rational> w;
  int total = 0;
  for (int s : order.sizes()) total += s;
  for (const auto& k : order.grid().all()) w.push_back(Rational(class_count(order, k)) / Rational(Integer(1) << total));
  return validate_dfpe(w, order);
}

DfpeDistribution point_mass(const DfpeOrder& order, const MultiIndex& k) {
  std::vector<Rational> w(order.class_total(), Rational(0));
  w[order.grid().rank(k)] = 1;
  return validate_dfpe(w, order);
}

// Probability that the first l_g members of every group are all 1.
Rational brute_moment(const DfpeDistribution& d, const MultiIndex& l) {
  const auto seq = testsupport::dfpe_sequences(d);
  Layout layout(d.order().sizes());
  Rational sum = 0;
  for (std::uint32_t bits = 0; bits < seq.size(); ++bits) {
    bool all = true;
    for (std::size_t g = 0; g < l.size() && all; ++g) all = layout.ones(bits, static_cast<int>(g), l[g]) == l[g];
    if (all) sum += seq[bits];
  }
  return sum;
}

// Class weights of the law of the first m_g members of each group.
std::vector<Rational> brute_marginal(const DfpeDistribution& d, const DfpeOrder& m) {
  const auto seq = testsupport::dfpe_sequences(d);
  Layout layout(d.order().sizes());
  IndexGrid grid = m.grid();
  std::vector<Rational> out(grid.size(), Rational(0));
  for (std::uint32_t bits = 0; bits < seq.size(); ++bits) {
    std::vector<int> k;
    for (std::size_t g = 0; g < m.groups(); ++g) k.push_back(layout.ones(bits, static_cast<int>(g), m[g]));
    out[grid.rank(MultiIndex(k))] += seq[bits];
  }
  return out;
}

// E prod_g prod_{j < l_g} (X_{g,j} - mean_g) straight from the sequence law.
Rational brute_covariance(const DfpeDistribution& d, const MultiIndex& l, const std::vector<Rational>& means) {
  const auto seq = testsupport::dfpe_sequences(d);
  Layout layout(d.order().sizes());
  Rational sum = 0;
  for (std::uint32_t bits = 0; bits < seq.size(); ++bits) {
    Rational term = seq[bits];
    for (std::size_t g = 0; g < l.size(); ++g) {
      for (int j = 0; j < l[g]; ++j) term *= Rational(testsupport::bit(bits, layout.offset[g] + j)) - means[g];
    }
    sum += term;
  }
  return sum;
}

std::vector<DfpeOrder> small_orders() {
  return {{1}, {3}, {4}, {1, 1}, {2, 1}, {2, 2}, {3, 1}, {0, 2}, {3, 3}, {1, 1, 1}, {2, 1, 1}};
}

}  // namespace

TEST_CASE("validate_dfpe") {
  CHECK_NOTHROW(worked_example());
  std::vector<Rational> degenerate(9, Rational(0));
  degenerate[0] = 1;
  CHECK_NOTHROW(validate_dfpe(degenerate, {2, 2}));

  auto short_mass = worked_example().weights();
  short_mass.back() = Rational(1, 4);  // total 15/16
  try {
    validate_dfpe(short_mass, {2, 2});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotNormalized);
  }
  auto negative = worked_example().weights();
  negative[0] = Rational(-1, 16);
  negative[2] = Rational(1, 4);
  CHECK_THROWS_AS(validate_dfpe(negative, {2, 2}), Error);
  CHECK_THROWS_AS(validate_dfpe(std::vector<Rational>(8, Rational(1, 8)), {2, 2}), Error);
}

TEST_CASE("class_count and point probabilities") {
  CHECK(class_count({2, 2}, {1, 1}) == 4);
  CHECK(class_count({3, 1}, {2, 0}) == 3);
  CHECK(class_count({2, 2}, {0, 0}) == 1);
  CHECK_THROWS_AS(class_count({2, 2}, {3, 0}), Error);

  const auto probs = weights_to_point_probs(worked_example());
  CHECK(probs[IndexGrid({2, 2}).rank({1, 1})] == Rational(3, 64));

  const auto uniform = validate_dfpe(std::vector<Rational>(4, Rational(1, 4)), {1, 1});
  for (const auto& p : weights_to_point_probs(uniform)) CHECK(p == Rational(1, 4));
}

TEST_CASE("(2,2) example moment table") {
  const auto mv = moments_from_weights(worked_example());
  CHECK(mv.at({0, 0}) == 1);
  CHECK(mv.at({0, 1}) == Rational(1, 2));
  CHECK(mv.at({1, 1}) == Rational(23, 64));
  CHECK(mv.at({2, 0}) == Rational(3, 8));
  CHECK(mv.at({0, 2}) == Rational(5, 16));
  CHECK(mv.at({2, 2}) == Rational(5, 16));
  CHECK(check_moment_conditions(mv).empty());
  CHECK(weights_from_moments(mv) == worked_example());
}

TEST_CASE("moments match sequence-level probabilities") {
  std::mt19937_64 rng(11);
  for (const auto& order : small_orders()) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto d = testsupport::random_dfpe(order, rng, rep % 2);
      const auto mv = moments_from_weights(d);
      for (const auto& l : order.grid().all()) CHECK(mv.at(l) == brute_moment(d, l));
    }
  }
}

TEST_CASE("moment examples") {
  const auto ones = moments_from_weights(point_mass({2, 3}, {2, 3}));
  for (const auto& v : ones.values()) CHECK(v == 1);
  const auto iid = moments_from_weights(iid_fair({2, 2}));
  for (const auto& l : IndexGrid({2, 2}).all()) CHECK(iid.at(l) == Rational(1, 1 << l.total()));
  CHECK(weights_from_moments(iid) == iid_fair({2, 2}));
  CHECK(weights_from_moments(MomentVector({2, 2}, std::vector<Rational>(9, Rational(1)))) == point_mass({2, 2}, {2, 2}));
}

TEST_CASE("marginalize agrees with summing sequence probabilities") {
  std::mt19937_64 rng(12);
  for (const auto& order : small_orders()) {
    const auto d = testsupport::random_dfpe(order, rng);
    for (const auto& m : order.grid().all()) {
      if (m.is_zero()) continue;
      DfpeOrder mo(m.components);
      CHECK(marginalize(d, mo).weights() == brute_marginal(d, mo));
      // Marginal coherence with the moment parameterization.
      const auto small = moments_from_weights(marginalize(d, mo));
      const auto big = moments_from_weights(d);
      for (const auto& l : mo.grid().all()) CHECK(small.at(l) == big.at(l));
    }
  }
  const auto p = worked_example();
  CHECK(marginalize(p, {2, 2}) == p);
  CHECK(marginalize(p, {2, 0}).weights() == brute_marginal(p, {2, 0}));
  CHECK(marginalize(iid_fair({2, 2}), {1, 1}).weights() == std::vector<Rational>(4, Rational(1, 4)));
  CHECK_THROWS_AS(marginalize(p, {3, 0}), Error);
}

TEST_CASE("weights and moments round trip on random laws") {
  std::mt19937_64 rng(13);
  const std::vector<DfpeOrder> orders{{4, 4}, {3, 2}, {1, 4}, {2, 2, 2}, {3, 1, 2}, {4}};
  for (int i = 0; i < 100; ++i) {
    const auto& order = orders[i % orders.size()];
    const auto d = testsupport::random_dfpe(order, rng, i % 3 == 0);
    CHECK(weights_from_moments(moments_from_weights(d)) == d);
  }
}

TEST_CASE("sign conditions decide validity of moment vectors") {
  // Single group of size 2 with w1 = 1, w2 = 0: the second difference at 0 is -1.
  const MomentVector bad({2}, rats({"1", "1", "0"}));
  const auto violations = check_moment_conditions(bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == MultiIndex{0});
  CHECK_THROWS_AS(weights_from_moments(bad), Error);
  CHECK(check_moment_conditions(MomentVector({2, 2}, std::vector<Rational>(9, Rational(1)))).empty());

  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> shift(-3, 3);
  int valid = 0, invalid = 0;
  for (int i = 0; i < 200; ++i) {
    const DfpeOrder order = i % 2 ? DfpeOrder{2, 2} : DfpeOrder{3, 1};
    auto values = moments_from_weights(testsupport::random_dfpe(order, rng, true)).values();
    values[1 + rng() % (values.size() - 1)] += make_rational(shift(rng), 20);
    const MomentVector mv(order, values);
    const bool ok = check_moment_conditions(mv).empty();
    bool inverted = true;
    try {
      const auto d = weights_from_moments(mv);
      for (const auto& w : d.weights()) CHECK(w >= 0);
      CHECK(moments_from_weights(d) == mv);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SignConditionViolated);
      inverted = false;
    }
    CHECK(ok == inverted);
    (ok ? valid : invalid)++;
  }
  CHECK(valid > 0);
  CHECK(invalid > 0);
}

TEST_CASE("(2,2) example covariances and infinite-extendibility check") {
  const auto cv = covariances_from_moments(moments_from_weights(worked_example()));
  CHECK(cv.at({2, 0}) == Rational(1, 8));
  CHECK(cv.at({0, 2}) == Rational(1, 16));
  CHECK(cv.at({2, 2}) == Rational(1, 32));
  CHECK(cv.at({2, 0}) * cv.at({0, 2}) - cv.at({1, 1}) * cv.at({1, 1}) == Rational(-17, 4096));
  const auto rep = check_infinite_necessary(cv);
  CHECK(rep.even_cov_violations.empty());
  CHECK_FALSE(rep.psd);
  CHECK(rep.det == Rational(-17, 4096));
  CHECK_FALSE(rep.passes());
  CHECK(moments_from_covariances(cv) == moments_from_weights(worked_example()));
}

TEST_CASE("covariances match their sequence-level definition") {
  std::mt19937_64 rng(15);
  for (const auto& order : small_orders()) {
    const auto d = testsupport::random_dfpe(order, rng);
    const auto mv = moments_from_weights(d);
    const auto cv = covariances_from_moments(mv);
    for (const auto& l : order.grid().all()) CHECK(cv.at(l) == brute_covariance(d, l, cv.means()));
    CHECK(moments_from_covariances(cv) == mv);
  }
}

TEST_CASE("covariance examples") {
  const auto iid = covariances_from_moments(moments_from_weights(iid_fair({2, 2})));
  for (const auto& l : IndexGrid({2, 2}).all()) CHECK(iid.at(l) == (l.is_zero() ? 1 : 0));
  CHECK(check_infinite_necessary(iid).passes());

  std::vector<Rational> zero(9, Rational(0));
  zero[0] = 1;
  const CovarianceVector half({2, 2}, {Rational(1, 2), Rational(1, 2)}, zero);
  CHECK(moments_from_covariances(half) == moments_from_weights(iid_fair({2, 2})));
  const auto nothing = moments_from_covariances(CovarianceVector({2, 2}, {Rational(0), Rational(0)}, zero));
  for (const auto& l : IndexGrid({2, 2}).all()) CHECK(nothing.at(l) == (l.is_zero() ? 1 : 0));

  auto negative = zero;
  negative[IndexGrid({2, 2}).rank({2, 0})] = Rational(-1, 100);
  const auto rep = check_infinite_necessary(CovarianceVector({2, 2}, {Rational(1, 2), Rational(1, 2)}, negative));
  REQUIRE(rep.even_cov_violations.size() == 1);
  CHECK(rep.even_cov_violations[0] == MultiIndex{2, 0});

  auto unit = zero;
  unit[1] = Rational(1, 3);
  CHECK_THROWS_AS(CovarianceVector({2, 2}, {Rational(1, 2), Rational(1, 2)}, unit), Error);
}

TEST_CASE("exact nonnegative definiteness") {
  using M = std::vector<std::vector<Rational>>;
  CHECK(is_nonnegative_definite(M{{1, 0}, {0, 0}}));
  CHECK(is_nonnegative_definite(M{{0, 0}, {0, 2}}));
  CHECK_FALSE(is_nonnegative_definite(M{{0, 1}, {1, 0}}));
  CHECK_FALSE(is_nonnegative_definite(M{{0, 1}, {1, 5}}));
  CHECK(is_nonnegative_definite(M{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}));
  CHECK_FALSE(is_nonnegative_definite(M{{1, 2, 0}, {2, 1, 0}, {0, 0, 1}}));
  CHECK(is_nonnegative_definite(M{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
  CHECK(determinant(M{{2, 1}, {1, 2}}) == 3);
  CHECK(determinant(M{{0, 1, 0}, {1, 0, 0}, {0, 0, 4}}) == -4);
}

TEST_CASE("lambda vertices") {
  const auto v = lambda_vertex({1, 0}, {2, 2}, {1, 1});
  CHECK(v.at({1, 0}) == Rational(1, 2));
  CHECK(v.at({0, 1}) == 0);
  CHECK(v.at({1, 1}) == 0);
  for (const auto& l : IndexGrid({2, 2}).all()) {
    CHECK(lambda_vertex({0, 0}, {4, 3}, {2, 2}).at(l) == (l.is_zero() ? 1 : 0));
    CHECK(lambda_vertex({4, 3}, {4, 3}, {2, 2}).at(l) == 1);
  }
  CHECK(extendibility_vertices({2, 2}, {4, 2}).size() == 15);
  const auto line = extendibility_vertices({1}, {2});
  REQUIRE(line.size() == 3);
  CHECK(line[0].at({1}) == 0);
  CHECK(line[1].at({1}) == Rational(1, 2));
  CHECK(line[2].at({1}) == 1);
  CHECK_THROWS_AS(lambda_vertex({3, 0}, {2, 2}, {1, 1}), Error);
}

TEST_CASE("lambda vertices are moments of the projected extremal laws") {
  for (const DfpeOrder& r : {DfpeOrder{3, 2}, DfpeOrder{4, 4}, DfpeOrder{2, 1, 2}}) {
    for (const auto& k : r.grid().all()) {
      const auto d = point_mass(r, k);
      std::vector<int> n_sizes;
      for (int s : r.sizes()) n_sizes.push_back(s > 1 ? s - 1 : s);
      const DfpeOrder n(n_sizes);
      const auto v = lambda_vertex(k, r, n);
      for (const auto& l : n.grid().all()) CHECK(v.at(l) == brute_moment(d, l));
    }
  }
}

TEST_CASE("lambda vertex recursion in each direction") {
  for (const DfpeOrder& n : {DfpeOrder{1, 1}, DfpeOrder{2, 1}, DfpeOrder{2, 2}}) {
    for (const auto& rk : IndexGrid({5, 5}).all()) {
      if (rk[0] < n[0] || rk[1] < n[1]) continue;
      const DfpeOrder r(rk.components);
      for (const auto& k : r.grid().all()) {
        const auto v = lambda_vertex(k, r, n);
        for (std::size_t i = 0; i < 2; ++i) {
          if (r[i] == n[i]) continue;
          auto down = r.sizes();
          --down[i];
          const DfpeOrder rd(down);
          std::vector<Rational> mix(v.values().size(), Rational(0));
          const Rational stay = make_rational(r[i] - k[i], r[i]);
          const Rational drop = make_rational(k[i], r[i]);
          if (sgn(stay) != 0) {
            const auto a = lambda_vertex(k, rd, n).values();
            for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += stay * a[j];
          }
          if (sgn(drop) != 0) {
            MultiIndex km = k;
            --km[i];
            const auto b = lambda_vertex(km, rd, n).values();
            for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += drop * b[j];
          }
          CHECK(mix == v.values());
        }
      }
    }
  }
}

TEST_CASE("(2,2) example extendibility") {
  const auto d = worked_example();
  const auto inside = dfpe_extendible(d, {4, 2});
  CHECK(inside.inside());
  const auto pt = moments_from_weights(d).to_point();
  auto verts = [](DfpeOrder n, DfpeOrder r) {
    std::vector<PointV> out;
    for (const auto& v : extendibility_vertices(n, r)) out.push_back(v.to_point());
    return out;
  };
  CHECK(verify_certificate(inside, pt, verts({2, 2}, {4, 2})));
  for (const DfpeOrder& r : {DfpeOrder{5, 2}, DfpeOrder{2, 3}}) {
    const auto cert = dfpe_extendible(d, r);
    CHECK_FALSE(cert.inside());
    CHECK(verify_certificate(cert, pt, verts({2, 2}, r)));
  }
  CHECK(dfpe_extendible(iid_fair({2, 2}), {7, 6}).inside());
  CHECK_THROWS_AS(dfpe_extendible(d, {1, 2}), Error);
}

TEST_CASE("nesting of projected polytopes") {
  for (const DfpeOrder& n : {DfpeOrder{1, 1}, DfpeOrder{2, 1}}) {
    for (const DfpeOrder& r : {DfpeOrder{2, 2}, DfpeOrder{3, 2}, DfpeOrder{2, 3}}) {
      std::vector<PointV> hull;
      for (const auto& v : extendibility_vertices(n, r)) hull.push_back(v.to_point());
      for (std::size_t i = 0; i < 2; ++i) {
        auto up = r.sizes();
        ++up[i];
        for (const auto& v : extendibility_vertices(n, DfpeOrder(up))) CHECK(lp_membership(v.to_point(), hull).inside());
      }
    }
  }
}

TEST_CASE("extendibility frontier") {
  const auto f = extendibility_frontier(worked_example(), {8, 8});
  REQUIRE(f.exact.size() == 1);
  CHECK(f.exact[0] == DfpeOrder{4, 2});
  CHECK_FALSE(f.bound_too_small());

  CHECK(extendibility_frontier(iid_fair({2, 2}), {5, 5}).bound_too_small());
  CHECK(extendibility_frontier(point_mass({1, 1}, {1, 1}), {4, 4}).bound_too_small());
}

TEST_CASE("single group reduces to exchangeable extendibility") {
  std::mt19937_64 rng(16);
  for (int n = 1; n <= 4; ++n) {
    for (int r = n; r <= 7; ++r) {
      for (int rep = 0; rep < 6; ++rep) {
        const auto d = testsupport::random_dfpe({n}, rng, rep % 2);
        CHECK(dfpe_extendible(d, {r}).inside() == oracle::oracle_dfpe_extendible(d, {r}));
      }
    }
  }
}

TEST_CASE("volume ratio of the moment polytope") {
  VolumeOptions options;
  options.samples = 400;
  const auto same = dfpe_volume_ratio({1, 1}, {1, 1}, options);
  CHECK(same.ratio == 1.0);
  // Any (1,1) law extends by duplicating each variable.
  CHECK(dfpe_volume_ratio({1, 1}, {2, 2}, options).ratio == 1.0);
  const auto smaller = dfpe_volume_ratio({2, 1}, {3, 1}, options);
  CHECK(smaller.ratio < 1.0);
  CHECK(smaller.audit_disagreements == 0);
}
