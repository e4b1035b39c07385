#include <doctest.h>

#include "exchkit/oracle.hpp"
#include "support.hpp"

#include <random>

using namespace exchkit;

namespace {

DfpeDistribution worked_example() {
  std::vector<Rational> w;
  for (const char* t : {"3/16", "3/16", "0", "1/16", "3/16", "0", "1/16", "0", "5/16"}) w.push_back(parse_rational(t));
  return validate_dfpe(w, {2, 2});
}

// Exchanges the roles of 0 and 1: class k of each group becomes n - k.
DfpeDistribution flipped(const DfpeDistribution& d) {
  const IndexGrid grid = d.order().grid();
  std::vector<Rational> w(grid.size());
  for (const auto& k : grid.all()) {
    MultiIndex m = k;
    for (std::size_t g = 0; g < k.size(); ++g) m[g] = d.order()[g] - k[g];
    w[grid.rank(m)] = d.weight(k);
  }
  return validate_dfpe(w, d.order());
}

}  // namespace

TEST_CASE("sequence counting by enumeration") {
  CHECK(oracle::oracle_whittle({{6, 0, 0, 0}, 0}) == 1);
  CHECK(oracle::oracle_whittle({{1, 1, 0, 1}, 0}) == 1);
  CHECK(oracle::oracle_whittle({{1, 2, 1, 1}, 0}) == testsupport::class_sizes(6).at({1, 2, 1, 1}));
  for (const auto& m : enumerate_phi(8).all()) CHECK(oracle::oracle_whittle(m) == whittle_count(m));
  CHECK_THROWS_AS(oracle::oracle_whittle({{22, 0, 0, 0}, 0}), Error);
}

TEST_CASE("sequence tables") {
  std::mt19937_64 rng(41);
  const auto d = testsupport::random_dfpe({2, 3}, rng);
  const auto t = oracle::sequence_table(d);
  CHECK(t.length == 5);
  Rational total = 0;
  for (const auto& p : t.probability) total += p;
  CHECK(total == 1);
  CHECK(t.probability == testsupport::dfpe_sequences(d));

  const auto m = testsupport::random_me(6, rng);
  const auto tm = oracle::sequence_table(m);
  CHECK(tm.probability == testsupport::me_sequences(m));
}

TEST_CASE("phase-one feasibility") {
  using M = std::vector<std::vector<Rational>>;
  CHECK(oracle::feasible(M{{1, 1}}, {1}));
  CHECK_FALSE(oracle::feasible(M{{1, 1}}, {-1}));
  CHECK(oracle::feasible(M{{1, -1}}, {-1}));
  CHECK_FALSE(oracle::feasible(M{{1, 0}, {1, 0}}, {1, 2}));
  CHECK(oracle::feasible(M{{1, 0}, {1, 0}}, {2, 2}));
  CHECK(oracle::feasible(M{{1, 2, 3}, {0, 1, 1}}, {3, 1}));
  CHECK_FALSE(oracle::feasible(M{{1, 2}, {3, 4}}, {1, -1}));
}

TEST_CASE("DFPE oracle") {
  const auto d = worked_example();
  CHECK(oracle::oracle_dfpe_extendible(d, {4, 2}));
  CHECK_FALSE(oracle::oracle_dfpe_extendible(d, {5, 2}));
  CHECK_FALSE(oracle::oracle_dfpe_extendible(d, {2, 3}));

  std::vector<Rational> iid;
  for (const auto& k : IndexGrid({2, 1}).all()) iid.push_back(Rational(class_count({2, 1}, k)) / 8);
  CHECK(oracle::oracle_dfpe_extendible(validate_dfpe(iid, {2, 1}), {5, 5}));
  CHECK_THROWS_AS(oracle::oracle_dfpe_extendible(d, {1, 2}), Error);
  CHECK_THROWS_AS(oracle::oracle_dfpe_extendible(d, {12, 12}), Error);
}

TEST_CASE("DFPE oracle is symmetric under relabeling 0 and 1") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const DfpeOrder n = rep % 2 ? DfpeOrder{2, 2} : DfpeOrder{2, 1};
    const DfpeOrder r = rep % 3 ? DfpeOrder{3, 3} : DfpeOrder{4, 2};
    const auto d = testsupport::random_dfpe(n, rng, true);
    CHECK(oracle::oracle_dfpe_extendible(d, r) == oracle::oracle_dfpe_extendible(flipped(d), r));
  }
}

TEST_CASE("Markov oracle") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = testsupport::random_me(3, rng, rep % 2);
    for (int r = 3; r <= 7; ++r) CHECK(oracle::oracle_me_extendible(d, r));
  }
  // An i.i.d. start-0 law is a chain law, which extends to any length.
  std::vector<Rational> fair;
  for (const auto& m : enumerate_phi(5).all()) fair.push_back(Rational(whittle_count(m)) / 16);
  CHECK(oracle::oracle_me_extendible(validate_me(5, fair), 9));
  for (const auto& m : enumerate_phi(4).second_kind) {
    const auto d = me_point_mass(m);
    CHECK(oracle::oracle_me_extendible(d, 6) == me_extendible(d, 6).inside());
  }
  CHECK_THROWS_AS(oracle::oracle_me_extendible(validate_me(5, fair), 15), Error);
  CHECK_THROWS_AS(oracle::oracle_me_extendible(validate_me(5, fair), 4), Error);
}
