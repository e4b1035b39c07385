#pragma once

// Generators and brute-force references shared by the test binaries. The
// references work on explicit bitstrings and never call the library
// transforms they are used to check.

#include "exchkit/dfpe.hpp"
#include "exchkit/markov.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace testsupport {

using exchkit::Rational;

inline int bit(std::uint32_t bits, int i) { return static_cast<int>((bits >> i) & 1u); }

/// Random point of the probability simplex with small denominators; about
/// a third of the entries are zero when `sparse` is set.
inline std::vector<Rational> random_simplex(std::size_t size, std::mt19937_64& rng, bool sparse = false) {
  std::uniform_int_distribution<int> draw(0, 9);
  std::vector<int> raw(size);
  int total = 0;
  for (auto& v : raw) {
    v = draw(rng);
    if (sparse && draw(rng) < 3) v = 0;
    total += v;
  }
  if (total == 0) {
    raw[rng() % size] = 1;
    total = 1;
  }
  std::vector<Rational> out;
  for (int v : raw) {
    out.emplace_back(v, total);
    out.back().canonicalize();
  }
  return out;
}

/// Group layout of an order: group g owns bits [offset[g], offset[g]+n_g).
struct Layout {
  std::vector<int> offset;
  int total = 0;
  explicit Layout(const std::vector<int>& sizes) {
    for (int s : sizes) {
      offset.push_back(total);
      total += s;
    }
  }
  int ones(std::uint32_t bits, int group, int first) const {
    int c = 0;
    for (int i = 0; i < first; ++i) c += bit(bits, offset[group] + i);
    return c;
  }
};

/// Per-sequence probabilities of a DFPE law: the class weight spread evenly
/// over the sequences of the class, with class sizes found by counting.
inline std::vector<Rational> dfpe_sequences(const exchkit::DfpeDistribution& d) {
  const auto& sizes = d.order().sizes();
  Layout layout(sizes);
  std::map<std::vector<int>, long> size;
  auto key = [&](std::uint32_t bits) {
    std::vector<int> k;
    for (std::size_t g = 0; g < sizes.size(); ++g) k.push_back(layout.ones(bits, static_cast<int>(g), sizes[g]));
    return k;
  };
  for (std::uint32_t bits = 0; bits < (1u << layout.total); ++bits) ++size[key(bits)];
  std::vector<Rational> out(std::size_t{1} << layout.total);
  for (std::uint32_t bits = 0; bits < (1u << layout.total); ++bits) {
    const auto k = key(bits);
    out[bits] = d.weight(exchkit::MultiIndex(k)) / Rational(size[k]);
  }
  return out;
}

/// Transition counts of the first `length` states of `bits`.
inline exchkit::TransitionCounts transitions(std::uint32_t bits, int length) {
  exchkit::TransitionCounts c{0, 0, 0, 0};
  for (int i = 0; i + 1 < length; ++i) ++c[2 * bit(bits, i) + bit(bits, i + 1)];
  return c;
}

/// Number of start-0 sequences of the given length with each count matrix.
inline std::map<exchkit::TransitionCounts, long> class_sizes(int length) {
  std::map<exchkit::TransitionCounts, long> out;
  for (std::uint32_t bits = 0; bits < (1u << length); ++bits) {
    if (bit(bits, 0) == 0) ++out[transitions(bits, length)];
  }
  return out;
}

/// Per-sequence probabilities of a Markov exchangeable law (start 0).
inline std::vector<Rational> me_sequences(const exchkit::MeDistribution& d) {
  const int n = d.length();
  const auto sizes = class_sizes(n);
  std::map<exchkit::TransitionCounts, Rational> p;
  for (std::size_t i = 0; i < d.classes().size(); ++i) {
    p[d.classes()[i].counts] = d.weights()[i] / Rational(sizes.at(d.classes()[i].counts));
  }
  std::vector<Rational> out(std::size_t{1} << n, Rational(0));
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    if (bit(bits, 0) == 0) out[bits] = p.at(transitions(bits, n));
  }
  return out;
}

inline exchkit::MeDistribution random_me(int n, std::mt19937_64& rng, bool sparse = false) {
  return exchkit::validate_me(n, random_simplex(exchkit::enumerate_phi(n).size(), rng, sparse));
}

inline exchkit::DfpeDistribution random_dfpe(const exchkit::DfpeOrder& order, std::mt19937_64& rng, bool sparse = false) {
  return exchkit::validate_dfpe(random_simplex(order.class_total(), rng, sparse), order);
}

}  // namespace testsupport
