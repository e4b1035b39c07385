#pragma once

// Brute-force verifiers over raw sequence space. Nothing here uses the
// vertex formulas or the membership solver of the main pipeline: classes are
// found by scanning bitstrings and feasibility is decided by a separate
// simplex implementation.

#include "exchkit/core.hpp"
#include "exchkit/dfpe.hpp"
#include "exchkit/markov.hpp"

#include <cstdint>
#include <vector>

namespace exchkit::oracle {

/// Probability of every bitstring of a given length; bit i of the key is
/// the (i+1)-th variable.
struct SequenceTable {
  int length = 0;
  std::vector<Rational> probability;  // indexed by bitstring, size 2^length
};

/// Per-sequence law of a DFPE distribution; groups occupy consecutive bit
/// ranges in group order.
SequenceTable sequence_table(const DfpeDistribution& d);

/// Per-sequence law of a Markov exchangeable distribution (start 0).
SequenceTable sequence_table(const MeDistribution& d);

/// Transition counts of the first `length` variables of `bits`.
TransitionCounts count_transitions(std::uint32_t bits, int length);

/// Number of bitstrings from m.start with transition counts m, by enumeration.
Integer oracle_whittle(const TransitionCountMatrix& m);

/// Exact feasibility of { x >= 0 : A x = b } by phase-one simplex with
/// Dantzig entering and a lexicographic leaving rule.
bool feasible(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b);

bool oracle_dfpe_extendible(const DfpeDistribution& d, const DfpeOrder& r);
bool oracle_me_extendible(const MeDistribution& d, int r);

}  // namespace exchkit::oracle
