#include "exchkit/oracle.hpp"

#include <map>

namespace exchkit::oracle {

namespace {

constexpr int kMaxSequenceBits = 22;

int bit(std::uint32_t bits, int i) { return static_cast<int>((bits >> i) & 1u); }

// Group sums of the first `prefix[g]` members of each group, where group g
// occupies bits [offset[g], offset[g] + sizes[g]).
std::vector<int> group_sums(std::uint32_t bits, const std::vector<int>& offset, const std::vector<int>& prefix) {
  std::vector<int> sums(prefix.size(), 0);
  for (std::size_t g = 0; g < prefix.size(); ++g) {
    for (int i = 0; i < prefix[g]; ++i) sums[g] += bit(bits, offset[g] + i);
  }
  return sums;
}

}  // namespace

SequenceTable sequence_table(const DfpeDistribution& d) {
  const auto& sizes = d.order().sizes();
  int total = 0;
  std::vector<int> offset;
  for (int s : sizes) {
    offset.push_back(total);
    total += s;
  }
  if (total > kMaxSequenceBits) throw Error(ErrorKind::TooLarge, "sequence length " + std::to_string(total));
  const auto probs = weights_to_point_probs(d);
  const IndexGrid grid = d.order().grid();
  SequenceTable table{total, std::vector<Rational>(std::size_t{1} << total)};
  for (std::uint32_t bits = 0; bits < (1u << total); ++bits) {
    table.probability[bits] = probs[grid.rank(MultiIndex(group_sums(bits, offset, sizes)))];
  }
  return table;
}

TransitionCounts count_transitions(std::uint32_t bits, int length) {
  TransitionCounts c{0, 0, 0, 0};
  for (int i = 0; i + 1 < length; ++i) ++c[2 * bit(bits, i) + bit(bits, i + 1)];
  return c;
}

SequenceTable sequence_table(const MeDistribution& d) {
  const int n = d.length();
  if (n > kMaxSequenceBits) throw Error(ErrorKind::TooLarge, "sequence length " + std::to_string(n));
  std::map<TransitionCounts, Rational> class_prob;
  std::map<TransitionCounts, long> class_size;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    if (bit(bits, 0) == 0) ++class_size[count_transitions(bits, n)];
  }
  for (std::size_t i = 0; i < d.classes().size(); ++i) {
    const auto& counts = d.classes()[i].counts;
    class_prob[counts] = d.weights()[i] / Rational(class_size.at(counts));
  }
  SequenceTable table{n, std::vector<Rational>(std::size_t{1} << n, Rational(0))};
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    if (bit(bits, 0) == 0) table.probability[bits] = class_prob.at(count_transitions(bits, n));
  }
  return table;
}

Integer oracle_whittle(const TransitionCountMatrix& m) {
  const int n = m.length();
  if (n > kMaxSequenceBits) throw Error(ErrorKind::TooLarge, "sequence length " + std::to_string(n));
  long hits = 0;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    if (bit(bits, 0) == m.start && count_transitions(bits, n) == m.counts) ++hits;
  }
  return hits;
}

bool feasible(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b) {
  const std::size_t rows = a.size();
  if (rows == 0) return true;
  const std::size_t vars = a.front().size();

  // Column-major tableau [artificials | structurals | rhs]; rows kept with
  // nonnegative right-hand side.
  const std::size_t cols = rows + vars;
  std::vector<std::vector<Rational>> col(cols + 1, std::vector<Rational>(rows, Rational(0)));
  for (std::size_t i = 0; i < rows; ++i) {
    const int s = b[i] < 0 ? -1 : 1;
    col[i][i] = 1;
    for (std::size_t j = 0; j < vars; ++j) col[rows + j][i] = s * a[i][j];
    col[cols][i] = s * b[i];
  }
  std::vector<std::size_t> basic(rows);
  for (std::size_t i = 0; i < rows; ++i) basic[i] = i;

  // Phase-one objective row: reduced costs relative to the artificial basis.
  auto reduced_cost = [&](std::size_t j) {
    Rational rc = j < rows ? Rational(1) : Rational(0);
    for (std::size_t i = 0; i < rows; ++i) {
      if (basic[i] < rows) rc -= col[j][i];
    }
    return rc;
  };

  for (;;) {
    std::size_t enter = cols;
    Rational most_negative = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      Rational rc = reduced_cost(j);
      if (rc < most_negative) {
        most_negative = rc;
        enter = j;
      }
    }
    if (enter == cols) break;

    // Lexicographic ratio test over rows of [rhs | B^{-1}], where B^{-1} is
    // read off the artificial columns; this prevents cycling.
    std::size_t leave = rows;
    for (std::size_t i = 0; i < rows; ++i) {
      if (sgn(col[enter][i]) <= 0) continue;
      if (leave == rows) {
        leave = i;
        continue;
      }
      int cmp = 0;
      for (std::size_t k = 0; k <= rows && cmp == 0; ++k) {
        const auto& source = k == 0 ? col[cols] : col[k - 1];
        Rational lhs = source[i] / col[enter][i];
        Rational rhs = source[leave] / col[enter][leave];
        cmp = lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
      }
      if (cmp < 0) leave = i;
    }
    if (leave == rows) return false;  // cannot happen for a bounded phase one

    Rational pivot = col[enter][leave];
    for (std::size_t j = 0; j <= cols; ++j) {
      if (sgn(col[j][leave]) != 0) col[j][leave] /= pivot;
    }
    for (std::size_t j = 0; j <= cols; ++j) {
      const Rational& p = col[j][leave];
      if (sgn(p) == 0) continue;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == leave || sgn(col[enter][i]) == 0) continue;
        if (j == enter) continue;
        col[j][i] -= col[enter][i] * p;
      }
    }
    for (std::size_t i = 0; i < rows; ++i) col[enter][i] = i == leave ? 1 : 0;
    basic[leave] = enter;
  }

  for (std::size_t i = 0; i < rows; ++i) {
    if (basic[i] < rows && sgn(col[cols][i]) != 0) return false;
  }
  return true;
}

bool oracle_dfpe_extendible(const DfpeDistribution& d, const DfpeOrder& r) {
  const DfpeOrder& n = d.order();
  if (!n.within(r)) throw Error(ErrorKind::IndexOutOfRange, "target order below current order");
  if (r.class_total() > 10000) throw Error(ErrorKind::TooLarge, "too many classes at " + r.str());
  int total = 0;
  std::vector<int> offset;
  for (int s : r.sizes()) {
    offset.push_back(total);
    total += s;
  }
  if (total > kMaxSequenceBits) throw Error(ErrorKind::TooLarge, "sequence length " + std::to_string(total));

  // Class sizes and prefix-class incidences, both by scanning bitstrings.
  const IndexGrid long_grid = r.grid();
  const IndexGrid short_grid = n.grid();
  std::vector<long> size(long_grid.size(), 0);
  std::vector<std::vector<long>> incidence(short_grid.size(), std::vector<long>(long_grid.size(), 0));
  for (std::uint32_t bits = 0; bits < (1u << total); ++bits) {
    const auto full = long_grid.rank(MultiIndex(group_sums(bits, offset, r.sizes())));
    const auto prefix = short_grid.rank(MultiIndex(group_sums(bits, offset, n.sizes())));
    ++size[full];
    ++incidence[prefix][full];
  }
  std::vector<std::vector<Rational>> a(short_grid.size(), std::vector<Rational>(long_grid.size()));
  for (std::size_t i = 0; i < short_grid.size(); ++i) {
    for (std::size_t j = 0; j < long_grid.size(); ++j) a[i][j] = Rational(incidence[i][j], size[j]), a[i][j].canonicalize();
  }
  return feasible(a, d.weights());
}

bool oracle_me_extendible(const MeDistribution& d, int r) {
  const int n = d.length();
  if (r < n) throw Error(ErrorKind::IndexOutOfRange, "target length below current length");
  if (r > 14) throw Error(ErrorKind::TooLarge, "target length " + std::to_string(r));

  std::map<TransitionCounts, std::size_t> long_index;
  std::vector<long> size;
  std::map<std::pair<std::size_t, std::size_t>, long> incidence;  // (prefix class, class) -> count
  std::map<TransitionCounts, std::size_t> short_index;
  for (std::size_t i = 0; i < d.classes().size(); ++i) short_index[d.classes()[i].counts] = i;

  for (std::uint32_t bits = 0; bits < (1u << r); ++bits) {
    if (bit(bits, 0) != 0) continue;
    const auto full = count_transitions(bits, r);
    auto [it, inserted] = long_index.try_emplace(full, long_index.size());
    if (inserted) size.push_back(0);
    ++size[it->second];
    ++incidence[{short_index.at(count_transitions(bits, n)), it->second}];
  }
  std::vector<std::vector<Rational>> a(d.classes().size(), std::vector<Rational>(long_index.size(), Rational(0)));
  for (const auto& [key, count] : incidence) {
    a[key.first][key.second] = Rational(count, size[key.second]);
    a[key.first][key.second].canonicalize();
  }
  return feasible(a, d.weights());
}

}  // namespace exchkit::oracle
