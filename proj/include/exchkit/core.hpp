#pragma once

// Exact arithmetic, combinatorial primitives and the canonical multi-index
// layout shared by every other module.

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exchkit {

using Integer = mpz_class;
using Rational = mpq_class;

enum class ErrorKind {
  InvalidArgument,
  LengthMismatch,
  NegativeWeight,
  NotNormalized,
  IndexOutOfRange,
  SignConditionViolated,
  FlowImbalance,
  NotIrreducible,
  NegativeCount,
  InvalidMatrix,
  DimensionMismatch,
  TooLarge,
  IndependenceViolated,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported as an Error whose
/// kind names the violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Binomial coefficient; 0 when k < 0, k > n or n < 0.
Integer binom(long n, long k);

/// Falling factorial (i)_k = i(i-1)...(i-k+1), with (i)_0 = 1 and 0 when k > i.
Integer falling(long i, long k);

Integer factorial(long n);

/// num/den in lowest terms.
Rational make_rational(const Integer& num, const Integer& den);

/// Accepts "p/q", integers and decimal literals ("0.125", "-3e-2"); the
/// conversion is exact.
Rational parse_rational(std::string_view text);

/// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string format_rational(const Rational& value);

/// A tuple (k1,...,kg) of nonnegative integers, ordered lexicographically.
struct MultiIndex {
  std::vector<int> components;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> c) : components(std::move(c)) {}
  MultiIndex(std::initializer_list<int> c) : components(c) {}

  std::size_t size() const { return components.size(); }
  int operator[](std::size_t i) const { return components[i]; }
  int& operator[](std::size_t i) { return components[i]; }
  int total() const;
  bool is_zero() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) {
    return a.components <=> b.components;
  }
};

std::string format_index(const MultiIndex& index);

/// Dense lexicographic layout of the box 0 <= ki <= limits[i]. Every
/// coordinate vector keyed by multi-indices uses this layout.
class IndexGrid {
 public:
  explicit IndexGrid(std::vector<int> limits);

  const std::vector<int>& limits() const { return limits_; }
  std::size_t dimension() const { return limits_.size(); }
  std::size_t size() const { return size_; }

  bool contains(const MultiIndex& index) const;
  std::size_t rank(const MultiIndex& index) const;
  MultiIndex unrank(std::size_t position) const;
  std::vector<MultiIndex> all() const;

 private:
  std::vector<int> limits_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

std::vector<MultiIndex> multi_index_range(const std::vector<int>& limits);

}  // namespace exchkit
