#include "exchkit/core.hpp"

#include <cctype>
#include <sstream>

namespace exchkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SignConditionViolated: return "SignConditionViolated";
    case ErrorKind::FlowImbalance: return "FlowImbalance";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::IndependenceViolated: return "IndependenceViolated";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

Integer binom(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

Integer falling(long i, long k) {
  if (k < 0) return 0;
  if (k == 0) return 1;
  if (i < 0 || k > i) return 0;
  Integer out = 1;
  for (long j = 0; j < k; ++j) out *= i - j;
  return out;
}

Integer factorial(long n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "factorial of negative number");
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  Rational out(num, den);
  out.canonicalize();
  return out;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer parse_signed_integer(std::string_view s, std::string_view original) {
  std::string_view digits = s;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  if (!all_digits(digits)) {
    throw Error(ErrorKind::ParseError, "not a rational literal: '" + std::string(original) + "'");
  }
  Integer value(std::string(digits), 10);
  return negative ? Integer(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  const std::string_view original = text;
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty rational literal");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_signed_integer(text.substr(0, slash), original);
    Integer den = parse_signed_integer(text.substr(slash + 1), original);
    if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + std::string(original) + "'");
    Rational out(num, den);
    out.canonicalize();
    return out;
  }

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    Integer exp_value = parse_signed_integer(text.substr(e + 1), original);
    if (!exp_value.fits_slong_p()) throw Error(ErrorKind::ParseError, "exponent out of range");
    exponent = exp_value.get_si();
    text = text.substr(0, e);
  }

  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
        (!frac.empty() && !all_digits(frac))) {
      throw Error(ErrorKind::ParseError, "not a rational literal: '" + std::string(original) + "'");
    }
    digits = std::string(whole) + std::string(frac);
    exponent -= static_cast<long>(frac.size());
  } else {
    if (!all_digits(text)) {
      throw Error(ErrorKind::ParseError, "not a rational literal: '" + std::string(original) + "'");
    }
    digits = std::string(text);
  }

  Rational out{Integer(digits, 10)};
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    out /= scale;
  } else {
    out *= scale;
  }
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

std::string format_rational(const Rational& value) { return value.get_str(10); }

int MultiIndex::total() const {
  int sum = 0;
  for (int c : components) sum += c;
  return sum;
}

bool MultiIndex::is_zero() const {
  for (int c : components) {
    if (c != 0) return false;
  }
  return true;
}

std::string format_index(const MultiIndex& index) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) out << ',';
    out << index[i];
  }
  out << ')';
  return out.str();
}

IndexGrid::IndexGrid(std::vector<int> limits) : limits_(std::move(limits)), strides_(limits_.size()), size_(1) {
  for (int l : limits_) {
    if (l < 0) throw Error(ErrorKind::InvalidArgument, "negative index limit");
  }
  for (std::size_t i = limits_.size(); i-- > 0;) {
    strides_[i] = size_;
    size_ *= static_cast<std::size_t>(limits_[i]) + 1;
  }
}

bool IndexGrid::contains(const MultiIndex& index) const {
  if (index.size() != limits_.size()) return false;
  for (std::size_t i = 0; i < limits_.size(); ++i) {
    if (index[i] < 0 || index[i] > limits_[i]) return false;
  }
  return true;
}

std::size_t IndexGrid::rank(const MultiIndex& index) const {
  if (!contains(index)) throw Error(ErrorKind::IndexOutOfRange, format_index(index));
  std::size_t pos = 0;
  for (std::size_t i = 0; i < limits_.size(); ++i) pos += strides_[i] * static_cast<std::size_t>(index[i]);
  return pos;
}

MultiIndex IndexGrid::unrank(std::size_t position) const {
  if (position >= size_) throw Error(ErrorKind::IndexOutOfRange, "position " + std::to_string(position));
  MultiIndex out(std::vector<int>(limits_.size(), 0));
  for (std::size_t i = 0; i < limits_.size(); ++i) {
    out[i] = static_cast<int>(position / strides_[i]);
    position %= strides_[i];
  }
  return out;
}

std::vector<MultiIndex> IndexGrid::all() const {
  std::vector<MultiIndex> out;
  out.reserve(size_);
  MultiIndex current(std::vector<int>(limits_.size(), 0));
  for (std::size_t n = 0; n < size_; ++n) {
    out.push_back(current);
    for (std::size_t i = limits_.size(); i-- > 0;) {
      if (current[i] < limits_[i]) {
        ++current[i];
        break;
      }
      current[i] = 0;
    }
  }
  return out;
}

std::vector<MultiIndex> multi_index_range(const std::vector<int>& limits) { return IndexGrid(limits).all(); }

}  // namespace exchkit
