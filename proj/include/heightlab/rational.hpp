#pragma once

// Exact rational arithmetic and big-integer helpers shared by every module.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heightlab {

using Rational = boost::rational<std::int64_t>;
using RationalVector = std::vector<Rational>;
using BigInt = boost::multiprecision::cpp_int;

// Boost's mixed rational/integer equality recurses under C++20 rewritten
// comparisons; these exact-match overloads take precedence.
#define HEIGHTLAB_MIXED_EQ(I)                                                              \
  inline bool operator==(const Rational& q, I k) { return q.denominator() == 1 && q.numerator() == k; } \
  inline bool operator==(I k, const Rational& q) { return q == k; }                       \
  inline bool operator!=(const Rational& q, I k) { return !(q == k); }                    \
  inline bool operator!=(I k, const Rational& q) { return !(q == k); }
HEIGHTLAB_MIXED_EQ(int)
HEIGHTLAB_MIXED_EQ(long)
HEIGHTLAB_MIXED_EQ(long long)
#undef HEIGHTLAB_MIXED_EQ

inline std::int64_t floor_of(const Rational& q) {
  std::int64_t n = q.numerator();
  std::int64_t d = q.denominator();  // always positive
  std::int64_t f = n / d;
  if (n % d != 0 && n < 0) --f;
  return f;
}

inline std::int64_t ceil_of(const Rational& q) {
  return -floor_of(-q);
}

inline bool is_integer(const Rational& q) { return q.denominator() == 1; }

inline double to_double(const Rational& q) { return boost::rational_cast<double>(q); }

inline Rational abs(const Rational& q) { return q < 0 ? -q : q; }

inline std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

namespace detail {

inline std::int64_t parse_int(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer");
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  if (pos == text.size()) throw std::invalid_argument("bad integer: " + std::string(text));
  std::int64_t value = 0;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c < '0' || c > '9') throw std::invalid_argument("bad integer: " + std::string(text));
    if (value > (INT64_MAX - (c - '0')) / 10) throw std::out_of_range("integer overflow: " + std::string(text));
    value = value * 10 + (c - '0');
  }
  return negative ? -value : value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses "p/q", "k" or a finite decimal such as "-0.125" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  text = detail::trim(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t num = detail::parse_int(detail::trim(text.substr(0, slash)));
    std::int64_t den = detail::parse_int(detail::trim(text.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (frac.size() > 17) throw std::out_of_range("too many decimals: " + std::string(text));
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : detail::parse_int(whole);
    std::int64_t f = frac.empty() ? 0 : detail::parse_int(frac);
    if (f < 0) throw std::invalid_argument("bad decimal: " + std::string(text));
    Rational r = Rational(w) + Rational(negative ? -f : f, scale);
    return r;
  }
  return Rational(detail::parse_int(text));
}

inline RationalVector parse_rational_list(std::string_view text, char sep = ',') {
  RationalVector out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_rational(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

/// Natural logarithm of a positive big integer, evaluated in 50-digit binary floating point.
inline double log_big(const BigInt& value) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  if (value <= 0) throw std::domain_error("log of non-positive integer");
  Float x(value);
  return static_cast<double>(boost::multiprecision::log(x));
}

}  // namespace heightlab
