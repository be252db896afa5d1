#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "brdm/error.hpp"

namespace brdm {

/// Exact rational scalar. Expression templates are disabled so generic code
/// can use `auto` on arithmetic results.
using rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using big_int = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  /// Normalization and order comparisons share the same default tolerance.
  static double default_tolerance() { return 1e-9; }
  static double to_double(double x) { return x; }
  static double from_double(double x) { return x; }
};

template <>
struct scalar_traits<rational> {
  static constexpr bool exact = true;
  static rational default_tolerance() { return rational(0); }
  static double to_double(const rational& x) { return x.convert_to<double>(); }
  static rational from_double(double x) { return rational(x); }
};

template <class T>
concept probability_scalar = requires { scalar_traits<T>::exact; };

template <class T>
inline double to_double(const T& x) {
  return scalar_traits<T>::to_double(x);
}

template <class T>
inline T abs_value(const T& x) {
  return x < T(0) ? T(-x) : x;
}

/// a <= b up to tol (tol is zero for exact scalars).
template <class T>
inline bool leq(const T& a, const T& b, const T& tol) {
  return a <= b + tol;
}

template <class T>
inline bool near(const T& a, const T& b, const T& tol) {
  return abs_value(T(a - b)) <= tol;
}

/// Best rational approximation of x with denominator at most max_denominator.
/// Works on the exact binary value of x (continued-fraction convergents plus
/// the closest admissible semiconvergent).
inline rational rationalize(double x, std::int64_t max_denominator = 10000) {
  if (!std::isfinite(x)) fail(errc::invalid_argument, "cannot rationalize a non-finite value");
  if (max_denominator < 1) fail(errc::invalid_argument, "denominator bound must be positive");
  const rational exact_value(x);
  const bool negative = exact_value < 0;
  const rational target = negative ? rational(-exact_value) : exact_value;
  big_int n = numerator(target), d = denominator(target);
  const big_int bound = max_denominator;
  if (d <= bound) return exact_value;
  big_int p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  while (true) {
    const big_int a = n / d;
    const big_int q2 = q0 + a * q1;
    if (q2 > bound) break;
    const big_int p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const big_int r = n - a * d;
    n = d;
    d = r;
    if (d == 0) break;
  }
  const big_int k = (bound - q0) / q1;
  const rational semi(big_int(p0 + k * p1), big_int(q0 + k * q1));
  const rational conv(p1, q1);
  const rational best = abs_value(rational(conv - target)) <= abs_value(rational(semi - target)) ? conv : semi;
  return negative ? rational(-best) : best;
}

/// Parses "3", "-2", "1/6", "0.25" or "1e-3" into an exact rational. Decimal
/// text is read digit by digit, so "0.1" is exactly 1/10.
inline rational parse_rational(std::string_view text) {
  auto bad = [&]() -> rational { fail(errc::invalid_argument, "not a rational literal: '" + std::string(text) + "'"); };
  if (text.empty()) return bad();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    rational num = parse_rational(text.substr(0, slash));
    rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) fail(errc::invalid_argument, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  big_int digits = 0;
  big_int scale = 1;
  bool seen_digit = false, seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (seen_point) scale *= 10;
      seen_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      return bad();
    }
  }
  if (!seen_digit) return bad();
  rational value(digits, scale);
  if (pos < text.size()) {
    const std::string exp_text(text.substr(pos + 1));
    if (exp_text.empty()) return bad();
    std::size_t used = 0;
    long exponent = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      return bad();
    }
    if (used != exp_text.size() || exponent > 4000 || exponent < -4000) return bad();
    big_int p10 = 1;
    for (long i = 0; i < std::labs(exponent); ++i) p10 *= 10;
    value = exponent >= 0 ? rational(value * rational(p10)) : rational(value / rational(p10));
  }
  return negative ? rational(-value) : value;
}

}  // namespace brdm
