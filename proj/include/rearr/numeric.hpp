#pragma once

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace rearr {

using Rational = mpq_class;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Upper end of a domain (0, alpha). An empty optional stands for +infinity.
template <class Scalar>
using Extent = std::optional<Scalar>;

/// Closed interval [lo, hi] of rationals known to contain an exact real value.
struct Enclosure {
  Rational lo;
  Rational hi;

  static Enclosure point(const Rational& v) { return {v, v}; }
  bool exact() const { return lo == hi; }
  double mid() const;
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);

/// num / den in canonical form (mpq_class(num, den) is not reduced).
inline Rational ratio(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }

/// Exact conversion; every finite double is a dyadic rational.
Rational to_rational(double v);

/// Parses "3/2", "-7", "0.125", "1e-3", "2.5E+2" exactly.
Rational parse_rational(std::string_view text);

/// Parses a decimal string to the nearest double (round-to-nearest, like strtod).
double parse_double(std::string_view text);

std::string to_string(const Rational& v);

/// Rigorous enclosure of scale * x^gamma for x >= 0, computed with directed
/// rounding in 256-bit precision. Exact when gamma is a small nonnegative integer.
Enclosure power_enclosure(const Rational& x, double gamma, const Rational& scale);

template <class Scalar>
Scalar abs_value(const Scalar& v) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return Rational(abs(v));
  } else {
    return std::abs(v);
  }
}

template <class Scalar>
Extent<double> extent_to_double(const Extent<Scalar>& e) {
  if (!e) return std::nullopt;
  return to_double(*e);
}

inline double extent_value(const Extent<double>& e) { return e ? *e : kInfinity; }

}  // namespace rearr
