#include "rearr/numeric.hpp"

#include <mpfr.h>

#include <charconv>
#include <cctype>
#include <string>

#include "rearr/error.hpp"

namespace rearr {

double Enclosure::mid() const { return Rational((lo + hi) / 2).get_d(); }

Enclosure operator+(const Enclosure& a, const Enclosure& b) { return {a.lo + b.lo, a.hi + b.hi}; }

Enclosure operator-(const Enclosure& a, const Enclosure& b) { return {a.lo - b.hi, a.hi - b.lo}; }

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot convert a non-finite double to a rational");
  Rational r(v);
  r.canonicalize();
  return r;
}

namespace {

// Decimal literal with optional exponent, no fraction bar.
Rational parse_decimal(std::string_view s) {
  if (s.empty()) throw ParseError("empty number");
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }
  std::string digits;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw ParseError("malformed number '" + std::string(s) + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw ParseError("malformed number '" + std::string(s) + "'");
    ++pos;
    long e = 0;
    auto rest = s.substr(pos);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw ParseError("malformed exponent in '" + std::string(s) + "'");
    }
    exponent += e;
  }
  mpz_class mantissa(digits, 10);
  mpz_class ten_power;
  mpz_ui_pow_ui(ten_power.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational r = exponent < 0 ? Rational(mantissa, ten_power) : Rational(mantissa * ten_power);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class MpfrValue {
 public:
  explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

Rational power_bound(const Rational& x, double gamma, mpfr_rnd_t rnd) {
  constexpr mpfr_prec_t kPrecision = 256;
  MpfrValue base(kPrecision), exponent(kPrecision), result(kPrecision);
  mpfr_set_q(base.get(), x.get_mpq_t(), rnd);
  mpfr_set_d(exponent.get(), gamma, MPFR_RNDN);  // exact: 256 bits hold any double
  mpfr_pow(result.get(), base.get(), exponent.get(), rnd);
  Rational out;
  mpfr_get_q(out.get_mpq_t(), result.get());
  return out;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto s = trim(text);
  auto bar = s.find('/');
  if (bar == std::string_view::npos) return parse_decimal(s);
  Rational num = parse_decimal(trim(s.substr(0, bar)));
  Rational den = parse_decimal(trim(s.substr(bar + 1)));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
  Rational r = num / den;
  r.canonicalize();
  return r;
}

double parse_double(std::string_view text) {
  auto s = trim(text);
  if (s == "inf" || s == "+inf" || s == "infinity") return kInfinity;
  if (s.find('/') != std::string_view::npos) return parse_rational(s).get_d();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("malformed number '" + std::string(text) + "'");
  }
  return v;
}

std::string to_string(const Rational& v) { return v.get_str(); }

Enclosure power_enclosure(const Rational& x, double gamma, const Rational& scale) {
  if (x < 0) throw DomainError("power weight evaluated at a negative argument");
  if (gamma == std::floor(gamma) && gamma >= 0 && gamma <= 64) {
    Rational p(1);
    for (int i = 0; i < static_cast<int>(gamma); ++i) p *= x;
    Rational v = scale * p;
    return Enclosure::point(v);
  }
  if (gamma <= 0) throw DomainError("power enclosure needs a positive exponent");
  if (x == 0) return Enclosure::point(Rational(0));
  // x -> x^gamma is increasing, so rounding the base and the power in the same
  // direction brackets the exact value.
  Rational lo = power_bound(x, gamma, MPFR_RNDD);
  Rational hi = power_bound(x, gamma, MPFR_RNDU);
  return {Rational(scale * lo), Rational(scale * hi)};
}

}  // namespace rearr
