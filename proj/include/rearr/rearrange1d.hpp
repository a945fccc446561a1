#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "rearr/numeric.hpp"
#include "rearr/quadrature.hpp"
#include "rearr/weights.hpp"

namespace rearr {

/// Nonnegative, compactly supported, continuous piecewise-linear function on
/// (0, alpha) given by its breakpoints. The function is zero left of the first
/// breakpoint and right of the last one; it may be positive at x = 0 when the
/// first breakpoint sits there, and at x = alpha when the last one does.
template <class Scalar>
class PiecewiseLinear {
 public:
  using Point = std::pair<Scalar, Scalar>;

  PiecewiseLinear() = default;
  explicit PiecewiseLinear(std::vector<Point> points, Extent<Scalar> alpha = std::nullopt);

  const std::vector<Point>& points() const { return points_; }
  const Extent<Scalar>& alpha() const { return alpha_; }
  bool is_zero() const;

  /// Right end of the last breakpoint (0 for the zero function).
  Scalar support_bound() const;
  Scalar max_value() const;
  Scalar operator()(const Scalar& x) const;

  /// No segment of zero slope at a positive level.
  bool is_nice() const;
  bool is_nonincreasing() const;
  double lipschitz() const;

  /// Smallest |slope| over segments with nonzero slope; +infinity if none.
  double min_nonzero_slope() const;

  template <class Other>
  PiecewiseLinear<Other> convert() const;

  bool operator==(const PiecewiseLinear&) const = default;

 private:
  std::vector<Point> points_;
  Extent<Scalar> alpha_;
};

template <class To, class From>
To convert_scalar(const From& v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else if constexpr (std::is_same_v<To, double>) {
    return to_double(v);
  } else {
    return to_rational(v);
  }
}

template <class Scalar>
template <class Other>
PiecewiseLinear<Other> PiecewiseLinear<Scalar>::convert() const {
  std::vector<typename PiecewiseLinear<Other>::Point> out;
  out.reserve(points_.size());
  for (const auto& [x, u] : points_) out.emplace_back(convert_scalar<Other>(x), convert_scalar<Other>(u));
  Extent<Other> alpha;
  if (alpha_) alpha = convert_scalar<Other>(*alpha_);
  return PiecewiseLinear<Other>(std::move(out), std::move(alpha));
}

using PiecewiseLinear1D = PiecewiseLinear<double>;
using ExactPiecewiseLinear = PiecewiseLinear<Rational>;

/// |{x : u(x) > c}| for c >= 0.
template <class Scalar>
Scalar distribution(const PiecewiseLinear<Scalar>& u, const Scalar& c);

/// Total length of zero-slope segments at level c.
template <class Scalar>
Scalar plateau_length(const PiecewiseLinear<Scalar>& u, const Scalar& c);

enum class Direction { Down, Up };

template <class Scalar>
struct Branch {
  Scalar inverse_slope;  // |dx/du| > 0
  Scalar x_at_low;       // position where u = c_low
  Direction direction;   // sign of du/dx on this branch

  Scalar position(const Scalar& c, const Scalar& c_low) const;
};

/// Levels c in (c_low, c_high) at which every branch is a single affine inverse.
/// distribution(u, c) = offset + sum_down x_k(c) - sum_up x_k(c) inside the band.
template <class Scalar>
struct Band {
  Scalar c_low;
  Scalar c_high;
  std::vector<Branch<Scalar>> branches;
  Scalar offset;

  Scalar measure_at(const Scalar& c) const;
  Scalar inverse_slope_sum() const;
};

template <class Scalar>
struct LevelBandDecomposition {
  std::vector<Band<Scalar>> bands;
};

/// Throws NotNiceError on a positive plateau below the maximum.
template <class Scalar>
LevelBandDecomposition<Scalar> level_bands(const PiecewiseLinear<Scalar>& u);

/// Decreasing rearrangement u*. Plateaus are rearranged exactly.
template <class Scalar>
PiecewiseLinear<Scalar> rearrange(const PiecewiseLinear<Scalar>& u);

/// u + epsilon * max(0, 1 - x / R), R the support bound. Requires
/// epsilon < min(1, R) times the smallest nonzero |slope| so the result is nice.
template <class Scalar>
PiecewiseLinear<Scalar> niceify(const PiecewiseLinear<Scalar>& u, const Scalar& epsilon);

/// Integral of u^p, exact per segment.
template <class Scalar>
Scalar integral_power(const PiecewiseLinear<Scalar>& u, int p);

namespace integrand {

/// G(z, v) = z^p
struct PowerOfZ {
  double p = 2.0;
};

/// G(z, v) = zpart(z) * vpart(v)
struct Product {
  std::string name;
  std::function<double(double)> zpart;
  std::function<double(double)> vpart;
};

struct Custom {
  std::string name;
  std::function<double(double, double)> eval;
};

}  // namespace integrand

/// Bound G(z, v) <= C (1 + |v|^p + |z|^p).
struct Growth {
  double C = 1.0;
  double p = 1.0;
};

struct IntegrandFlags {
  bool convex_nondecreasing_in_z = false;
  bool g_over_z_nondecreasing = false;
  bool zero_at_zero = false;  // G(0, v) = 0
};

/// Integrand G(z, v) of the one-dimensional functionals. Declared flags are
/// probed at random points on construction; a contradicted flag throws InvalidInput.
class Integrand1D {
 public:
  using Form = std::variant<integrand::PowerOfZ, integrand::Product, integrand::Custom>;

  Integrand1D(Form form, IntegrandFlags flags, std::optional<Growth> growth = std::nullopt,
              std::uint64_t probe_seed = 0x5eed);

  static Integrand1D power(double p);

  double operator()(double z, double v) const;
  const Form& form() const { return form_; }
  const IntegrandFlags& flags() const { return flags_; }
  const std::optional<Growth>& growth() const { return growth_; }
  std::optional<double> power_exponent() const;
  std::string describe() const;

 private:
  Form form_;
  IntegrandFlags flags_;
  std::optional<Growth> growth_;
};

/// Integral of G(f(x) |u'(x)|, u(x)) over [0, upper]; upper defaults to the support bound.
double dirichlet_functional(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                            std::optional<double> upper = std::nullopt, const QuadratureOptions& quad = {});

/// Integral of G(|u'(x)|, u(x)) f(x) over [0, upper].
double landes_functional(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                         std::optional<double> upper = std::nullopt, const QuadratureOptions& quad = {});

/// Integral of G(|g'(x)|, v(x)) f(x): gradient from g, value from v.
double landes_functional_mixed(const PiecewiseLinear1D& g, const PiecewiseLinear1D& v, const WeightSpec& w,
                               const Integrand1D& G, std::optional<double> upper = std::nullopt,
                               const QuadratureOptions& quad = {});

/// LHS >= RHS check: passes iff margin >= -tolerance * max(lhs, rhs, 1).
struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string note;
};

InequalityReport compare(double lhs, double rhs, double relative_tolerance);

struct VerifyOptions {
  double tolerance = 1e-10;
  bool check_weight = true;
  /// Landes right-hand side with u instead of u* in the second slot of G.
  bool literal_landes_rhs = false;
  ConditionOptions weight_conditions;
  QuadratureOptions quadrature;
};

InequalityReport verify_dirichlet_1d(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                                     const VerifyOptions& options = {});
InequalityReport verify_landes(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                               const VerifyOptions& options = {});

/// The three quantities of the levelwise convexity argument for one band:
/// T = sum G(f(x_k)/b_k) b_k >= middle = G(sum f(x_k)/B) B >= T* = G(f(X)/B) B,
/// B = sum b_k, X = sum x_k (-1)^(n-k).
struct JensenStep {
  double T = 0.0;
  double middle = 0.0;
  double T_star = 0.0;
};

JensenStep jensen_step(std::span<const double> x, std::span<const double> b, const WeightSpec& w,
                       const Integrand1D& G, double level = 0.0);

/// T = sum G(1/b_k) f(x_k) b_k >= middle = G(1/B) B sum f(x_k) >= T* = G(1/B) B f(X).
JensenStep landes_step(std::span<const double> x, std::span<const double> b, const WeightSpec& w,
                       const Integrand1D& G, double level = 0.0);

/// Sorted samples of u at the midpoints of n cells covering [0, support bound].
struct SampledProfile {
  double spacing = 0.0;
  std::vector<double> values;  // nonincreasing
};

SampledProfile sort_oracle_rearrange(const PiecewiseLinear1D& u, std::size_t sample_count);

/// max_k |values[k] - ustar((k + 1/2) spacing)|
double oracle_sup_distance(const SampledProfile& oracle, const PiecewiseLinear1D& ustar);

/// u at a + (k + 1/2) h for k < n, evaluated with a single sweep.
std::vector<double> sample_midpoints(const PiecewiseLinear1D& u, double a, double h, std::size_t n);

}  // namespace rearr
