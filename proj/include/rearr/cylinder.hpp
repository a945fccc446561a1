#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rearr/expression.hpp"
#include "rearr/quadrature.hpp"
#include "rearr/rearrange1d.hpp"
#include "rearr/weights.hpp"

namespace rearr {

/// Omega' x (0, alpha): Omega' an axis-aligned box in dimension N - 1 sampled
/// on a uniform grid with `resolution` nodes per axis.
struct CylinderDomain {
  std::vector<double> lower;
  std::vector<double> upper;
  int resolution = 9;
  double alpha = kInfinity;
  /// Columns vanish for y >= support_bound.
  double support_bound = 1.0;

  int dimension() const { return static_cast<int>(lower.size()) + 1; }
  std::size_t column_count() const;
  double spacing(std::size_t axis) const;
  double xprime_measure() const;
  /// Grid node coordinates of a column (row-major, first axis slowest).
  std::vector<double> node(std::size_t column) const;
  std::vector<int> multi_index(std::size_t column) const;
  std::size_t flat_index(std::span<const int> index) const;
  /// Trapezoid weight of a node.
  double quadrature_weight(std::size_t column) const;
  /// Upper end of the y range that carries the functions: min(alpha, support_bound).
  double y_extent() const;
  Extent<double> column_alpha() const;

  CylinderDomain with_resolution(int nodes) const;
  void validate() const;
};

/// u(x', y) sampled on the x' grid; each column is piecewise linear in y.
class ColumnFunction {
 public:
  ColumnFunction(CylinderDomain domain, std::vector<PiecewiseLinear1D> columns);

  /// Samples a closed-form expression in x1..x{N-1}, y at y_nodes uniform nodes
  /// on [0, y_extent]; negative values are clipped to 0.
  static ColumnFunction from_expression(const CylinderDomain& domain, const Expression& expr, int y_nodes);
  static ColumnFunction from_columns(const CylinderDomain& domain,
                                     const std::function<PiecewiseLinear1D(std::span<const double>)>& column_at);

  const CylinderDomain& domain() const { return domain_; }
  const std::vector<PiecewiseLinear1D>& columns() const { return columns_; }
  const PiecewiseLinear1D& column(std::size_t i) const { return columns_[i]; }

  /// Lipschitz bound from y slopes and x' differences of neighbouring columns.
  double lipschitz() const;

 private:
  CylinderDomain domain_;
  std::vector<PiecewiseLinear1D> columns_;
};

/// Column-wise decreasing rearrangement in y.
ColumnFunction rearrange_columns(const ColumnFunction& u);

/// Evaluation point handed to cylinder integrands. grad_prime holds the finite
/// difference x' gradient (central inside the box, one-sided on its boundary).
struct ColumnPoint {
  std::size_t column;
  std::span<const double> xprime;
  double y;
  double value;
  double uy;
  std::span<const double> grad_prime;
};

struct CylinderIntegral {
  double value = 0.0;
  double error = 0.0;
};

/// Trapezoid rule over the x' grid, adaptive Gauss-Legendre in y on pieces
/// delimited by the breakpoints of each column and its stencil neighbours.
CylinderIntegral integrate_over_cylinder(const ColumnFunction& u,
                                         const std::function<double(const ColumnPoint&)>& integrand,
                                         const QuadratureOptions& quad = {});

/// Gradient of a single column at the midpoint of each y piece (for inspection).
struct GradientSample {
  double y;
  double uy;
  std::vector<double> grad_prime;
};
std::vector<GradientSample> discrete_gradient(const ColumnFunction& u, std::size_t column);

namespace integrand_nd {

/// (|z'|^2 + zN^2)^(p/2)
struct EuclideanPower {
  double p = 2.0;
};

/// A(z') + B(zN)
struct Separable {
  std::string name;
  std::function<double(std::span<const double>)> A;
  std::function<double(double)> B;
};

struct Custom {
  std::string name;
  std::function<double(std::span<const double> zprime, double zN, double v, std::span<const double> xprime)> eval;
};

}  // namespace integrand_nd

struct IntegrandNDFlags {
  bool convex_in_z = false;
  bool nondecreasing_in_zN = false;
};

/// G(z', zN, v, x'). Declared flags are probed at random points on construction.
class IntegrandND {
 public:
  using Form = std::variant<integrand_nd::EuclideanPower, integrand_nd::Separable, integrand_nd::Custom>;

  IntegrandND(Form form, IntegrandNDFlags flags, std::optional<Growth> growth = std::nullopt,
              std::uint64_t probe_seed = 0x5eed, int dimension = 2);

  static IntegrandND euclidean_power(double p);

  double operator()(std::span<const double> zprime, double zN, double v, std::span<const double> xprime) const;
  const Form& form() const { return form_; }
  const IntegrandNDFlags& flags() const { return flags_; }
  const std::optional<Growth>& growth() const { return growth_; }
  std::optional<double> power_exponent() const;
  std::string describe() const;

 private:
  Form form_;
  IntegrandNDFlags flags_;
  std::optional<Growth> growth_;
};

/// Weight f(x', y): one WeightSpec shared by all columns or one per x' node.
class CylinderWeight {
 public:
  CylinderWeight(WeightSpec shared);  // NOLINT(google-explicit-constructor)
  explicit CylinderWeight(std::function<WeightSpec(std::span<const double>)> per_column);

  std::vector<WeightSpec> on(const CylinderDomain& domain) const;

 private:
  std::optional<WeightSpec> shared_;
  std::function<WeightSpec(std::span<const double>)> per_column_;
};

struct CylinderOptions {
  QuadratureOptions quadrature;
  bool check_weight = true;
  ConditionOptions weight_conditions;
};

/// Integral of G(grad' u, f |u_y|, u, x') over the cylinder.
CylinderIntegral functional_nd(const ColumnFunction& u, const CylinderWeight& f, const IntegrandND& G,
                               const CylinderOptions& options = {});

/// Integral of |u|^p over the cylinder.
double lp_integral(const ColumnFunction& u, double p, const QuadratureOptions& quad = {});

/// One rung of a refinement ladder.
struct LevelReport {
  int nodes = 0;
  double h = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct RefinementReport {
  std::vector<LevelReport> levels;
  double kappa = 0.0;
  bool passed = true;     // every level within tolerance
  bool converged = true;  // negative margins shrink at least linearly in h
  std::string note;
};

struct RefinementOptions {
  std::vector<int> refinements{8, 16, 32};
  /// tol(h) = kappa h. Default (N - 1) Lip(u)^2 |Omega|, Lip taken over all levels.
  std::optional<double> kappa;
  /// Absolute slack on the convergence test and the tolerance.
  double floor = 1e-12;
  CylinderOptions cylinder;
};

/// Produces the function to test at a given number of x' nodes per axis.
using ColumnSource = std::function<ColumnFunction(int nodes)>;

/// Builds the report from per-level (lhs, rhs) pairs and a Lipschitz bound.
RefinementReport assess_refinement(std::vector<LevelReport> levels, double default_kappa,
                                   const RefinementOptions& options);

RefinementReport verify_polya_szego_cylinder(const ColumnSource& source, const CylinderWeight& f,
                                             const IntegrandND& G, const RefinementOptions& options = {});

/// Specialisation G = (|z'|^2 + zN^2)^(p/2), 1 < p < infinity.
RefinementReport verify_p_norm_corollary(const ColumnSource& source, const CylinderWeight& f, double p,
                                         const RefinementOptions& options = {});

/// Random check of 0 <= G <= C (1 + |v|^p + |z|^p).
ConditionReport validate_growth(const IntegrandND& G, double C, double p, std::size_t samples,
                                std::uint64_t seed = 1, int dimension = 2, double radius = 50.0);

}  // namespace rearr
