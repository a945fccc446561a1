#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "rearr/cylinder.hpp"
#include "rearr/expression.hpp"
#include "rearr/sets1d.hpp"
#include "rearr/weights.hpp"

namespace rearr {

struct ProfileOptions {
  /// Reject profiles whose induced weight fails the rearrangement conditions.
  bool enforce_conditions = true;
  ConditionOptions conditions;
  /// Declared image length alpha; checked against lim W(y).
  std::optional<double> alpha;
  /// Closed-form primitive W(y) in the variable `y`, used instead of quadrature.
  std::optional<std::string> closed_form_W;
  /// Extent of the cumulative table when w has no closed-form primitive and alpha1 is infinite.
  double table_extent = 64.0;
  int table_nodes = 4096;
};

/// w on I1 = (0, alpha1), its primitive W(y) = int_0^y w, the inverse W^-1 and
/// the induced weight f(z) = w(W^-1(z)) on (0, alpha), alpha = W(alpha1).
class WeightProfile {
 public:
  explicit WeightProfile(WeightSpec w, ProfileOptions options = {});

  double alpha1() const { return w_.alpha(); }
  double alpha() const { return alpha_; }
  const WeightSpec& w() const { return w_; }
  const WeightSpec& induced() const { return *induced_; }

  double W(double y) const;
  double W_inverse(double z) const;

  /// Primitive known in closed form (no quadrature table).
  bool closed_form() const;
  /// Accumulated quadrature error estimate of the cumulative table.
  double table_error() const;

  struct State;

 private:
  WeightSpec w_;
  double alpha_ = kInfinity;
  std::shared_ptr<const State> state_;
  std::shared_ptr<const WeightSpec> induced_;
};

/// The induced weight of a profile; throws WeightConditionError when the
/// profile enforces conditions and f fails them.
WeightSpec induced_weight(const WeightSpec& w, const ProfileOptions& options = {});
inline const WeightSpec& induced_weight(const WeightProfile& p) { return p.induced(); }

struct WRearrangeOptions {
  /// Maximum deviation of the piecewise-linear output from the exact T(v) at refinement midpoints.
  double value_tolerance = 1e-10;
  /// Estimated w-measure error of level sets caused by the interpolation.
  double measure_tolerance = 1e-10;
  int max_depth = 30;
};

/// w-measure of {y : v(y) > c}.
double w_distribution(const PiecewiseLinear1D& v, const WeightProfile& P, double c);

/// w-measure of {y : a < v(y) < b}.
double w_measure_between(const PiecewiseLinear1D& v, const WeightProfile& P, double a, double b);

/// Weighted rearrangement of one column: nonincreasing with the same w-distribution.
PiecewiseLinear1D w_rearrange_column(const PiecewiseLinear1D& v, const WeightProfile& P,
                                     const WRearrangeOptions& options = {});

/// T(v): column-wise weighted rearrangement. Nonincreasing columns are returned unchanged.
ColumnFunction w_rearrange(const ColumnFunction& v, const WeightProfile& P, const WRearrangeOptions& options = {});

/// Worst |w-measure{a < v < b} - w-measure{a < T(v) < b}| over columns and bands.
ConditionReport verify_slice_preservation(const ColumnFunction& v, const ColumnFunction& tv, const WeightProfile& P,
                                          std::span<const std::pair<double, double>> levels,
                                          double tolerance = 1e-9);

/// Integral of G(grad' v, |v_y|, v, x') w(y).
CylinderIntegral weighted_functional(const ColumnFunction& v, const WeightProfile& P, const IntegrandND& G,
                                     const QuadratureOptions& quad = {});

/// (int |v|^p w)^(1/p)
double weighted_norm(const ColumnFunction& v, const WeightProfile& P, double p, const QuadratureOptions& quad = {});
/// (int |grad v|^p w)^(1/p)
double weighted_gradient_norm(const ColumnFunction& v, const WeightProfile& P, double p,
                              const QuadratureOptions& quad = {});
/// weighted_gradient_norm + weighted_norm
double sobolev_seminorm(const ColumnFunction& v, const WeightProfile& P, double p, const QuadratureOptions& quad = {});

struct WeightedRefinementOptions {
  RefinementOptions refinement;
  WRearrangeOptions rearrange{1e-8, 1e-8};
};

RefinementReport verify_weighted_dirichlet(const ColumnSource& source, const WeightProfile& P, const IntegrandND& G,
                                           const WeightedRefinementOptions& options = {});

/// ||grad v||_{p,w} >= ||grad T(v)||_{p,w} under refinement.
RefinementReport verify_norm_inequality(const ColumnSource& source, const WeightProfile& P, double p,
                                        const WeightedRefinementOptions& options = {});

namespace layout {

/// Section (g1(x'), g2(x')) with g1, g2 given at the grid nodes and linear in between
/// (on the two triangles of each cell when N = 3). g1 = 0 everywhere is a subgraph.
struct Graph {
  std::vector<double> g1;
  std::vector<double> g2;
};

/// Subgraph (0, h(x')) with W(h) = W(g2) - W(g1): the rearrangement of a Graph set.
struct RearrangedGraph {
  std::vector<double> g1;
  std::vector<double> g2;
};

/// One y-section per grid cell, constant across the cell.
struct Cells {
  std::vector<IntervalUnion> sections;
};

}  // namespace layout

/// Set M in Omega' x (0, alpha1) described column by column.
class WeightedSetND {
 public:
  using Layout = std::variant<layout::Graph, layout::RearrangedGraph, layout::Cells>;

  WeightedSetND(CylinderDomain domain, Layout layout);

  const CylinderDomain& domain() const { return domain_; }
  const Layout& layout() const { return layout_; }
  std::size_t cell_count() const;
  bool is_subgraph() const;

 private:
  CylinderDomain domain_;
  Layout layout_;
};

/// Section-wise weighted rearrangement T(M).
WeightedSetND w_rearrange_set(const WeightedSetND& m, const WeightProfile& P);

/// Integral of w over the part of the boundary of M inside the open cylinder.
double perimeter_w(const WeightedSetND& m, const WeightProfile& P, const QuadratureOptions& quad = {});

/// P_w(M) >= P_w(T(M)).
InequalityReport verify_isoperimetric_w(const WeightedSetND& m, const WeightProfile& P, double tolerance = 1e-8);

/// w-measure of an interval union in (0, alpha1).
double w_measure(const IntervalUnion& s, const WeightProfile& P);

}  // namespace rearr
