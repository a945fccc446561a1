#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rearr/numeric.hpp"
#include "rearr/weights.hpp"

namespace rearr {

/// Finite union of disjoint open intervals (x1, x2) u (x3, x4) u ... inside (0, alpha).
/// Endpoints are stored as exact rationals; touching intervals are merged.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(Extent<Rational> alpha) : alpha_(std::move(alpha)) {}
  IntervalUnion(std::vector<std::pair<Rational, Rational>> intervals, Extent<Rational> alpha = std::nullopt);

  static IntervalUnion from_doubles(const std::vector<std::pair<double, double>>& intervals,
                                    double alpha = kInfinity);

  const Extent<Rational>& alpha() const { return alpha_; }
  /// x1 < x2 < ... < x2n
  const std::vector<Rational>& endpoints() const { return endpoints_; }
  std::size_t interval_count() const { return endpoints_.size() / 2; }
  std::pair<Rational, Rational> interval(std::size_t j) const { return {endpoints_[2 * j], endpoints_[2 * j + 1]}; }
  bool empty() const { return endpoints_.empty(); }

  /// Endpoints lying strictly inside (0, alpha).
  std::vector<Rational> interior_boundary() const;

  bool operator==(const IntervalUnion&) const = default;

 private:
  Extent<Rational> alpha_;
  std::vector<Rational> endpoints_;
};

Rational measure(const IntervalUnion& m);

/// (0, |M|), or the empty set.
IntervalUnion rearrange_set(const IntervalUnion& m);

/// (0, alpha) minus the closure of M.
IntervalUnion complement(const IntervalUnion& m);

/// Sum of f over the endpoints of M inside (0, alpha). Throws InvalidInput if
/// the domains of M and w differ.
double perimeter_f(const IntervalUnion& m, const WeightSpec& w);

/// Rigorous enclosure of perimeter_f; requires w.has_exact_evaluation().
Enclosure perimeter_f_enclosure(const IntervalUnion& m, const WeightSpec& w);

/// Checks P_f(M*) <= P_f(M). With an exactly evaluable weight the decision is
/// exact; otherwise margins within -tolerance pass.
ConditionReport verify_isoperimetric_1d(const IntervalUnion& m, const WeightSpec& w, double tolerance = 1e-12);

/// Set whose rearrangement has a larger perimeter, built from a pair (x1, x2)
/// violating f(x2 - x1) <= f(x1) + f(x2). A degenerate pair x1 == x2 is widened
/// to (x1 - delta, x2 + delta). Throws DomainError for pairs touching 0 or
/// alpha and InvalidInput when the pair is not a violation.
IntervalUnion necessity_witness(const WeightSpec& w, std::pair<double, double> violation, double delta = 1e-3);

/// For f(x) != f(alpha - x), returns (x, alpha) or (alpha - x, alpha), whichever
/// has the smaller perimeter than its rearrangement.
IntervalUnion symmetry_witness(const WeightSpec& w, double x);

}  // namespace rearr
