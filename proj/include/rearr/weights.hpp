#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rearr/error.hpp"
#include "rearr/numeric.hpp"

namespace rearr {

namespace weight {

/// scale * x^gamma
struct Power {
  double gamma = 1.0;
  double scale = 1.0;
};

/// Coefficients in ascending order: c0 + c1 x + c2 x^2 + ...
struct Polynomial {
  std::vector<double> coefficients;
};

/// Linear interpolation between (x, f) nodes. The first node sits at x = 0.
/// On an unbounded domain the last value is continued as a constant.
struct Tabulated {
  std::vector<std::pair<double, double>> nodes;
};

/// Opaque evaluator; only double evaluation is available.
struct Custom {
  std::string name;
  std::function<double(double)> eval;
  /// Set when built from an expression in x; the text is then `name`.
  bool expression = false;
};

}  // namespace weight

using WeightForm = std::variant<weight::Power, weight::Polynomial, weight::Tabulated, weight::Custom>;

/// A weight f on the interval (0, alpha), alpha possibly +infinity.
/// Continuous on the closure and strictly positive inside; checked on construction.
class WeightSpec {
 public:
  explicit WeightSpec(WeightForm form, double alpha = kInfinity);

  static WeightSpec power(double gamma, double alpha = kInfinity, double scale = 1.0);
  static WeightSpec polynomial(std::vector<double> coefficients, double alpha = kInfinity);
  static WeightSpec constant(double value, double alpha = kInfinity);
  static WeightSpec tabulated(std::vector<std::pair<double, double>> nodes, double alpha = kInfinity);
  static WeightSpec custom(std::string name, std::function<double(double)> eval, double alpha = kInfinity);
  /// Closed-form expression in the variable `x`.
  static WeightSpec expression(const std::string& text, double alpha = kInfinity);

  double alpha() const { return alpha_; }
  bool bounded() const { return alpha_ < kInfinity; }

  /// f(x); throws DomainError outside [0, alpha].
  double operator()(double x) const;

  /// Power, Polynomial and Tabulated weights evaluate exactly (or with a
  /// rigorous enclosure) on rational arguments.
  bool has_exact_evaluation() const;
  /// Constant polynomial, x^0 or a flat table.
  bool is_constant() const;
  Enclosure enclose(const Rational& x) const;

  const WeightForm& form() const { return form_; }
  std::string describe() const;

  bool claimed_symmetric = false;
  bool claimed_pair_condition = false;

 private:
  double clamp_to_domain(double x) const;

  WeightForm form_;
  double alpha_;
};

inline double eval_weight(const WeightSpec& w, double x) { return w(x); }

/// Interior kinks of w in (a, b): tabulated nodes, empty for smooth profiles.
std::vector<double> weight_kinks(const WeightSpec& w, double a, double b);

/// Integral of f(x)^p over [a, b]. Closed form for power weights, polynomial
/// weights with integer p and tabulated weights; adaptive quadrature otherwise.
double integrate_weight_power(const WeightSpec& w, double p, double a, double b);

/// Outcome of a numerical condition check. `worst_margin` is the smallest
/// RHS - LHS over the tested tuples; `passed` iff worst_margin >= -tolerance.
struct ConditionReport {
  bool passed = true;
  double worst_margin = kInfinity;
  std::vector<double> witness;
  std::size_t tuples_tested = 0;
  bool exact = false;  // decided in exact or rigorously enclosed arithmetic
  std::string note;

  void record(double margin, std::vector<double> tuple);
  void finish(double tolerance);
};

/// Raised when a weight fails the conditions an operation requires.
class WeightConditionError : public Error {
 public:
  WeightConditionError(const std::string& what, ConditionReport report)
      : Error(what), report_(std::move(report)) {}
  const ConditionReport& report() const { return report_; }

 private:
  ConditionReport report_;
};

struct ConditionOptions {
  std::size_t grid_count = 201;
  /// Test window [0, window] used in place of (0, +infinity).
  double window = 10.0;
  double tolerance = 1e-12;
};

/// Uniform grid on [0, alpha] (or the test window) with grid_count nodes.
std::vector<double> condition_grid(const WeightSpec& w, const ConditionOptions& options);

/// f(x2 - x1) <= f(x1) + f(x2) for all grid pairs x1 <= x2.
ConditionReport check_pair_condition(const WeightSpec& w, const ConditionOptions& options = {});

/// f(x) = f(alpha - x); requires a bounded domain.
ConditionReport check_symmetry(const WeightSpec& w, const ConditionOptions& options = {});

/// f(sum_k x_k (-1)^(n-k)) <= sum_k f(x_k) for a nondecreasing tuple.
ConditionReport check_alternating_sum(const WeightSpec& w, std::span<const double> points,
                                      double tolerance = 1e-12);
ConditionReport check_alternating_sum(const WeightSpec& w, std::span<const Rational> points);

/// If f is concave and symmetric, checks f(0) + f(x2 - x1) <= f(x1) + f(x2) on the grid.
ConditionReport check_concave_symmetric_sufficiency(const WeightSpec& w, const ConditionOptions& options = {});

/// Grid pair with the most negative pair-condition margin, if any is negative.
std::optional<std::pair<double, double>> find_condition_violation(const WeightSpec& w,
                                                                  const ConditionOptions& options = {});

/// Pair condition, plus symmetry when the domain is bounded. Returns the first failing report.
ConditionReport check_weight_conditions(const WeightSpec& w, const ConditionOptions& options = {});

/// Throws WeightConditionError unless check_weight_conditions passes.
void require_weight_conditions(const WeightSpec& w, const ConditionOptions& options = {});

}  // namespace rearr
