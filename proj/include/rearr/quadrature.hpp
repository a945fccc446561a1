#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rearr {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_depth = 40;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre_rule(int n);

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive bisection with a 10-point Gauss-Legendre rule.
/// Throws QuadratureError if the tolerance is not met within max_depth levels.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& options = {});

QuadratureResult integrate_simpson(const std::function<double(double)>& f, double a, double b,
                                   const QuadratureOptions& options = {});

/// Integral over the triangle with the given vertices (2D), adaptive by
/// splitting into four congruent sub-triangles.
QuadratureResult integrate_triangle(const std::function<double(double, double)>& f, std::span<const double, 2> p0,
                                    std::span<const double, 2> p1, std::span<const double, 2> p2,
                                    const QuadratureOptions& options = {});

}  // namespace rearr
