#include "rearr/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "rearr/error.hpp"

namespace rearr {

namespace {

GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double apply(const GaussRule& rule, const std::function<double(double)>& f, double a, double b) {
  double half = 0.5 * (b - a), center = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(center + half * rule.nodes[i]);
  return half * sum;
}

struct Adaptive {
  const std::function<double(double)>& f;
  const QuadratureOptions& opt;
  const GaussRule& rule;
  double error = 0.0;
  bool failed = false;

  double run(double a, double b, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double left = apply(rule, f, a, m);
    double right = apply(rule, f, m, b);
    double refined = left + right;
    double diff = std::abs(refined - whole);
    if (diff <= tol || depth >= opt.max_depth || m <= a || m >= b) {
      if (diff > tol) failed = true;
      error += diff;
      return refined;
    }
    return run(a, m, left, 0.5 * tol, depth + 1) + run(m, b, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

const GaussRule& gauss_legendre_rule(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
  return apply(gauss_legendre_rule(n), f, a, b);
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& options) {
  if (a == b) return {};
  static const GaussRule& rule = gauss_legendre_rule(10);
  double whole = apply(rule, f, a, b);
  double tol = std::max(options.abs_tol, options.rel_tol * std::abs(whole));
  Adaptive state{f, options, rule};
  double value = state.run(a, b, whole, tol, 0);
  if (state.failed && state.error > 10.0 * std::max(tol, options.rel_tol * std::abs(value))) {
    throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  }
  return {value, state.error};
}

QuadratureResult integrate_simpson(const std::function<double(double)>& f, double a, double b,
                                   const QuadratureOptions& options) {
  if (a == b) return {};
  struct Simpson {
    const std::function<double(double)>& f;
    int max_depth;
    double error = 0.0;
    double run(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
      double m = 0.5 * (a + b);
      double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      double flm = f(lm), frm = f(rm);
      double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      double diff = left + right - whole;
      if (std::abs(diff) <= 15.0 * tol || depth >= max_depth) {
        error += std::abs(diff) / 15.0;
        return left + right + diff / 15.0;
      }
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + run(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
  };
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  Simpson s{f, options.max_depth};
  double tol = std::max(options.abs_tol, options.rel_tol * std::abs(whole));
  double v = s.run(a, b, fa, fm, fb, whole, tol, 0);
  return {v, s.error};
}

namespace {

// Degree-8 exact rule on the reference triangle via a collapsed 5x5 Gauss product.
struct TriangleRule {
  std::vector<std::array<double, 3>> points;  // (xi, eta, weight) on the unit right triangle
  TriangleRule() {
    const GaussRule& g = gauss_legendre_rule(5);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        double u = 0.5 * (g.nodes[i] + 1.0), v = 0.5 * (g.nodes[j] + 1.0);
        double w = 0.25 * g.weights[i] * g.weights[j];
        points.push_back({u, v * (1.0 - u), w * (1.0 - u)});
      }
    }
  }
};

using Point = std::array<double, 2>;

double triangle_rule(const std::function<double(double, double)>& f, const Point& a, const Point& b, const Point& c) {
  static const TriangleRule rule;
  double area2 = std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  double sum = 0.0;
  for (const auto& p : rule.points) {
    double x = a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]);
    double y = a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]);
    sum += p[2] * f(x, y);
  }
  return sum * area2;
}

struct TriangleAdaptive {
  const std::function<double(double, double)>& f;
  int max_depth;
  double error = 0.0;
  double run(const Point& a, const Point& b, const Point& c, double whole, double tol, int depth) {
    Point ab{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    Point bc{0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1])};
    Point ca{0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1])};
    double t0 = triangle_rule(f, a, ab, ca), t1 = triangle_rule(f, ab, b, bc);
    double t2 = triangle_rule(f, ca, bc, c), t3 = triangle_rule(f, ab, bc, ca);
    double refined = t0 + t1 + t2 + t3;
    double diff = std::abs(refined - whole);
    if (diff <= tol || depth >= max_depth) {
      error += diff;
      return refined;
    }
    double q = 0.25 * tol;
    return run(a, ab, ca, t0, q, depth + 1) + run(ab, b, bc, t1, q, depth + 1) + run(ca, bc, c, t2, q, depth + 1) +
           run(ab, bc, ca, t3, q, depth + 1);
  }
};

}  // namespace

QuadratureResult integrate_triangle(const std::function<double(double, double)>& f, std::span<const double, 2> p0,
                                    std::span<const double, 2> p1, std::span<const double, 2> p2,
                                    const QuadratureOptions& options) {
  Point a{p0[0], p0[1]}, b{p1[0], p1[1]}, c{p2[0], p2[1]};
  double whole = triangle_rule(f, a, b, c);
  TriangleAdaptive state{f, std::min(options.max_depth, 8)};
  double tol = std::max(options.abs_tol, options.rel_tol * std::abs(whole));
  double v = state.run(a, b, c, whole, tol, 0);
  return {v, state.error};
}

}  // namespace rearr
