#include "rearr/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rearr/expression.hpp"
#include "rearr/quadrature.hpp"

namespace rearr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double horner(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

double interpolate(const std::vector<std::pair<double, double>>& nodes, double x) {
  if (x >= nodes.back().first) return nodes.back().second;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x,
                             [](double v, const std::pair<double, double>& n) { return v < n.first; });
  if (it == nodes.begin()) return nodes.front().second;
  const auto& [x1, f1] = *it;
  const auto& [x0, f0] = *(it - 1);
  double t = (x - x0) / (x1 - x0);
  return f0 + t * (f1 - f0);
}

void check_positive_inside(const WeightSpec& w) {
  double hi = w.bounded() ? w.alpha() : 10.0;
  constexpr int kProbes = 257;
  for (int i = 1; i < kProbes - 1; ++i) {
    double x = hi * i / (kProbes - 1);
    double v = w(x);
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "weight " << w.describe() << " is not strictly positive inside the domain (f(" << x << ") = " << v
         << ")";
      throw InvalidInput(os.str());
    }
  }
}

// Interior minima of a polynomial sit at roots of its derivative; a grid probe
// misses double roots such as (x - 1)^2.
void check_polynomial_minima(const std::vector<double>& c, double alpha) {
  std::size_t n = c.size();
  while (n > 1 && c[n - 1] == 0.0) --n;
  if (n <= 1) return;
  if (alpha == kInfinity && c[n - 1] < 0.0) throw InvalidInput("polynomial weight becomes negative at infinity");
  std::vector<double> d;
  for (std::size_t k = 1; k < n; ++k) d.push_back(static_cast<double>(k) * c[k]);
  double bound = 1.0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) bound = std::max(bound, 1.0 + std::abs(d[k] / d.back()));
  double hi = std::min(alpha, bound);
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  constexpr int kCells = 4096;
  double prev_x = 0.0, prev_d = horner(d, 0.0);
  for (int i = 1; i <= kCells; ++i) {
    double x = hi * i / kCells;
    double dx = horner(d, x);
    if (prev_d < 0.0 && dx >= 0.0) {
      double lo = prev_x, up = x;
      for (int it = 0; it < 200 && up - lo > 1e-16 * std::max(1.0, up); ++it) {
        double mid = 0.5 * (lo + up);
        (horner(d, mid) < 0.0 ? lo : up) = mid;
      }
      double xm = 0.5 * (lo + up);
      if (xm > 0.0 && xm < alpha && horner(c, xm) <= 1e-14 * scale) {
        std::ostringstream os;
        os << "polynomial weight vanishes or turns negative near x = " << xm;
        throw InvalidInput(os.str());
      }
    }
    prev_x = x;
    prev_d = dx;
  }
}

}  // namespace

WeightSpec::WeightSpec(WeightForm form, double alpha) : form_(std::move(form)), alpha_(alpha) {
  if (!(alpha_ > 0.0)) throw InvalidInput("weight domain length alpha must be positive");
  std::visit(Overloaded{
                 [](const weight::Power& p) {
                   if (!(p.gamma > 0.0)) throw InvalidInput("power weight needs gamma > 0");
                   if (!(p.scale > 0.0)) throw InvalidInput("power weight needs a positive scale");
                 },
                 [this](const weight::Polynomial& p) {
                   if (p.coefficients.empty()) throw InvalidInput("polynomial weight needs coefficients");
                   check_polynomial_minima(p.coefficients, alpha_);
                 },
                 [this](const weight::Tabulated& t) {
                   const auto& n = t.nodes;
                   if (n.size() < 2) throw InvalidInput("tabulated weight needs at least two nodes");
                   if (n.front().first != 0.0) throw InvalidInput("tabulated weight must start at x = 0");
                   for (std::size_t i = 1; i < n.size(); ++i) {
                     if (!(n[i].first > n[i - 1].first)) {
                       throw InvalidInput("tabulated weight nodes must have strictly increasing x");
                     }
                   }
                   if (bounded() && n.back().first < alpha_) {
                     throw InvalidInput("tabulated weight nodes must cover [0, alpha]");
                   }
                   for (const auto& [x, f] : n) {
                     bool endpoint = x == 0.0 || (bounded() && x >= alpha_);
                     if (f < 0.0 || (!endpoint && f == 0.0) || !std::isfinite(f)) {
                       throw InvalidInput("tabulated weight values must be positive inside the domain");
                     }
                   }
                 },
                 [](const weight::Custom& c) {
                   if (!c.eval) throw InvalidInput("custom weight needs an evaluator");
                 },
             },
             form_);
  check_positive_inside(*this);
}

WeightSpec WeightSpec::power(double gamma, double alpha, double scale) {
  return WeightSpec(weight::Power{gamma, scale}, alpha);
}

WeightSpec WeightSpec::polynomial(std::vector<double> coefficients, double alpha) {
  return WeightSpec(weight::Polynomial{std::move(coefficients)}, alpha);
}

WeightSpec WeightSpec::constant(double value, double alpha) { return polynomial({value}, alpha); }

WeightSpec WeightSpec::tabulated(std::vector<std::pair<double, double>> nodes, double alpha) {
  return WeightSpec(weight::Tabulated{std::move(nodes)}, alpha);
}

WeightSpec WeightSpec::custom(std::string name, std::function<double(double)> eval, double alpha) {
  return WeightSpec(weight::Custom{std::move(name), std::move(eval)}, alpha);
}

WeightSpec WeightSpec::expression(const std::string& text, double alpha) {
  Expression e(text, {"x"});
  return WeightSpec(weight::Custom{text, [e](double x) { return e(x); }, true}, alpha);
}

double WeightSpec::clamp_to_domain(double x) const {
  double slack = 1e-12 * std::max(1.0, bounded() ? alpha_ : 1.0);
  if (x < 0.0) {
    if (x < -slack) throw DomainError("weight evaluated at " + std::to_string(x) + " < 0");
    return 0.0;
  }
  if (bounded() && x > alpha_) {
    if (x > alpha_ + slack) {
      throw DomainError("weight evaluated at " + std::to_string(x) + " > alpha = " + std::to_string(alpha_));
    }
    return alpha_;
  }
  return x;
}

double WeightSpec::operator()(double x) const {
  if (std::isnan(x)) throw DomainError("weight evaluated at NaN");
  x = clamp_to_domain(x);
  return std::visit(Overloaded{
                        [x](const weight::Power& p) { return x == 0.0 ? 0.0 : p.scale * std::pow(x, p.gamma); },
                        [x](const weight::Polynomial& p) { return horner(p.coefficients, x); },
                        [x](const weight::Tabulated& t) { return interpolate(t.nodes, x); },
                        [x](const weight::Custom& c) { return c.eval(x); },
                    },
                    form_);
}

bool WeightSpec::has_exact_evaluation() const { return !std::holds_alternative<weight::Custom>(form_); }

bool WeightSpec::is_constant() const {
  if (const auto* p = std::get_if<weight::Power>(&form_)) return p->gamma == 0.0;
  if (const auto* p = std::get_if<weight::Polynomial>(&form_)) {
    return std::all_of(p->coefficients.begin() + 1, p->coefficients.end(), [](double c) { return c == 0.0; });
  }
  if (const auto* t = std::get_if<weight::Tabulated>(&form_)) {
    return std::all_of(t->nodes.begin(), t->nodes.end(), [&](const auto& n) { return n.second == t->nodes[0].second; });
  }
  return false;
}

Enclosure WeightSpec::enclose(const Rational& x) const {
  if (x < 0 || (bounded() && x > to_rational(alpha_))) {
    throw DomainError("weight evaluated outside [0, alpha] at " + to_string(x));
  }
  return std::visit(
      Overloaded{
          [&](const weight::Power& p) { return power_enclosure(x, p.gamma, to_rational(p.scale)); },
          [&](const weight::Polynomial& p) {
            Rational r(0);
            for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) r = r * x + to_rational(*it);
            return Enclosure::point(r);
          },
          [&](const weight::Tabulated& t) {
            const auto& n = t.nodes;
            if (x >= to_rational(n.back().first)) return Enclosure::point(to_rational(n.back().second));
            std::size_t i = 1;
            while (to_rational(n[i].first) <= x) ++i;
            Rational x0 = to_rational(n[i - 1].first), x1 = to_rational(n[i].first);
            Rational f0 = to_rational(n[i - 1].second), f1 = to_rational(n[i].second);
            Rational v = f0 + (x - x0) / (x1 - x0) * (f1 - f0);
            return Enclosure::point(v);
          },
          [&](const weight::Custom& c) -> Enclosure {
            throw DomainError("custom weight '" + c.name + "' has no exact evaluation");
          },
      },
      form_);
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const weight::Power& p) {
                   os << "power(gamma=" << p.gamma;
                   if (p.scale != 1.0) os << ", scale=" << p.scale;
                   os << ")";
                 },
                 [&](const weight::Polynomial& p) {
                   os << "polynomial(";
                   for (std::size_t i = 0; i < p.coefficients.size(); ++i) os << (i ? "," : "") << p.coefficients[i];
                   os << ")";
                 },
                 [&](const weight::Tabulated& t) { os << "tabulated(" << t.nodes.size() << " nodes)"; },
                 [&](const weight::Custom& c) { os << "custom(" << c.name << ")"; },
             },
             form_);
  os << " on (0," << (bounded() ? std::to_string(alpha_) : std::string("inf")) << ")";
  return os.str();
}

std::vector<double> weight_kinks(const WeightSpec& w, double a, double b) {
  std::vector<double> out;
  if (const auto* t = std::get_if<weight::Tabulated>(&w.form())) {
    for (const auto& node : t->nodes) {
      if (node.first > a && node.first < b) out.push_back(node.first);
    }
  }
  return out;
}

namespace {

std::vector<double> polynomial_power(const std::vector<double>& c, int p) {
  std::vector<double> result{1.0};
  for (int k = 0; k < p; ++k) {
    std::vector<double> next(result.size() + c.size() - 1, 0.0);
    for (std::size_t i = 0; i < result.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) next[i + j] += result[i] * c[j];
    }
    result = std::move(next);
  }
  return result;
}

double antiderivative(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k] / static_cast<double>(k + 1);
  return r * x;
}

// Integral of (f0 + (f1 - f0) (x - x0) / (x1 - x0))^p over [x0, x1].
double linear_power_integral(double x0, double f0, double x1, double f1, double p) {
  double dx = x1 - x0;
  if (dx <= 0.0) return 0.0;
  double df = f1 - f0;
  if (std::abs(df) <= 1e-12 * std::max(std::abs(f0), std::abs(f1))) return dx * std::pow(0.5 * (f0 + f1), p);
  return dx * (std::pow(f1, p + 1.0) - std::pow(f0, p + 1.0)) / (df * (p + 1.0));
}

}  // namespace

double integrate_weight_power(const WeightSpec& w, double p, double a, double b) {
  if (b < a) return -integrate_weight_power(w, p, b, a);
  if (a == b) return 0.0;
  w(a);
  w(b);
  if (const auto* pw = std::get_if<weight::Power>(&w.form())) {
    double e = pw->gamma * p + 1.0;
    return std::pow(pw->scale, p) * (std::pow(b, e) - std::pow(a, e)) / e;
  }
  if (const auto* poly = std::get_if<weight::Polynomial>(&w.form())) {
    double rounded = std::round(p);
    if (rounded == p && p >= 0.0 && p <= 16.0) {
      auto c = polynomial_power(poly->coefficients, static_cast<int>(rounded));
      return antiderivative(c, b) - antiderivative(c, a);
    }
  }
  if (std::holds_alternative<weight::Tabulated>(w.form())) {
    std::vector<double> cuts{a};
    for (double k : weight_kinks(w, a, b)) cuts.push_back(k);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += linear_power_integral(cuts[i], w(cuts[i]), cuts[i + 1], w(cuts[i + 1]), p);
    }
    return total;
  }
  return integrate_adaptive([&](double x) { return std::pow(w(x), p); }, a, b).value;
}

void ConditionReport::record(double margin, std::vector<double> tuple) {
  ++tuples_tested;
  if (margin < worst_margin) {
    worst_margin = margin;
    witness = std::move(tuple);
  }
}

void ConditionReport::finish(double tolerance) { passed = worst_margin >= -tolerance; }

std::vector<double> condition_grid(const WeightSpec& w, const ConditionOptions& options) {
  if (options.grid_count < 2) throw InvalidInput("condition grid needs at least two nodes");
  double length = w.bounded() ? w.alpha() : options.window;
  std::vector<double> grid(options.grid_count);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = length * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  grid.back() = length;
  return grid;
}

namespace {

std::string window_note(const WeightSpec& w, const ConditionOptions& options) {
  if (w.bounded()) return {};
  std::ostringstream os;
  os << "unbounded domain: tested on the window [0, " << options.window << "] only";
  return os.str();
}

}  // namespace

ConditionReport check_pair_condition(const WeightSpec& w, const ConditionOptions& options) {
  auto grid = condition_grid(w, options);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = w(grid[i]);
  ConditionReport report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      double margin = f[i] + f[j] - w(grid[j] - grid[i]);
      report.record(margin, {grid[i], grid[j]});
    }
  }
  report.finish(options.tolerance);
  report.note = window_note(w, options);
  return report;
}

ConditionReport check_symmetry(const WeightSpec& w, const ConditionOptions& options) {
  if (!w.bounded()) throw DomainError("symmetry condition needs a bounded domain");
  ConditionReport report;
  for (double x : condition_grid(w, options)) {
    report.record(-std::abs(w(x) - w(w.alpha() - x)), {x});
  }
  report.finish(options.tolerance);
  return report;
}

ConditionReport check_alternating_sum(const WeightSpec& w, std::span<const double> points, double tolerance) {
  if (points.empty()) throw InvalidInput("alternating sum needs at least one point");
  if (!std::is_sorted(points.begin(), points.end())) throw InvalidInput("alternating sum needs nondecreasing points");
  double sum = 0.0, rhs = 0.0;
  std::size_t n = points.size();
  for (std::size_t k = 0; k < n; ++k) {
    sum += ((n - 1 - k) % 2 == 0 ? 1.0 : -1.0) * points[k];
    rhs += w(points[k]);
  }
  if (sum < 0.0 || (w.bounded() && sum > w.alpha() * (1 + 1e-15))) {
    throw DomainError("alternating sum lies outside [0, alpha]");
  }
  ConditionReport report;
  report.record(rhs - w(sum), std::vector<double>(points.begin(), points.end()));
  report.finish(tolerance);
  return report;
}

ConditionReport check_alternating_sum(const WeightSpec& w, std::span<const Rational> points) {
  if (points.empty()) throw InvalidInput("alternating sum needs at least one point");
  if (!std::is_sorted(points.begin(), points.end())) throw InvalidInput("alternating sum needs nondecreasing points");
  Rational sum(0);
  Enclosure rhs = Enclosure::point(Rational(0));
  std::size_t n = points.size();
  for (std::size_t k = 0; k < n; ++k) {
    if ((n - 1 - k) % 2 == 0) {
      sum += points[k];
    } else {
      sum -= points[k];
    }
    rhs = rhs + w.enclose(points[k]);
  }
  if (sum < 0 || (w.bounded() && sum > to_rational(w.alpha()))) {
    throw DomainError("alternating sum lies outside [0, alpha]");
  }
  Enclosure margin = rhs - w.enclose(sum);
  ConditionReport report;
  std::vector<double> tuple;
  for (const auto& p : points) tuple.push_back(to_double(p));
  report.record(margin.mid(), tuple);
  if (margin.lo >= 0) {
    report.passed = true;
    report.exact = true;
  } else if (margin.hi < 0) {
    report.passed = false;
    report.exact = true;
  } else {
    report.finish(1e-12);
    report.note = "enclosure straddles zero; decided with tolerance 1e-12";
  }
  return report;
}

ConditionReport check_concave_symmetric_sufficiency(const WeightSpec& w, const ConditionOptions& options) {
  if (!w.bounded()) throw DomainError("concave-symmetric sufficiency needs a bounded domain");
  auto grid = condition_grid(w, options);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = w(grid[i]);

  ConditionReport concavity;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    concavity.record(f[i] - 0.5 * (f[i - 1] + f[i + 1]), {grid[i - 1], grid[i], grid[i + 1]});
  }
  concavity.finish(options.tolerance);
  if (!concavity.passed) {
    concavity.note = "sufficiency not applicable: midpoint concavity test failed";
    return concavity;
  }
  ConditionReport symmetry = check_symmetry(w, options);
  if (!symmetry.passed) {
    symmetry.note = "sufficiency not applicable: symmetry test failed";
    return symmetry;
  }

  ConditionReport strong;
  double f0 = f.front();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      strong.record(f[i] + f[j] - f0 - w(grid[j] - grid[i]), {grid[i], grid[j]});
    }
  }
  strong.finish(options.tolerance);
  strong.note = "concave and symmetric: checked f(0) + f(x2 - x1) <= f(x1) + f(x2)";
  return strong;
}

std::optional<std::pair<double, double>> find_condition_violation(const WeightSpec& w,
                                                                  const ConditionOptions& options) {
  auto report = check_pair_condition(w, options);
  if (report.passed) return std::nullopt;
  return std::pair{report.witness[0], report.witness[1]};
}

ConditionReport check_weight_conditions(const WeightSpec& w, const ConditionOptions& options) {
  auto pair = check_pair_condition(w, options);
  if (!pair.passed || !w.bounded()) return pair;
  return check_symmetry(w, options);
}

void require_weight_conditions(const WeightSpec& w, const ConditionOptions& options) {
  auto report = check_weight_conditions(w, options);
  if (!report.passed) {
    std::ostringstream os;
    os << "weight " << w.describe() << " violates the rearrangement conditions (margin " << report.worst_margin
       << ")";
    throw WeightConditionError(os.str(), std::move(report));
  }
}

}  // namespace rearr
