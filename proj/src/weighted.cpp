#include "rearr/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rearr/error.hpp"
#include "rearr/parallel.hpp"
#include "rearr/quadrature.hpp"

namespace rearr {

// ---------------------------------------------------------------------------
// Profile

struct WeightProfile::State {
  enum class Kind { Power, Polynomial, Tabulated, Expression, Table };

  WeightSpec w;
  Kind kind = Kind::Table;
  double alpha1 = kInfinity;
  double alpha = kInfinity;

  double gamma = 1.0, scale = 1.0;           // Power
  std::vector<double> primitive;             // Polynomial: coefficients of W, ascending from y^0
  std::vector<double> node_x, node_W;        // Tabulated cumulative values at nodes
  std::optional<Expression> W_expr;          // user-supplied primitive
  std::vector<double> table_y, table_W;      // cumulative quadrature table
  double table_error = 0.0;

  explicit State(WeightSpec weight) : w(std::move(weight)), alpha1(w.alpha()) {}

  double W(double y) const {
    if (y <= 0.0) {
      if (y < -1e-12 * std::max(1.0, std::abs(alpha1 == kInfinity ? 1.0 : alpha1))) {
        throw DomainError("W evaluated at negative y");
      }
      return 0.0;
    }
    if (alpha1 < kInfinity && y > alpha1) {
      if (y > alpha1 * (1.0 + 1e-12)) throw DomainError("W evaluated beyond alpha1");
      y = alpha1;
    }
    switch (kind) {
      case Kind::Power:
        return scale * std::pow(y, gamma + 1.0) / (gamma + 1.0);
      case Kind::Polynomial: {
        double r = 0.0;
        for (std::size_t k = primitive.size(); k-- > 0;) r = r * y + primitive[k];
        return r;
      }
      case Kind::Tabulated: {
        if (y >= node_x.back()) return node_W.back() + w(node_x.back()) * (y - node_x.back());
        auto it = std::upper_bound(node_x.begin(), node_x.end(), y);
        std::size_t i = static_cast<std::size_t>(it - node_x.begin()) - 1;
        return node_W[i] + 0.5 * (y - node_x[i]) * (w(node_x[i]) + w(y));
      }
      case Kind::Expression:
        return (*W_expr)(y);
      case Kind::Table: {
        if (y > table_y.back()) {
          throw DomainError("W evaluated beyond the cumulative table extent " + std::to_string(table_y.back()));
        }
        auto it = std::upper_bound(table_y.begin(), table_y.end(), y);
        std::size_t i = std::min(static_cast<std::size_t>(it - table_y.begin()), table_y.size() - 1) - 1;
        if (y == table_y[i]) return table_W[i];
        return table_W[i] + gauss_legendre([this](double t) { return w(t); }, table_y[i], y, 10);
      }
    }
    return 0.0;
  }

  double W_inverse(double z) const {
    if (z <= 0.0) return 0.0;
    if (alpha < kInfinity && z >= alpha) {
      if (z > alpha * (1.0 + 1e-9) + 1e-12) throw DomainError("W^-1 evaluated beyond alpha");
      return alpha1;
    }
    if (kind == Kind::Power) return std::pow((gamma + 1.0) * z / scale, 1.0 / (gamma + 1.0));
    if (kind == Kind::Polynomial && primitive.size() == 2) return z / primitive[1];
    double lo = 0.0, hi;
    if (alpha1 < kInfinity) {
      hi = alpha1;
    } else {
      hi = 1.0;
      double cap = kind == Kind::Table ? table_y.back() : kInfinity;
      while (W(std::min(hi, cap)) < z) {
        if (hi >= cap) throw DomainError("W^-1 argument exceeds the cumulative table");
        hi *= 2.0;
      }
      hi = std::min(hi, cap);
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++iter) {
      double mid = 0.5 * (lo + hi);
      if (W(mid) < z) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

namespace {

bool is_monomial(const std::vector<double>& c, std::size_t& degree) {
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] != 0.0) {
      ++nonzero;
      degree = k;
    }
  }
  return nonzero == 1;
}

WeightSpec induced_power(double gamma, double scale, double alpha) {
  double g1 = gamma + 1.0;
  return WeightSpec::power(gamma / g1, alpha, std::pow(scale, 1.0 / g1) * std::pow(g1, gamma / g1));
}

}  // namespace

WeightProfile::WeightProfile(WeightSpec w, ProfileOptions options) : w_(w) {
  auto st = std::make_shared<State>(std::move(w));
  using Kind = State::Kind;
  const auto& form = st->w.form();
  bool diverges = true;  // lim W at infinity is infinite

  if (options.closed_form_W) {
    st->kind = Kind::Expression;
    st->W_expr.emplace(*options.closed_form_W, std::vector<std::string>{"y"});
    diverges = false;
  } else if (const auto* p = std::get_if<weight::Power>(&form)) {
    st->kind = Kind::Power;
    st->gamma = p->gamma;
    st->scale = p->scale;
  } else if (const auto* poly = std::get_if<weight::Polynomial>(&form)) {
    st->kind = Kind::Polynomial;
    st->primitive.assign(poly->coefficients.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly->coefficients.size(); ++k) {
      st->primitive[k + 1] = poly->coefficients[k] / static_cast<double>(k + 1);
    }
    std::size_t degree = 0;
    if (is_monomial(poly->coefficients, degree) && degree > 0) {
      st->kind = Kind::Power;
      st->gamma = static_cast<double>(degree);
      st->scale = poly->coefficients[degree];
    }
  } else if (const auto* tab = std::get_if<weight::Tabulated>(&form)) {
    st->kind = Kind::Tabulated;
    st->node_x.push_back(tab->nodes.front().first);
    st->node_W.push_back(0.0);
    for (std::size_t i = 1; i < tab->nodes.size(); ++i) {
      const auto& [x0, f0] = tab->nodes[i - 1];
      const auto& [x1, f1] = tab->nodes[i];
      st->node_x.push_back(x1);
      st->node_W.push_back(st->node_W.back() + 0.5 * (x1 - x0) * (f0 + f1));
    }
    diverges = tab->nodes.back().second > 0.0;
  } else {
    st->kind = Kind::Table;
    double extent = st->alpha1 < kInfinity ? st->alpha1 : options.table_extent;
    if (!(extent > 0.0) || options.table_nodes < 2) throw InvalidInput("cumulative table needs a positive extent");
    int n = options.table_nodes;
    st->table_y.resize(n + 1);
    st->table_W.assign(n + 1, 0.0);
    QuadratureOptions quad{1e-13, 1e-16, 30};
    for (int k = 0; k <= n; ++k) st->table_y[k] = k == n ? extent : extent * k / n;
    for (int k = 0; k < n; ++k) {
      auto r = integrate_simpson([&](double t) { return st->w(t); }, st->table_y[k], st->table_y[k + 1], quad);
      st->table_W[k + 1] = st->table_W[k] + r.value;
      st->table_error += r.error;
    }
    diverges = false;
  }

  if (st->alpha1 < kInfinity) {
    st->alpha = st->W(st->alpha1);
  } else if (diverges) {
    st->alpha = kInfinity;
  } else {
    st->alpha = options.alpha.value_or(kInfinity);
  }
  if (options.alpha) {
    double declared = *options.alpha;
    bool consistent = declared == st->alpha ||
                      (std::isfinite(declared) && std::isfinite(st->alpha) &&
                       std::abs(declared - st->alpha) <= 1e-9 * std::max(1.0, std::abs(declared)));
    if (!consistent) {
      std::ostringstream os;
      os << "declared alpha = " << declared << " but the primitive of w tends to " << st->alpha;
      throw InvalidInput(os.str());
    }
  }
  if (!(st->alpha > 0.0)) throw InvalidInput("primitive of w must be positive");
  alpha_ = st->alpha;
  state_ = st;

  std::optional<WeightSpec> f;
  if (st->kind == Kind::Power) {
    f = induced_power(st->gamma, st->scale, alpha_);
  } else if (const auto* poly = std::get_if<weight::Polynomial>(&form);
             poly && !options.closed_form_W && poly->coefficients.size() >= 1 &&
             std::all_of(poly->coefficients.begin() + 1, poly->coefficients.end(), [](double c) { return c == 0.0; })) {
    f = WeightSpec::constant(poly->coefficients[0], alpha_);
  } else {
    std::shared_ptr<const State> shared = st;
    f = WeightSpec::custom(
        "w(W^-1(z)) for w = " + st->w.describe(), [shared](double z) { return shared->w(shared->W_inverse(z)); },
        alpha_);
  }
  if (options.enforce_conditions) require_weight_conditions(*f, options.conditions);
  induced_ = std::make_shared<const WeightSpec>(std::move(*f));
}

double WeightProfile::W(double y) const { return state_->W(y); }
double WeightProfile::W_inverse(double z) const { return state_->W_inverse(z); }

bool WeightProfile::closed_form() const { return state_->kind != State::Kind::Table; }
double WeightProfile::table_error() const { return state_->table_error; }

WeightSpec induced_weight(const WeightSpec& w, const ProfileOptions& options) {
  return WeightProfile(w, options).induced();
}

// ---------------------------------------------------------------------------
// Columns

namespace {

// Sum of W over maximal runs of the per-segment sub-intervals returned by `part`.
template <class Part>
double w_measure_of(const PiecewiseLinear1D& v, const WeightProfile& P, Part part) {
  const auto& pts = v.points();
  double total = 0.0;
  double open_s = 0.0, open_t = -1.0;
  bool open = false;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto [s, t] = part(pts[i].first, pts[i].second, pts[i + 1].first, pts[i + 1].second);
    if (!(t > s)) continue;
    if (open && s == open_t) {
      open_t = t;
      continue;
    }
    if (open) total += P.W(open_t) - P.W(open_s);
    open = true;
    open_s = s;
    open_t = t;
  }
  if (open) total += P.W(open_t) - P.W(open_s);
  return total;
}

// Sub-interval of [xa, xb] on which the linear function from a to b lies in (lo, hi).
std::pair<double, double> linear_band(double xa, double a, double xb, double b, double lo, double hi) {
  if (a == b) return (a > lo && a < hi) ? std::pair{xa, xb} : std::pair{xa, xa};
  auto at = [&](double c) {
    if (c == a) return xa;
    if (c == b) return xb;
    return xa + (c - a) / (b - a) * (xb - xa);
  };
  double s, t;
  if (b > a) {
    s = lo <= a ? xa : (lo >= b ? xb : at(lo));
    t = hi >= b ? xb : (hi <= a ? xa : at(hi));
  } else {
    s = hi >= a ? xa : (hi <= b ? xb : at(hi));
    t = lo <= b ? xb : (lo >= a ? xa : at(lo));
  }
  return {s, std::max(s, t)};
}

}  // namespace

double w_distribution(const PiecewiseLinear1D& v, const WeightProfile& P, double c) {
  return w_measure_of(v, P, [c](double xa, double a, double xb, double b) {
    return linear_band(xa, a, xb, b, c, kInfinity);
  });
}

double w_measure_between(const PiecewiseLinear1D& v, const WeightProfile& P, double a, double b) {
  if (!(a < b)) return 0.0;
  return w_measure_of(v, P, [a, b](double xa, double ua, double xb, double ub) {
    return linear_band(xa, ua, xb, ub, a, b);
  });
}

namespace {

double plateau_w_measure(const PiecewiseLinear1D& v, const WeightProfile& P, double c) {
  double total = 0.0;
  const auto& pts = v.points();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].second == c && pts[i + 1].second == c) total += P.W(pts[i + 1].first) - P.W(pts[i].first);
  }
  return total;
}

struct ColumnRearranger {
  const PiecewiseLinear1D& v;
  const WeightProfile& P;
  const WRearrangeOptions& opt;
  std::vector<PiecewiseLinear1D::Point> out;

  // Level c in (lo, hi) with w_distribution(c) = W(y), where the nodes (ya, hi) and
  // (yb, lo) bracket y. Illinois iteration on g(c) = w_distribution(c) - W(y).
  double solve(double y, double ya, double hi, double yb, double lo) const {
    double target = P.W(y);
    double g_hi = P.W(ya) - target;  // <= 0, left limit at the upper node
    double g_lo = P.W(yb) - target;  // >= 0
    int side = 0;
    for (int iter = 0; iter < 100 && hi - lo > 4e-16 * std::max(1.0, hi); ++iter) {
      double c = lo + g_lo / (g_lo - g_hi) * (hi - lo);
      if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
      double g = w_distribution(v, P, c) - target;
      if (g == 0.0) return c;
      if (g > 0.0) {
        lo = c;
        g_lo = g;
        if (side == -1) g_hi *= 0.5;
        side = -1;
      } else {
        hi = c;
        g_hi = g;
        if (side == 1) g_lo *= 0.5;
        side = 1;
      }
    }
    return 0.5 * (lo + hi);
  }

  void refine(double ya, double ca, double yb, double cb, int depth) {
    double ym = 0.5 * (ya + yb);
    if (!(ym > ya && ym < yb)) return;
    double cm = solve(ym, ya, ca, yb, cb);
    double linear = 0.5 * (ca + cb);
    // A value error e shifts level sets by about e |dy/dc|, which costs w(ym) e |dy/dc| in w-measure.
    double err = std::abs(cm - linear);
    double measure_err = err * P.w()(ym) * (yb - ya) / (ca - cb);
    bool resolved = err <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ca);
    bool fine = (err <= opt.value_tolerance && measure_err <= opt.measure_tolerance) || resolved ||
                depth >= opt.max_depth;
    if (!fine) refine(ya, ca, ym, cm, depth + 1);
    out.emplace_back(ym, cm);
    if (!fine) refine(ym, cm, yb, cb, depth + 1);
  }
};

}  // namespace

PiecewiseLinear1D w_rearrange_column(const PiecewiseLinear1D& v, const WeightProfile& P,
                                     const WRearrangeOptions& options) {
  if (v.alpha().value_or(kInfinity) != P.alpha1()) throw InvalidInput("column and profile have different domains");
  if (v.is_zero()) return PiecewiseLinear1D({}, v.alpha());
  if (v.is_nonincreasing()) return v;
  if (P.w().is_constant()) return rearrange(v);

  std::vector<double> levels;
  for (const auto& p : v.points()) {
    if (p.second > 0.0) levels.push_back(p.second);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  // Exact nodes (h(c), c) with W(h(c)) the w-measure of {v > c}, plus plateau ends.
  std::vector<PiecewiseLinear1D::Point> nodes;
  double alpha1 = P.alpha1();
  auto push = [&](double y, double c) {
    if (!nodes.empty() && !(y > nodes.back().first)) {
      if (y >= alpha1 || nodes.back().first >= alpha1) return;
      if (c == nodes.back().second) return;
      throw InvalidInput("weighted rearrangement produced coincident nodes at y = " + std::to_string(y));
    }
    nodes.emplace_back(y, c);
  };
  push(0.0, levels.back());
  for (std::size_t k = levels.size(); k-- > 0;) {
    double level = levels[k];
    double mu = w_distribution(v, P, level);
    if (k + 1 < levels.size()) push(P.W_inverse(mu), level);
    double flat = plateau_w_measure(v, P, level);
    if (flat > 0.0) push(P.W_inverse(mu + flat), level);
  }
  push(P.W_inverse(w_distribution(v, P, 0.0)), 0.0);

  ColumnRearranger r{v, P, options, {}};
  r.out.push_back(nodes.front());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const auto& [ya, ca] = nodes[i];
    const auto& [yb, cb] = nodes[i + 1];
    if (ca > cb) r.refine(ya, ca, yb, cb, 0);
    r.out.push_back(nodes[i + 1]);
  }
  if (alpha1 < kInfinity && r.out.back().first > alpha1) r.out.back().first = alpha1;
  if (alpha1 == kInfinity || r.out.back().first < alpha1) r.out.back().second = 0.0;
  return PiecewiseLinear1D(std::move(r.out), v.alpha());
}

ColumnFunction w_rearrange(const ColumnFunction& v, const WeightProfile& P, const WRearrangeOptions& options) {
  if (v.domain().alpha != P.alpha1()) throw InvalidInput("cylinder height differs from the profile domain");
  std::vector<PiecewiseLinear1D> cols(v.columns().size());
  parallel_for(cols.size(), [&](std::size_t i) { cols[i] = w_rearrange_column(v.column(i), P, options); });
  auto domain = v.domain();
  for (const auto& c : cols) domain.support_bound = std::max(domain.support_bound, c.support_bound());
  return ColumnFunction(domain, std::move(cols));
}

ConditionReport verify_slice_preservation(const ColumnFunction& v, const ColumnFunction& tv, const WeightProfile& P,
                                          std::span<const std::pair<double, double>> levels, double tolerance) {
  if (v.columns().size() != tv.columns().size()) throw InvalidInput("functions have different column counts");
  ConditionReport report;
  for (std::size_t i = 0; i < v.columns().size(); ++i) {
    for (const auto& [a, b] : levels) {
      if (!(0.0 < a && a < b)) throw InvalidInput("slice levels need 0 < a < b");
      double lhs = w_measure_between(v.column(i), P, a, b);
      double rhs = w_measure_between(tv.column(i), P, a, b);
      report.record(-std::abs(lhs - rhs), {static_cast<double>(i), a, b});
    }
  }
  report.finish(tolerance);
  return report;
}

// ---------------------------------------------------------------------------
// Functionals and norms

CylinderIntegral weighted_functional(const ColumnFunction& v, const WeightProfile& P, const IntegrandND& G,
                                     const QuadratureOptions& quad) {
  if (v.domain().alpha != P.alpha1()) throw InvalidInput("cylinder height differs from the profile domain");
  const WeightSpec& w = P.w();
  return integrate_over_cylinder(
      v, [&](const ColumnPoint& p) { return G(p.grad_prime, std::abs(p.uy), p.value, p.xprime) * w(p.y); }, quad);
}

double weighted_norm(const ColumnFunction& v, const WeightProfile& P, double p, const QuadratureOptions& quad) {
  if (!(p >= 1.0)) throw InvalidInput("weighted norm needs p >= 1");
  const WeightSpec& w = P.w();
  double I = integrate_over_cylinder(v, [&](const ColumnPoint& pt) { return std::pow(std::abs(pt.value), p) * w(pt.y); },
                                     quad)
                 .value;
  return std::pow(I, 1.0 / p);
}

double weighted_gradient_norm(const ColumnFunction& v, const WeightProfile& P, double p,
                              const QuadratureOptions& quad) {
  if (!(p >= 1.0)) throw InvalidInput("weighted norm needs p >= 1");
  auto I = weighted_functional(v, P, IntegrandND::euclidean_power(p), quad).value;
  return std::pow(I, 1.0 / p);
}

double sobolev_seminorm(const ColumnFunction& v, const WeightProfile& P, double p, const QuadratureOptions& quad) {
  return weighted_gradient_norm(v, P, p, quad) + weighted_norm(v, P, p, quad);
}

namespace {

RefinementReport weighted_ladder(const ColumnSource& source, const WeightProfile& P,
                                 const std::function<double(const ColumnFunction&)>& value,
                                 const WeightedRefinementOptions& options) {
  const auto& ro = options.refinement;
  if (ro.refinements.empty()) throw InvalidInput("refinement ladder is empty");
  for (std::size_t k = 1; k < ro.refinements.size(); ++k) {
    if (ro.refinements[k] <= ro.refinements[k - 1]) throw InvalidInput("refinement levels must be strictly increasing");
  }
  std::vector<LevelReport> levels;
  double lip = 0.0, omega = 0.0;
  int dim = 2;
  for (int nodes : ro.refinements) {
    ColumnFunction v = source(nodes);
    ColumnFunction tv = w_rearrange(v, P, options.rearrange);
    LevelReport lv;
    lv.nodes = nodes;
    lv.h = v.domain().spacing(0);
    lv.lhs = value(v);
    lv.rhs = value(tv);
    lip = std::max(lip, v.lipschitz());
    omega = v.domain().xprime_measure() * v.domain().y_extent();
    dim = v.domain().dimension();
    levels.push_back(lv);
  }
  return assess_refinement(std::move(levels), (dim - 1) * lip * lip * omega, ro);
}

}  // namespace

RefinementReport verify_weighted_dirichlet(const ColumnSource& source, const WeightProfile& P, const IntegrandND& G,
                                           const WeightedRefinementOptions& options) {
  if (!G.flags().convex_in_z || !G.flags().nondecreasing_in_zN) {
    throw InvalidInput("weighted inequality needs G convex in z and nondecreasing in zN");
  }
  auto quad = options.refinement.cylinder.quadrature;
  return weighted_ladder(
      source, P, [&](const ColumnFunction& v) { return weighted_functional(v, P, G, quad).value; }, options);
}

RefinementReport verify_norm_inequality(const ColumnSource& source, const WeightProfile& P, double p,
                                        const WeightedRefinementOptions& options) {
  auto quad = options.refinement.cylinder.quadrature;
  return weighted_ladder(
      source, P, [&](const ColumnFunction& v) { return weighted_gradient_norm(v, P, p, quad); }, options);
}

// ---------------------------------------------------------------------------
// Sets

double w_measure(const IntervalUnion& s, const WeightProfile& P) {
  double total = 0.0;
  for (std::size_t j = 0; j < s.interval_count(); ++j) {
    auto [a, b] = s.interval(j);
    total += P.W(to_double(b)) - P.W(to_double(a));
  }
  return total;
}

namespace {

IntervalUnion intersect(const IntervalUnion& A, const IntervalUnion& B) {
  std::vector<std::pair<Rational, Rational>> out;
  std::size_t i = 0, j = 0;
  while (i < A.interval_count() && j < B.interval_count()) {
    auto [a0, a1] = A.interval(i);
    auto [b0, b1] = B.interval(j);
    Rational lo = a0 > b0 ? a0 : b0;
    Rational hi = a1 < b1 ? a1 : b1;
    if (lo < hi) out.emplace_back(lo, hi);
    if (a1 < b1) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalUnion(std::move(out), A.alpha());
}

double symmetric_difference_w(const IntervalUnion& A, const IntervalUnion& B, const WeightProfile& P) {
  return std::max(0.0, w_measure(A, P) + w_measure(B, P) - 2.0 * w_measure(intersect(A, B), P));
}

Extent<Rational> rational_extent(double alpha) {
  if (alpha == kInfinity) return std::nullopt;
  return to_rational(alpha);
}

std::size_t cells_per_axis(const CylinderDomain& d) { return static_cast<std::size_t>(d.resolution - 1); }

std::vector<std::size_t> cell_index(const CylinderDomain& d, std::size_t cell) {
  std::size_t n = cells_per_axis(d);
  std::vector<std::size_t> idx(d.lower.size());
  for (std::size_t k = idx.size(); k-- > 0;) {
    idx[k] = cell % n;
    cell /= n;
  }
  return idx;
}

void check_graph(const CylinderDomain& d, const std::vector<double>& g1, const std::vector<double>& g2) {
  if (g1.size() != d.column_count() || g2.size() != d.column_count()) {
    throw InvalidInput("graph set needs one (g1, g2) pair per grid node");
  }
  for (std::size_t i = 0; i < g1.size(); ++i) {
    if (!(0.0 <= g1[i] && g1[i] <= g2[i] && g2[i] <= d.alpha)) {
      throw InvalidInput("graph set needs 0 <= g1 <= g2 <= alpha1 at every node");
    }
  }
}

}  // namespace

WeightedSetND::WeightedSetND(CylinderDomain domain, Layout layout) : domain_(std::move(domain)), layout_(std::move(layout)) {
  domain_.validate();
  if (const auto* g = std::get_if<layout::Graph>(&layout_)) check_graph(domain_, g->g1, g->g2);
  if (const auto* g = std::get_if<layout::RearrangedGraph>(&layout_)) check_graph(domain_, g->g1, g->g2);
  if (const auto* c = std::get_if<layout::Cells>(&layout_)) {
    if (c->sections.size() != cell_count()) throw InvalidInput("cell set needs one section per grid cell");
    auto alpha = rational_extent(domain_.alpha);
    for (const auto& s : c->sections) {
      if (s.alpha() != alpha) throw InvalidInput("cell section lives on a different domain");
    }
  }
}

std::size_t WeightedSetND::cell_count() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < domain_.lower.size(); ++k) n *= cells_per_axis(domain_);
  return n;
}

bool WeightedSetND::is_subgraph() const {
  if (const auto* g = std::get_if<layout::Graph>(&layout_)) {
    return std::all_of(g->g1.begin(), g->g1.end(), [](double v) { return v == 0.0; });
  }
  if (std::holds_alternative<layout::RearrangedGraph>(layout_)) return true;
  const auto& c = std::get<layout::Cells>(layout_);
  return std::all_of(c.sections.begin(), c.sections.end(), [](const IntervalUnion& s) {
    return s.interval_count() == 0 || (s.interval_count() == 1 && s.endpoints().front() == 0);
  });
}

WeightedSetND w_rearrange_set(const WeightedSetND& m, const WeightProfile& P) {
  if (m.domain().alpha != P.alpha1()) throw InvalidInput("set and profile live on different domains");
  if (m.is_subgraph()) return m;
  if (const auto* g = std::get_if<layout::Graph>(&m.layout())) {
    return WeightedSetND(m.domain(), layout::RearrangedGraph{g->g1, g->g2});
  }
  const auto& c = std::get<layout::Cells>(m.layout());
  std::vector<IntervalUnion> out;
  out.reserve(c.sections.size());
  for (const auto& s : c.sections) {
    if (s.empty() || (s.interval_count() == 1 && s.endpoints().front() == 0)) {
      out.push_back(s);
      continue;
    }
    double h = P.W_inverse(w_measure(s, P));
    if (P.alpha1() < kInfinity) h = std::min(h, P.alpha1());
    out.push_back(IntervalUnion({{Rational(0), to_rational(h)}}, s.alpha()));
  }
  return WeightedSetND(m.domain(), layout::Cells{std::move(out)});
}

namespace {

// Root in (0, 1) of the linear function from fa to fb, if it changes sign.
void add_root(std::vector<double>& ts, double fa, double fb) {
  if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) ts.push_back(fa / (fa - fb));
}

struct GraphValues {
  double g1, g2;
  std::vector<double> d1, d2;  // gradients
};

double graph_density(const GraphValues& v, bool rearranged, const WeightProfile& P) {
  const WeightSpec& w = P.w();
  double alpha1 = P.alpha1();
  if (!(v.g2 > v.g1)) return 0.0;
  if (!rearranged) {
    double total = 0.0;
    if (v.g2 < alpha1) {
      double s = 1.0;
      for (double d : v.d2) s += d * d;
      total += w(v.g2) * std::sqrt(s);
    }
    if (v.g1 > 0.0) {
      double s = 1.0;
      for (double d : v.d1) s += d * d;
      total += w(v.g1) * std::sqrt(s);
    }
    return total;
  }
  double h = P.W_inverse(P.W(v.g2) - P.W(v.g1));
  if (h >= alpha1) return 0.0;
  double wh = w(h), w1 = w(v.g1), w2 = w(v.g2);
  double s = wh * wh;
  for (std::size_t k = 0; k < v.d1.size(); ++k) {
    double t = w2 * v.d2[k] - w1 * v.d1[k];
    s += t * t;
  }
  return std::sqrt(s);
}

double graph_perimeter(const CylinderDomain& d, const std::vector<double>& g1, const std::vector<double>& g2,
                       bool rearranged, const WeightProfile& P, const QuadratureOptions& quad) {
  std::size_t n = cells_per_axis(d);
  if (d.lower.size() == 1) {
    std::vector<double> parts(n, 0.0);
    double h = d.spacing(0);
    parallel_for(n, [&](std::size_t i) {
      double xa = d.node(i)[0], xb = d.node(i + 1)[0];
      double s1 = (g1[i + 1] - g1[i]) / h, s2 = (g2[i + 1] - g2[i]) / h;
      std::vector<double> ts{0.0, 1.0};
      add_root(ts, g2[i] - g1[i], g2[i + 1] - g1[i + 1]);
      if (d.alpha < kInfinity) add_root(ts, g2[i] - d.alpha, g2[i + 1] - d.alpha);
      std::sort(ts.begin(), ts.end());
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        double a = xa + ts[k] * (xb - xa), b = xa + ts[k + 1] * (xb - xa);
        if (!(b > a)) continue;
        auto f = [&](double x) {
          double t = (x - xa) / (xb - xa);
          GraphValues v{g1[i] + t * (g1[i + 1] - g1[i]), g2[i] + t * (g2[i + 1] - g2[i]), {s1}, {s2}};
          return graph_density(v, rearranged, P);
        };
        total += integrate_adaptive(f, a, b, quad).value;
      }
      parts[i] = total;
    });
    double sum = 0.0;
    for (double p : parts) sum += p;
    return sum;
  }
  // N = 3: two triangles per cell, g linear on each.
  std::size_t cells = n * n;
  std::vector<double> parts(cells, 0.0);
  parallel_for(cells, [&](std::size_t c) {
    auto idx = cell_index(d, c);
    int i = static_cast<int>(idx[0]), j = static_cast<int>(idx[1]);
    std::array<int, 2> c00{i, j}, c10{i + 1, j}, c11{i + 1, j + 1}, c01{i, j + 1};
    auto at = [&](const std::array<int, 2>& ix) { return d.flat_index(ix); };
    double total = 0.0;
    for (int tri = 0; tri < 2; ++tri) {
      std::array<std::array<int, 2>, 3> v = tri == 0 ? std::array{c00, c10, c11} : std::array{c00, c11, c01};
      std::array<std::array<double, 2>, 3> p;
      std::array<double, 3> a1, a2;
      for (int k = 0; k < 3; ++k) {
        auto node = d.node(at(v[k]));
        p[k] = {node[0], node[1]};
        a1[k] = g1[at(v[k])];
        a2[k] = g2[at(v[k])];
      }
      // Gradient of the linear interpolant on the triangle.
      double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
      auto grad = [&](const std::array<double, 3>& g) {
        double gx = ((g[1] - g[0]) * (p[2][1] - p[0][1]) - (g[2] - g[0]) * (p[1][1] - p[0][1])) / det;
        double gy = ((g[2] - g[0]) * (p[1][0] - p[0][0]) - (g[1] - g[0]) * (p[2][0] - p[0][0])) / det;
        return std::vector<double>{gx, gy};
      };
      auto d1 = grad(a1), d2 = grad(a2);
      auto f = [&](double x, double y) {
        double v1 = a1[0] + d1[0] * (x - p[0][0]) + d1[1] * (y - p[0][1]);
        double v2 = a2[0] + d2[0] * (x - p[0][0]) + d2[1] * (y - p[0][1]);
        return graph_density({std::max(0.0, v1), std::min(d.alpha, v2), d1, d2}, rearranged, P);
      };
      total += integrate_triangle(f, p[0], p[1], p[2], quad).value;
    }
    parts[c] = total;
  });
  double sum = 0.0;
  for (double p : parts) sum += p;
  return sum;
}

double cell_perimeter(const CylinderDomain& d, const std::vector<IntervalUnion>& sections, const WeightProfile& P) {
  std::size_t n = cells_per_axis(d);
  std::size_t dims = d.lower.size();
  double cell_measure = 1.0;
  for (std::size_t k = 0; k < dims; ++k) cell_measure *= d.spacing(k);
  const WeightSpec& w = P.w();
  double total = 0.0;
  for (std::size_t c = 0; c < sections.size(); ++c) {
    for (const auto& y : sections[c].interior_boundary()) total += w(to_double(y)) * cell_measure;
    auto idx = cell_index(d, c);
    for (std::size_t k = 0; k < dims; ++k) {
      if (idx[k] + 1 >= n) continue;
      auto next = idx;
      ++next[k];
      std::size_t other = 0;
      for (auto v : next) other = other * n + v;
      double face = cell_measure / d.spacing(k);
      total += symmetric_difference_w(sections[c], sections[other], P) * face;
    }
  }
  return total;
}

}  // namespace

double perimeter_w(const WeightedSetND& m, const WeightProfile& P, const QuadratureOptions& quad) {
  if (m.domain().alpha != P.alpha1()) throw InvalidInput("set and profile live on different domains");
  if (const auto* g = std::get_if<layout::Graph>(&m.layout())) {
    return graph_perimeter(m.domain(), g->g1, g->g2, false, P, quad);
  }
  if (const auto* g = std::get_if<layout::RearrangedGraph>(&m.layout())) {
    return graph_perimeter(m.domain(), g->g1, g->g2, true, P, quad);
  }
  return cell_perimeter(m.domain(), std::get<layout::Cells>(m.layout()).sections, P);
}

InequalityReport verify_isoperimetric_w(const WeightedSetND& m, const WeightProfile& P, double tolerance) {
  QuadratureOptions quad{1e-12, 1e-15, 40};
  double lhs = perimeter_w(m, P, quad);
  double rhs = perimeter_w(w_rearrange_set(m, P), P, quad);
  return compare(lhs, rhs, tolerance);
}

}  // namespace rearr
