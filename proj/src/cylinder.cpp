#include "rearr/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rearr/error.hpp"
#include "rearr/parallel.hpp"

namespace rearr {

std::size_t CylinderDomain::column_count() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < lower.size(); ++k) n *= static_cast<std::size_t>(resolution);
  return n;
}

double CylinderDomain::spacing(std::size_t axis) const { return (upper[axis] - lower[axis]) / (resolution - 1); }

double CylinderDomain::xprime_measure() const {
  double m = 1.0;
  for (std::size_t k = 0; k < lower.size(); ++k) m *= upper[k] - lower[k];
  return m;
}

std::vector<int> CylinderDomain::multi_index(std::size_t column) const {
  std::vector<int> idx(lower.size());
  for (std::size_t k = lower.size(); k-- > 0;) {
    idx[k] = static_cast<int>(column % resolution);
    column /= resolution;
  }
  return idx;
}

std::size_t CylinderDomain::flat_index(std::span<const int> index) const {
  std::size_t flat = 0;
  for (int i : index) flat = flat * resolution + static_cast<std::size_t>(i);
  return flat;
}

std::vector<double> CylinderDomain::node(std::size_t column) const {
  auto idx = multi_index(column);
  std::vector<double> x(lower.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = idx[k] == resolution - 1 ? upper[k] : lower[k] + idx[k] * spacing(k);
  }
  return x;
}

double CylinderDomain::quadrature_weight(std::size_t column) const {
  auto idx = multi_index(column);
  double w = 1.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    bool edge = idx[k] == 0 || idx[k] == resolution - 1;
    w *= spacing(k) * (edge ? 0.5 : 1.0);
  }
  return w;
}

double CylinderDomain::y_extent() const { return std::min(alpha, support_bound); }

Extent<double> CylinderDomain::column_alpha() const {
  if (alpha == kInfinity) return std::nullopt;
  return alpha;
}

CylinderDomain CylinderDomain::with_resolution(int nodes) const {
  CylinderDomain d = *this;
  d.resolution = nodes;
  return d;
}

void CylinderDomain::validate() const {
  if (lower.empty() || lower.size() > 2 || lower.size() != upper.size()) {
    throw InvalidInput("cylinder cross-section must be a box of dimension 1 or 2");
  }
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] < upper[k])) throw InvalidInput("cylinder cross-section box is degenerate");
  }
  if (resolution < 2) throw InvalidInput("cylinder grid needs at least two nodes per axis");
  if (!(alpha > 0.0)) throw InvalidInput("cylinder height alpha must be positive");
  if (!(support_bound > 0.0) || !std::isfinite(support_bound)) {
    throw InvalidInput("cylinder support bound must be positive and finite");
  }
}

ColumnFunction::ColumnFunction(CylinderDomain domain, std::vector<PiecewiseLinear1D> columns)
    : domain_(std::move(domain)), columns_(std::move(columns)) {
  domain_.validate();
  if (columns_.size() != domain_.column_count()) {
    throw InvalidInput("expected " + std::to_string(domain_.column_count()) + " columns, got " +
                       std::to_string(columns_.size()));
  }
  for (const auto& c : columns_) {
    if (c.alpha() != domain_.column_alpha()) throw InvalidInput("column domain differs from the cylinder height");
    if (c.support_bound() > domain_.y_extent()) throw InvalidInput("column support exceeds the cylinder support bound");
  }
}

ColumnFunction ColumnFunction::from_expression(const CylinderDomain& domain, const Expression& expr, int y_nodes) {
  domain.validate();
  if (y_nodes < 2) throw InvalidInput("expression sampling needs at least two y nodes");
  double top = domain.y_extent();
  return from_columns(domain, [&](std::span<const double> xprime) {
    std::vector<double> vars(xprime.begin(), xprime.end());
    vars.push_back(0.0);
    std::vector<PiecewiseLinear1D::Point> pts;
    for (int j = 0; j < y_nodes; ++j) {
      double y = j == y_nodes - 1 ? top : top * j / (y_nodes - 1);
      vars.back() = y;
      double v = expr(vars);
      if (std::isnan(v)) throw InvalidInput("expression '" + expr.text() + "' is undefined at a grid node");
      pts.emplace_back(y, std::max(0.0, v));
    }
    if (top < domain.alpha && pts.back().second != 0.0) {
      throw InvalidInput("expression '" + expr.text() + "' does not vanish at the support bound");
    }
    return PiecewiseLinear1D(std::move(pts), domain.column_alpha());
  });
}

ColumnFunction ColumnFunction::from_columns(const CylinderDomain& domain,
                                            const std::function<PiecewiseLinear1D(std::span<const double>)>& column_at) {
  domain.validate();
  std::vector<PiecewiseLinear1D> cols(domain.column_count());
  parallel_for(cols.size(), [&](std::size_t i) { cols[i] = column_at(domain.node(i)); });
  return ColumnFunction(domain, std::move(cols));
}

namespace {

std::vector<double> merged_breakpoints(std::initializer_list<const PiecewiseLinear1D*> cols, double top) {
  std::vector<double> cuts{0.0, top};
  for (const auto* c : cols) {
    for (const auto& p : c->points()) {
      if (p.first > 0.0 && p.first < top) cuts.push_back(p.first);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

double ColumnFunction::lipschitz() const {
  double ly = 0.0;
  for (const auto& c : columns_) ly = std::max(ly, c.lipschitz());
  double total = ly * ly;
  double top = domain_.y_extent();
  for (std::size_t axis = 0; axis < domain_.lower.size(); ++axis) {
    double lk = 0.0, h = domain_.spacing(axis);
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      auto idx = domain_.multi_index(i);
      if (idx[axis] + 1 >= domain_.resolution) continue;
      ++idx[axis];
      const auto& a = columns_[i];
      const auto& b = columns_[domain_.flat_index(idx)];
      for (double y : merged_breakpoints({&a, &b}, top)) lk = std::max(lk, std::abs(a(y) - b(y)) / h);
    }
    total += lk * lk;
  }
  return std::sqrt(total);
}

ColumnFunction rearrange_columns(const ColumnFunction& u) {
  std::vector<PiecewiseLinear1D> cols(u.columns().size());
  parallel_for(cols.size(), [&](std::size_t i) { cols[i] = rearrange(u.column(i)); });
  return ColumnFunction(u.domain(), std::move(cols));
}

namespace {

struct Stencil {
  std::vector<std::size_t> lo, hi;
  std::vector<double> denom;
};

Stencil stencil_of(const CylinderDomain& d, std::size_t column) {
  Stencil s;
  auto idx = d.multi_index(column);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto lo = idx, hi = idx;
    double h = d.spacing(k);
    if (idx[k] == 0) {
      ++hi[k];
      s.denom.push_back(h);
    } else if (idx[k] == d.resolution - 1) {
      --lo[k];
      s.denom.push_back(h);
    } else {
      --lo[k];
      ++hi[k];
      s.denom.push_back(2.0 * h);
    }
    s.lo.push_back(d.flat_index(lo));
    s.hi.push_back(d.flat_index(hi));
  }
  return s;
}

// Linear data of the centre column and its stencil on one y piece.
struct Piece {
  double a, b;
  double ua, ub;
  std::vector<double> ga, gb;  // x' gradient components at a and b

  double t(double y) const { return (y - a) / (b - a); }
  double value(double y) const { return ua + (ub - ua) * t(y); }
  double uy() const { return (ub - ua) / (b - a); }
  double grad(std::size_t k, double y) const { return ga[k] + (gb[k] - ga[k]) * t(y); }
};

std::vector<Piece> pieces_of(const ColumnFunction& u, std::size_t column) {
  const auto& d = u.domain();
  Stencil s = stencil_of(d, column);
  const auto& centre = u.column(column);
  std::vector<double> cuts;
  {
    std::vector<double> all{0.0, d.y_extent()};
    auto add = [&](const PiecewiseLinear1D& c) {
      for (const auto& p : c.points()) {
        if (p.first > 0.0 && p.first < d.y_extent()) all.push_back(p.first);
      }
    };
    add(centre);
    for (std::size_t k = 0; k < s.lo.size(); ++k) {
      add(u.column(s.lo[k]));
      add(u.column(s.hi[k]));
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    cuts = std::move(all);
  }
  auto grad_at = [&](double y) {
    std::vector<double> g(s.lo.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = (u.column(s.hi[k])(y) - u.column(s.lo[k])(y)) / s.denom[k];
    return g;
  };
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    Piece whole{a, b, centre(a), centre(b), grad_at(a), grad_at(b)};
    // Split where a gradient component changes sign so |grad'| stays smooth on each piece.
    std::vector<double> inner;
    for (std::size_t k = 0; k < whole.ga.size(); ++k) {
      double ga = whole.ga[k], gb = whole.gb[k];
      if ((ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0)) inner.push_back(a + (b - a) * ga / (ga - gb));
    }
    std::sort(inner.begin(), inner.end());
    double left = a;
    inner.push_back(b);
    for (double right : inner) {
      if (!(right > left)) continue;
      Piece p{left, right, whole.value(left), whole.value(right), {}, {}};
      for (std::size_t k = 0; k < whole.ga.size(); ++k) {
        p.ga.push_back(whole.grad(k, left));
        p.gb.push_back(whole.grad(k, right));
      }
      out.push_back(std::move(p));
      left = right;
    }
  }
  return out;
}

}  // namespace

CylinderIntegral integrate_over_cylinder(const ColumnFunction& u,
                                         const std::function<double(const ColumnPoint&)>& integrand,
                                         const QuadratureOptions& quad) {
  const auto& d = u.domain();
  std::vector<CylinderIntegral> parts(d.column_count());
  parallel_for(parts.size(), [&](std::size_t i) {
    auto xprime = d.node(i);
    std::vector<double> grad(xprime.size());
    CylinderIntegral acc;
    for (const auto& piece : pieces_of(u, i)) {
      double uy = piece.uy();
      auto f = [&](double y) {
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = piece.grad(k, y);
        return integrand(ColumnPoint{i, xprime, y, piece.value(y), uy, grad});
      };
      auto r = integrate_adaptive(f, piece.a, piece.b, quad);
      acc.value += r.value;
      acc.error += r.error;
    }
    double w = d.quadrature_weight(i);
    parts[i] = {w * acc.value, w * acc.error};
  });
  CylinderIntegral total;
  for (const auto& p : parts) {
    total.value += p.value;
    total.error += p.error;
  }
  return total;
}

std::vector<GradientSample> discrete_gradient(const ColumnFunction& u, std::size_t column) {
  std::vector<GradientSample> out;
  for (const auto& piece : pieces_of(u, column)) {
    double y = 0.5 * (piece.a + piece.b);
    GradientSample s{y, piece.uy(), {}};
    for (std::size_t k = 0; k < piece.ga.size(); ++k) s.grad_prime.push_back(piece.grad(k, y));
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double norm_squared(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

}  // namespace

IntegrandND::IntegrandND(Form form, IntegrandNDFlags flags, std::optional<Growth> growth, std::uint64_t probe_seed,
                         int dimension)
    : form_(std::move(form)), flags_(flags), growth_(growth) {
  if (const auto* e = std::get_if<integrand_nd::EuclideanPower>(&form_)) {
    if (!(e->p >= 1.0)) throw InvalidInput("Euclidean power integrand needs p >= 1");
  }
  if (const auto* s = std::get_if<integrand_nd::Separable>(&form_)) {
    if (!s->A || !s->B) throw InvalidInput("separable integrand needs both parts");
  }
  if (const auto* c = std::get_if<integrand_nd::Custom>(&form_)) {
    if (!c->eval) throw InvalidInput("custom integrand needs an evaluator");
  }
  if (dimension < 2 || dimension > 3) throw InvalidInput("integrand dimension must be 2 or 3");
  std::size_t m = static_cast<std::size_t>(dimension - 1);
  std::mt19937_64 rng(probe_seed);
  std::uniform_real_distribution<double> zd(-10.0, 10.0), nd(0.0, 10.0), vd(0.0, 5.0), xd(0.0, 1.0);
  auto fail = [this](const std::string& what) {
    throw InvalidInput("integrand " + describe() + " contradicts its declared flag: " + what);
  };
  std::vector<double> z1(m), z2(m), zm(m), x(m);
  for (int probe = 0; probe < 256; ++probe) {
    for (std::size_t k = 0; k < m; ++k) {
      z1[k] = zd(rng);
      z2[k] = zd(rng);
      zm[k] = 0.5 * (z1[k] + z2[k]);
      x[k] = xd(rng);
    }
    double n1 = nd(rng), n2 = nd(rng), v = vd(rng);
    double g1 = (*this)(z1, n1, v, x), g2 = (*this)(z2, n2, v, x);
    double slack = 1e-9 * (1.0 + std::abs(g1) + std::abs(g2));
    if (flags_.convex_in_z && (*this)(zm, 0.5 * (n1 + n2), v, x) > 0.5 * (g1 + g2) + slack) fail("convex in z");
    if (flags_.nondecreasing_in_zN) {
      double lo = std::min(n1, n2), hi = std::max(n1, n2);
      double a = (*this)(z1, lo, v, x), b = (*this)(z1, hi, v, x);
      if (a > b + 1e-9 * (1.0 + std::abs(a) + std::abs(b))) fail("nondecreasing in zN");
    }
  }
}

IntegrandND IntegrandND::euclidean_power(double p) {
  return IntegrandND(integrand_nd::EuclideanPower{p}, {true, true}, Growth{1.0, p});
}

double IntegrandND::operator()(std::span<const double> zprime, double zN, double v,
                               std::span<const double> xprime) const {
  return std::visit(Overloaded{
                        [&](const integrand_nd::EuclideanPower& e) {
                          double r2 = norm_squared(zprime) + zN * zN;
                          if (e.p == 2.0) return r2;
                          return std::pow(r2, 0.5 * e.p);
                        },
                        [&](const integrand_nd::Separable& s) { return s.A(zprime) + s.B(zN); },
                        [&](const integrand_nd::Custom& c) { return c.eval(zprime, zN, v, xprime); },
                    },
                    form_);
}

std::optional<double> IntegrandND::power_exponent() const {
  if (const auto* e = std::get_if<integrand_nd::EuclideanPower>(&form_)) return e->p;
  return std::nullopt;
}

std::string IntegrandND::describe() const {
  return std::visit(Overloaded{
                        [](const integrand_nd::EuclideanPower& e) {
                          std::ostringstream os;
                          os << "|z|^" << e.p;
                          return os.str();
                        },
                        [](const integrand_nd::Separable& s) { return "separable(" + s.name + ")"; },
                        [](const integrand_nd::Custom& c) { return "custom(" + c.name + ")"; },
                    },
                    form_);
}

CylinderWeight::CylinderWeight(WeightSpec shared) : shared_(std::move(shared)) {}

CylinderWeight::CylinderWeight(std::function<WeightSpec(std::span<const double>)> per_column)
    : per_column_(std::move(per_column)) {
  if (!per_column_) throw InvalidInput("per-column weight needs a factory");
}

std::vector<WeightSpec> CylinderWeight::on(const CylinderDomain& domain) const {
  if (shared_) return {*shared_};
  std::vector<WeightSpec> out;
  out.reserve(domain.column_count());
  for (std::size_t i = 0; i < domain.column_count(); ++i) out.push_back(per_column_(domain.node(i)));
  return out;
}

CylinderIntegral functional_nd(const ColumnFunction& u, const CylinderWeight& f, const IntegrandND& G,
                               const CylinderOptions& options) {
  auto weights = f.on(u.domain());
  for (const auto& w : weights) {
    if (w.alpha() != u.domain().alpha) throw InvalidInput("weight and cylinder have different heights");
    if (options.check_weight) require_weight_conditions(w, options.weight_conditions);
  }
  return integrate_over_cylinder(
      u,
      [&](const ColumnPoint& p) {
        const WeightSpec& w = weights.size() == 1 ? weights.front() : weights[p.column];
        return G(p.grad_prime, w(p.y) * std::abs(p.uy), p.value, p.xprime);
      },
      options.quadrature);
}

double lp_integral(const ColumnFunction& u, double p, const QuadratureOptions& quad) {
  return integrate_over_cylinder(u, [p](const ColumnPoint& pt) { return std::pow(std::abs(pt.value), p); }, quad)
      .value;
}

RefinementReport assess_refinement(std::vector<LevelReport> levels, double default_kappa,
                                   const RefinementOptions& options) {
  RefinementReport report;
  report.kappa = options.kappa.value_or(default_kappa);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    auto& lv = levels[k];
    lv.margin = lv.lhs - lv.rhs;
    lv.tolerance = report.kappa * lv.h + options.floor * std::max({std::abs(lv.lhs), std::abs(lv.rhs), 1.0});
    lv.passed = lv.margin >= -lv.tolerance;
    report.passed = report.passed && lv.passed;
    if (k > 0 && lv.margin < 0.0) {
      const auto& prev = levels[k - 1];
      double allowed = std::max(0.0, -prev.margin) * lv.h / prev.h + options.floor;
      if (-lv.margin > allowed) report.converged = false;
    }
  }
  report.levels = std::move(levels);
  if (!report.converged) report.note = "negative margin did not shrink linearly under refinement";
  return report;
}

RefinementReport verify_polya_szego_cylinder(const ColumnSource& source, const CylinderWeight& f,
                                             const IntegrandND& G, const RefinementOptions& options) {
  if (!G.flags().convex_in_z || !G.flags().nondecreasing_in_zN) {
    throw InvalidInput("cylinder inequality needs G convex in z and nondecreasing in zN");
  }
  if (options.refinements.empty()) throw InvalidInput("refinement ladder is empty");
  for (std::size_t k = 1; k < options.refinements.size(); ++k) {
    if (options.refinements[k] <= options.refinements[k - 1]) {
      throw InvalidInput("refinement levels must be strictly increasing");
    }
  }
  std::vector<LevelReport> levels;
  double lip = 0.0;
  double omega = 0.0;
  int dim = 2;
  CylinderOptions cyl = options.cylinder;
  for (int nodes : options.refinements) {
    ColumnFunction u = source(nodes);
    ColumnFunction ustar = rearrange_columns(u);
    LevelReport lv;
    lv.nodes = nodes;
    lv.h = u.domain().spacing(0);
    lv.lhs = functional_nd(u, f, G, cyl).value;
    cyl.check_weight = false;
    lv.rhs = functional_nd(ustar, f, G, cyl).value;
    lip = std::max(lip, u.lipschitz());
    omega = u.domain().xprime_measure() * u.domain().y_extent();
    dim = u.domain().dimension();
    levels.push_back(lv);
  }
  return assess_refinement(std::move(levels), (dim - 1) * lip * lip * omega, options);
}

RefinementReport verify_p_norm_corollary(const ColumnSource& source, const CylinderWeight& f, double p,
                                         const RefinementOptions& options) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p-norm inequality needs 1 < p < infinity");
  return verify_polya_szego_cylinder(source, f, IntegrandND::euclidean_power(p), options);
}

ConditionReport validate_growth(const IntegrandND& G, double C, double p, std::size_t samples, std::uint64_t seed,
                                int dimension, double radius) {
  if (!(C > 0.0)) throw InvalidInput("growth constant C must be positive");
  if (!(p >= 1.0)) throw InvalidInput("growth exponent p must be at least 1");
  std::size_t m = static_cast<std::size_t>(dimension - 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> zd(-radius, radius), pos(0.0, radius), xd(0.0, 1.0);
  ConditionReport report;
  std::vector<double> z(m), x(m);
  for (std::size_t s = 0; s < samples; ++s) {
    // Magnitudes spread over [0, radius] on a logarithmic scale.
    double scale = std::pow(radius, static_cast<double>(s % 16) / 15.0) / radius;
    for (std::size_t k = 0; k < m; ++k) {
      z[k] = scale * zd(rng);
      x[k] = xd(rng);
    }
    double zN = scale * pos(rng), v = scale * pos(rng);
    double g = G(z, zN, v, x);
    double bound = C * (1.0 + std::pow(v, p) + std::pow(std::sqrt(norm_squared(z) + zN * zN), p));
    double margin = std::min(g, bound - g) / std::max(1.0, bound);
    std::vector<double> tuple(z);
    tuple.push_back(zN);
    tuple.push_back(v);
    report.record(std::isfinite(margin) ? margin : -kInfinity, std::move(tuple));
  }
  report.finish(1e-12);
  report.note = "margin relative to the growth bound";
  return report;
}

}  // namespace rearr
