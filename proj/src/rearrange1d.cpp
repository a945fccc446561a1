#include "rearr/rearrange1d.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rearr/error.hpp"

namespace rearr {

namespace {

template <class Scalar>
std::string show(const Scalar& v) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return to_string(v);
  } else {
    std::ostringstream os;
    os << v;
    return os.str();
  }
}

template <class Scalar>
bool finite(const Scalar& v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return std::isfinite(v);
  } else {
    return true;
  }
}

}  // namespace

template <class Scalar>
PiecewiseLinear<Scalar>::PiecewiseLinear(std::vector<Point> points, Extent<Scalar> alpha)
    : points_(std::move(points)), alpha_(std::move(alpha)) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    if (alpha_) alpha_->canonicalize();
    for (auto& [x, u] : points_) {
      x.canonicalize();
      u.canonicalize();
    }
  }
  if (alpha_ && !(*alpha_ > 0)) throw InvalidInput("piecewise-linear function needs alpha > 0");
  if (points_.size() == 1) throw InvalidInput("piecewise-linear function needs at least two breakpoints");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& [x, u] = points_[i];
    if (!finite(x) || !finite(u)) throw InvalidInput("breakpoints must be finite");
    if (u < 0) throw InvalidInput("function value " + show(u) + " at x = " + show(x) + " is negative");
    if (i > 0 && !(points_[i - 1].first < x)) throw InvalidInput("breakpoint x values must be strictly increasing");
  }
  if (points_.empty()) return;
  const auto& [x0, u0] = points_.front();
  const auto& [xn, un] = points_.back();
  if (x0 < 0) throw InvalidInput("first breakpoint lies left of 0");
  if (x0 > 0 && u0 != 0) throw InvalidInput("function must vanish at its first breakpoint unless it sits at 0");
  if (alpha_ && xn > *alpha_) throw InvalidInput("last breakpoint lies right of alpha");
  bool at_alpha = alpha_ && xn == *alpha_;
  if (!at_alpha && un != 0) throw InvalidInput("function must vanish at its last breakpoint unless it sits at alpha");
}

template <class Scalar>
bool PiecewiseLinear<Scalar>::is_zero() const {
  return std::all_of(points_.begin(), points_.end(), [](const Point& p) { return p.second == 0; });
}

template <class Scalar>
Scalar PiecewiseLinear<Scalar>::support_bound() const {
  return points_.empty() ? Scalar(0) : points_.back().first;
}

template <class Scalar>
Scalar PiecewiseLinear<Scalar>::max_value() const {
  Scalar m(0);
  for (const auto& p : points_) {
    if (p.second > m) m = p.second;
  }
  return m;
}

template <class Scalar>
Scalar PiecewiseLinear<Scalar>::operator()(const Scalar& x) const {
  if (points_.empty() || x < points_.front().first || x > points_.back().first) return Scalar(0);
  auto it = std::lower_bound(points_.begin(), points_.end(), x,
                             [](const Point& p, const Scalar& v) { return p.first < v; });
  if (it->first == x) return it->second;
  const auto& [x1, u1] = *it;
  const auto& [x0, u0] = *(it - 1);
  Scalar t = (x - x0) / (x1 - x0);
  return Scalar(u0 + t * (u1 - u0));
}

template <class Scalar>
bool PiecewiseLinear<Scalar>::is_nice() const {
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (points_[i].second == points_[i + 1].second && points_[i].second > 0) return false;
  }
  return true;
}

template <class Scalar>
bool PiecewiseLinear<Scalar>::is_nonincreasing() const {
  if (!points_.empty() && points_.front().first > 0 && max_value() > 0) return false;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (points_[i + 1].second > points_[i].second) return false;
  }
  return true;
}

template <class Scalar>
double PiecewiseLinear<Scalar>::lipschitz() const {
  double lip = 0.0;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    Scalar s = (points_[i + 1].second - points_[i].second) / (points_[i + 1].first - points_[i].first);
    lip = std::max(lip, std::abs(to_double(s)));
  }
  return lip;
}

template <class Scalar>
double PiecewiseLinear<Scalar>::min_nonzero_slope() const {
  double best = kInfinity;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (points_[i + 1].second == points_[i].second) continue;
    Scalar s = (points_[i + 1].second - points_[i].second) / (points_[i + 1].first - points_[i].first);
    best = std::min(best, std::abs(to_double(s)));
  }
  return best;
}

template <class Scalar>
Scalar distribution(const PiecewiseLinear<Scalar>& u, const Scalar& c) {
  if (c < 0) throw DomainError("distribution needs a nonnegative level");
  const auto& pts = u.points();
  Scalar total(0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& [xa, a] = pts[i];
    const auto& [xb, b] = pts[i + 1];
    bool above_a = a > c, above_b = b > c;
    if (above_a && above_b) {
      total += xb - xa;
    } else if (above_a) {
      total += (a - c) / (a - b) * (xb - xa);
    } else if (above_b) {
      total += (b - c) / (b - a) * (xb - xa);
    }
  }
  return total;
}

template <class Scalar>
Scalar plateau_length(const PiecewiseLinear<Scalar>& u, const Scalar& c) {
  const auto& pts = u.points();
  Scalar total(0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].second == c && pts[i + 1].second == c) total += pts[i + 1].first - pts[i].first;
  }
  return total;
}

template <class Scalar>
Scalar Branch<Scalar>::position(const Scalar& c, const Scalar& c_low) const {
  Scalar shift = (c - c_low) * inverse_slope;
  return direction == Direction::Up ? Scalar(x_at_low + shift) : Scalar(x_at_low - shift);
}

template <class Scalar>
Scalar Band<Scalar>::measure_at(const Scalar& c) const {
  Scalar total = offset;
  for (const auto& br : branches) {
    if (br.direction == Direction::Down) {
      total += br.position(c, c_low);
    } else {
      total -= br.position(c, c_low);
    }
  }
  return total;
}

template <class Scalar>
Scalar Band<Scalar>::inverse_slope_sum() const {
  Scalar total(0);
  for (const auto& br : branches) total += br.inverse_slope;
  return total;
}

namespace {

template <class Scalar>
std::vector<Scalar> positive_levels(const PiecewiseLinear<Scalar>& u) {
  std::vector<Scalar> levels;
  for (const auto& p : u.points()) {
    if (p.second > 0) levels.push_back(p.second);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

}  // namespace

template <class Scalar>
LevelBandDecomposition<Scalar> level_bands(const PiecewiseLinear<Scalar>& u) {
  const auto& pts = u.points();
  Scalar top = u.max_value();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Scalar& v = pts[i].second;
    if (v > 0 && v < top && pts[i + 1].second == v) {
      throw NotNiceError("plateau at level " + show(v) + " on [" + show(pts[i].first) + ", " +
                         show(pts[i + 1].first) + "]");
    }
  }
  std::vector<Scalar> levels = positive_levels(u);
  levels.insert(levels.begin(), Scalar(0));
  bool tail_at_alpha = !pts.empty() && u.alpha() && pts.back().first == *u.alpha();

  LevelBandDecomposition<Scalar> out;
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    Band<Scalar> band{levels[j], levels[j + 1], {}, Scalar(0)};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const auto& [xa, a] = pts[i];
      const auto& [xb, b] = pts[i + 1];
      Scalar lo = a < b ? a : b, hi = a < b ? b : a;
      if (!(lo <= band.c_low && hi >= band.c_high)) continue;
      Scalar inv = (xb - xa) / (hi - lo);
      Scalar x_low = a < b ? Scalar(xa + (band.c_low - a) * inv) : Scalar(xb - (band.c_low - b) * inv);
      band.branches.push_back({inv, x_low, a < b ? Direction::Up : Direction::Down});
    }
    if (tail_at_alpha && pts.back().second >= band.c_high) band.offset = *u.alpha();
    out.bands.push_back(std::move(band));
  }
  return out;
}

template <class Scalar>
PiecewiseLinear<Scalar> rearrange(const PiecewiseLinear<Scalar>& u) {
  if (u.is_zero()) return PiecewiseLinear<Scalar>({}, u.alpha());
  std::vector<Scalar> levels = positive_levels(u);
  std::vector<typename PiecewiseLinear<Scalar>::Point> out;
  auto push = [&](Scalar x, const Scalar& value) {
    if (!out.empty() && !(out.back().first < x)) {
      // Only a drop at x = alpha can repeat a position; keep the upper value.
      if (u.alpha() && x == *u.alpha()) return;
      throw InvalidInput("rearrangement produced a non-increasing breakpoint at x = " + show(x));
    }
    out.emplace_back(std::move(x), value);
  };
  push(Scalar(0), levels.back());
  for (std::size_t k = levels.size(); k-- > 0;) {
    const Scalar& level = levels[k];
    if (k + 1 < levels.size()) push(distribution(u, level), level);
    Scalar flat = plateau_length(u, level);
    if (flat > 0) push(Scalar(distribution(u, level) + flat), level);
  }
  push(distribution(u, Scalar(0)), Scalar(0));
  return PiecewiseLinear<Scalar>(std::move(out), u.alpha());
}

template <class Scalar>
PiecewiseLinear<Scalar> niceify(const PiecewiseLinear<Scalar>& u, const Scalar& epsilon) {
  if (!(epsilon > 0)) throw InvalidInput("niceify needs epsilon > 0");
  Scalar R = u.support_bound();
  if (!(R > 0)) throw InvalidInput("niceify needs a function with positive support bound");
  double eps0 = u.min_nonzero_slope() * std::min(1.0, to_double(R));
  if (!(to_double(epsilon) < eps0)) {
    std::ostringstream os;
    os << "niceify needs epsilon < " << eps0 << " for this function";
    throw InvalidInput(os.str());
  }
  std::vector<typename PiecewiseLinear<Scalar>::Point> out;
  auto bump = [&](const Scalar& x) { return Scalar(epsilon * (Scalar(1) - x / R)); };
  const auto& pts = u.points();
  if (pts.front().first > 0) out.emplace_back(Scalar(0), bump(Scalar(0)));
  for (const auto& [x, v] : pts) out.emplace_back(x, Scalar(v + bump(x)));
  return PiecewiseLinear<Scalar>(std::move(out), u.alpha());
}

template <class Scalar>
Scalar integral_power(const PiecewiseLinear<Scalar>& u, int p) {
  if (p < 0) throw InvalidInput("integral_power needs p >= 0");
  auto pw = [](const Scalar& v, int e) {
    Scalar r(1);
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  };
  const auto& pts = u.points();
  Scalar total(0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& [xa, a] = pts[i];
    const auto& [xb, b] = pts[i + 1];
    Scalar dx = xb - xa;
    if (a == b) {
      total += dx * pw(a, p);
    } else {
      total += dx * (pw(b, p + 1) - pw(a, p + 1)) / (Scalar(p + 1) * (b - a));
    }
  }
  return total;
}

template class PiecewiseLinear<double>;
template class PiecewiseLinear<Rational>;
template struct Branch<double>;
template struct Branch<Rational>;
template struct Band<double>;
template struct Band<Rational>;
template double distribution(const PiecewiseLinear<double>&, const double&);
template Rational distribution(const PiecewiseLinear<Rational>&, const Rational&);
template double plateau_length(const PiecewiseLinear<double>&, const double&);
template Rational plateau_length(const PiecewiseLinear<Rational>&, const Rational&);
template LevelBandDecomposition<double> level_bands(const PiecewiseLinear<double>&);
template LevelBandDecomposition<Rational> level_bands(const PiecewiseLinear<Rational>&);
template PiecewiseLinear<double> rearrange(const PiecewiseLinear<double>&);
template PiecewiseLinear<Rational> rearrange(const PiecewiseLinear<Rational>&);
template PiecewiseLinear<double> niceify(const PiecewiseLinear<double>&, const double&);
template PiecewiseLinear<Rational> niceify(const PiecewiseLinear<Rational>&, const Rational&);
template double integral_power(const PiecewiseLinear<double>&, int);
template Rational integral_power(const PiecewiseLinear<Rational>&, int);

// ---------------------------------------------------------------------------
// Integrands

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Integrand1D::Integrand1D(Form form, IntegrandFlags flags, std::optional<Growth> growth, std::uint64_t probe_seed)
    : form_(std::move(form)), flags_(flags), growth_(growth) {
  if (const auto* pz = std::get_if<integrand::PowerOfZ>(&form_)) {
    if (!(pz->p >= 1.0)) throw InvalidInput("integrand z^p needs p >= 1");
  }
  if (const auto* pr = std::get_if<integrand::Product>(&form_)) {
    if (!pr->zpart || !pr->vpart) throw InvalidInput("product integrand needs both factors");
  }
  if (const auto* cu = std::get_if<integrand::Custom>(&form_)) {
    if (!cu->eval) throw InvalidInput("custom integrand needs an evaluator");
  }
  if (growth_ && !(growth_->C > 0.0 && growth_->p >= 1.0)) throw InvalidInput("growth bound needs C > 0, p >= 1");

  std::mt19937_64 rng(probe_seed);
  std::uniform_real_distribution<double> zdist(0.0, 10.0), vdist(0.0, 5.0);
  auto slack = [](double a, double b) { return 1e-9 * (1.0 + std::abs(a) + std::abs(b)); };
  auto fail = [this](const std::string& what, double z1, double z2, double v) {
    std::ostringstream os;
    os << "integrand " << describe() << " contradicts its declared flag: " << what << " (z1=" << z1
       << ", z2=" << z2 << ", v=" << v << ")";
    throw InvalidInput(os.str());
  };
  for (int probe = 0; probe < 256; ++probe) {
    double z1 = zdist(rng), z2 = zdist(rng), v = vdist(rng);
    if (z1 > z2) std::swap(z1, z2);
    double g1 = (*this)(z1, v), g2 = (*this)(z2, v);
    if (flags_.convex_nondecreasing_in_z) {
      if (g1 > g2 + slack(g1, g2)) fail("nondecreasing in z", z1, z2, v);
      double gm = (*this)(0.5 * (z1 + z2), v);
      if (gm > 0.5 * (g1 + g2) + slack(g1, g2)) fail("convex in z", z1, z2, v);
    }
    if (flags_.g_over_z_nondecreasing && z1 > 0.0 && g1 / z1 > g2 / z2 + slack(g1 / z1, g2 / z2)) {
      fail("G/z nondecreasing", z1, z2, v);
    }
    if (flags_.zero_at_zero) {
      double g0 = (*this)(0.0, v);
      if (std::abs(g0) > 1e-12) fail("G(0, v) = 0", 0.0, 0.0, v);
    }
  }
}

Integrand1D Integrand1D::power(double p) {
  return Integrand1D(integrand::PowerOfZ{p}, {true, true, true}, Growth{1.0, p});
}

double Integrand1D::operator()(double z, double v) const {
  return std::visit(Overloaded{
                        [&](const integrand::PowerOfZ& f) { return std::pow(z, f.p); },
                        [&](const integrand::Product& f) { return f.zpart(z) * f.vpart(v); },
                        [&](const integrand::Custom& f) { return f.eval(z, v); },
                    },
                    form_);
}

std::optional<double> Integrand1D::power_exponent() const {
  if (const auto* pz = std::get_if<integrand::PowerOfZ>(&form_)) return pz->p;
  return std::nullopt;
}

std::string Integrand1D::describe() const {
  return std::visit(Overloaded{
                        [](const integrand::PowerOfZ& f) {
                          std::ostringstream os;
                          os << "z^" << f.p;
                          return os.str();
                        },
                        [](const integrand::Product& f) { return "product(" + f.name + ")"; },
                        [](const integrand::Custom& f) { return "custom(" + f.name + ")"; },
                    },
                    form_);
}

// ---------------------------------------------------------------------------
// Functionals

namespace {

struct Segment {
  double xa, xb, ua, ub;
  double slope() const { return xb > xa ? (ub - ua) / (xb - xa) : 0.0; }
  double value(double x) const { return ua + (x - xa) * slope(); }
};

std::vector<Segment> segments_on(const PiecewiseLinear1D& u, double upper) {
  std::vector<Segment> out;
  const auto& pts = u.points();
  if (pts.empty()) {
    if (upper > 0.0) out.push_back({0.0, upper, 0.0, 0.0});
    return out;
  }
  if (pts.front().first > 0.0) out.push_back({0.0, pts.front().first, 0.0, 0.0});
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    out.push_back({pts[i].first, pts[i + 1].first, pts[i].second, pts[i + 1].second});
  }
  if (upper > pts.back().first) out.push_back({pts.back().first, upper, 0.0, 0.0});
  return out;
}

double resolve_upper(const PiecewiseLinear1D& u, const WeightSpec& w, std::optional<double> upper) {
  if (u.alpha().value_or(kInfinity) != w.alpha()) {
    throw InvalidInput("function and weight live on different domains");
  }
  double r = upper.value_or(u.support_bound());
  if (r < u.support_bound()) throw InvalidInput("integration bound lies inside the support");
  return r;
}

double integrate_pieces(const std::function<double(double)>& f, double a, double b, const WeightSpec& w,
                        const QuadratureOptions& quad) {
  std::vector<double> cuts{a};
  for (double k : weight_kinks(w, a, b)) cuts.push_back(k);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_adaptive(f, cuts[i], cuts[i + 1], quad).value;
  return total;
}

}  // namespace

double dirichlet_functional(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                            std::optional<double> upper, const QuadratureOptions& quad) {
  double r = resolve_upper(u, w, upper);
  auto p = G.power_exponent();
  double total = 0.0;
  for (const auto& seg : segments_on(u, r)) {
    double s = std::abs(seg.slope());
    if (p) {
      if (s > 0.0) total += std::pow(s, *p) * integrate_weight_power(w, *p, seg.xa, seg.xb);
      continue;
    }
    total += integrate_pieces([&](double x) { return G(w(x) * s, seg.value(x)); }, seg.xa, seg.xb, w, quad);
  }
  return total;
}

double landes_functional(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                         std::optional<double> upper, const QuadratureOptions& quad) {
  double r = resolve_upper(u, w, upper);
  auto p = G.power_exponent();
  double total = 0.0;
  for (const auto& seg : segments_on(u, r)) {
    double s = std::abs(seg.slope());
    if (p) {
      if (s > 0.0) total += std::pow(s, *p) * integrate_weight_power(w, 1.0, seg.xa, seg.xb);
      continue;
    }
    total += integrate_pieces([&](double x) { return G(s, seg.value(x)) * w(x); }, seg.xa, seg.xb, w, quad);
  }
  return total;
}

double landes_functional_mixed(const PiecewiseLinear1D& g, const PiecewiseLinear1D& v, const WeightSpec& w,
                               const Integrand1D& G, std::optional<double> upper, const QuadratureOptions& quad) {
  double r = std::max(resolve_upper(g, w, upper), resolve_upper(v, w, std::nullopt));
  std::vector<double> cuts{0.0, r};
  for (const auto* f : {&g, &v}) {
    for (const auto& pt : f->points()) cuts.push_back(pt.first);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b > r) break;
    double s = std::abs((g(b) - g(a)) / (b - a));
    double va = v(a), vb = v(b);
    auto value = [&](double x) { return va + (vb - va) * (x - a) / (b - a); };
    total += integrate_pieces([&](double x) { return G(s, value(x)) * w(x); }, a, b, w, quad);
  }
  return total;
}

InequalityReport compare(double lhs, double rhs, double relative_tolerance) {
  InequalityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = lhs - rhs;
  r.tolerance = relative_tolerance * std::max({std::abs(lhs), std::abs(rhs), 1.0});
  r.passed = r.margin >= -r.tolerance;
  return r;
}

namespace {

PiecewiseLinear1D exact_rearrangement(const PiecewiseLinear1D& u) {
  return rearrange(u.convert<Rational>()).convert<double>();
}

}  // namespace

InequalityReport verify_dirichlet_1d(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                                     const VerifyOptions& options) {
  if (!G.flags().convex_nondecreasing_in_z) {
    throw InvalidInput("Dirichlet inequality needs G convex and nondecreasing in z");
  }
  if (options.check_weight) require_weight_conditions(w, options.weight_conditions);
  auto ustar = exact_rearrangement(u);
  double upper = u.support_bound();
  double lhs = dirichlet_functional(u, w, G, upper, options.quadrature);
  double rhs = dirichlet_functional(ustar, w, G, upper, options.quadrature);
  return compare(lhs, rhs, options.tolerance);
}

InequalityReport verify_landes(const PiecewiseLinear1D& u, const WeightSpec& w, const Integrand1D& G,
                               const VerifyOptions& options) {
  if (!G.flags().g_over_z_nondecreasing || !G.flags().zero_at_zero) {
    throw InvalidInput("Landes inequality needs G(0, v) = 0 and G(z, v)/z nondecreasing");
  }
  if (options.check_weight) require_weight_conditions(w, options.weight_conditions);
  auto ustar = exact_rearrangement(u);
  double upper = u.support_bound();
  double lhs = landes_functional(u, w, G, upper, options.quadrature);
  double rhs = options.literal_landes_rhs ? landes_functional_mixed(ustar, u, w, G, upper, options.quadrature)
                                          : landes_functional(ustar, w, G, upper, options.quadrature);
  auto report = compare(lhs, rhs, options.tolerance);
  if (options.literal_landes_rhs) report.note = "right-hand side uses u in the second argument of G";
  return report;
}

namespace {

double alternating_sum(std::span<const double> x) {
  double X = 0.0;
  std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) X += ((n - 1 - k) % 2 == 0 ? 1.0 : -1.0) * x[k];
  return X;
}

void check_band_tuple(std::span<const double> x, std::span<const double> b) {
  if (x.empty() || x.size() != b.size()) throw InvalidInput("band tuple needs matching nonempty x and b");
  if (!std::is_sorted(x.begin(), x.end())) throw InvalidInput("band positions must be nondecreasing");
  for (double v : b) {
    if (!(v > 0.0)) throw InvalidInput("inverse slopes must be positive");
  }
}

}  // namespace

JensenStep jensen_step(std::span<const double> x, std::span<const double> b, const WeightSpec& w,
                       const Integrand1D& G, double level) {
  check_band_tuple(x, b);
  double B = 0.0, F = 0.0;
  JensenStep out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double fk = w(x[k]);
    out.T += G(fk / b[k], level) * b[k];
    B += b[k];
    F += fk;
  }
  out.middle = G(F / B, level) * B;
  out.T_star = G(w(alternating_sum(x)) / B, level) * B;
  return out;
}

JensenStep landes_step(std::span<const double> x, std::span<const double> b, const WeightSpec& w,
                       const Integrand1D& G, double level) {
  check_band_tuple(x, b);
  double B = 0.0, F = 0.0;
  JensenStep out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double fk = w(x[k]);
    out.T += G(1.0 / b[k], level) * fk * b[k];
    B += b[k];
    F += fk;
  }
  double gB = G(1.0 / B, level) * B;
  out.middle = gB * F;
  out.T_star = gB * w(alternating_sum(x));
  return out;
}

std::vector<double> sample_midpoints(const PiecewiseLinear1D& u, double a, double h, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const auto& pts = u.points();
  if (pts.size() < 2) return out;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double x = a + (static_cast<double>(k) + 0.5) * h;
    if (x < pts.front().first || x > pts.back().first) continue;
    while (seg + 2 < pts.size() && pts[seg + 1].first < x) ++seg;
    const auto& [x0, u0] = pts[seg];
    const auto& [x1, u1] = pts[seg + 1];
    out[k] = u0 + (u1 - u0) * (x - x0) / (x1 - x0);
  }
  return out;
}

SampledProfile sort_oracle_rearrange(const PiecewiseLinear1D& u, std::size_t sample_count) {
  if (sample_count < 2) throw InvalidInput("sort oracle needs at least two samples");
  SampledProfile out;
  out.spacing = u.support_bound() / static_cast<double>(sample_count);
  out.values = sample_midpoints(u, 0.0, out.spacing, sample_count);
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

double oracle_sup_distance(const SampledProfile& oracle, const PiecewiseLinear1D& ustar) {
  auto exact = sample_midpoints(ustar, 0.0, oracle.spacing, oracle.values.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) worst = std::max(worst, std::abs(exact[k] - oracle.values[k]));
  return worst;
}

}  // namespace rearr
