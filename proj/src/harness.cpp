#include "rearr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "rearr/parallel.hpp"

namespace rearr {

std::optional<Target> parse_target(std::string_view name) {
  if (name == "dirichlet-1d") return Target::Dirichlet1D;
  if (name == "landes") return Target::Landes;
  if (name == "cylinder") return Target::Cylinder;
  if (name == "weighted") return Target::Weighted;
  if (name == "isoperimetric-1d") return Target::Isoperimetric1D;
  if (name == "isoperimetric-w") return Target::IsoperimetricW;
  if (name == "norms") return Target::Norms;
  return std::nullopt;
}

std::string target_name(Target t) {
  switch (t) {
    case Target::Dirichlet1D: return "dirichlet-1d";
    case Target::Landes: return "landes";
    case Target::Cylinder: return "cylinder";
    case Target::Weighted: return "weighted";
    case Target::Isoperimetric1D: return "isoperimetric-1d";
    case Target::IsoperimetricW: return "isoperimetric-w";
    case Target::Norms: return "norms";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Config

namespace {

bool needs_profile(Target t) { return t == Target::Weighted || t == Target::Norms || t == Target::IsoperimetricW; }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"target",  "seed", "weight",      "profile",   "function", "set",
                                              "p",       "refinements", "tolerance", "kappa"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key \"" + key + "\"");
  }
  ExperimentConfig c;
  c.base = base;
  try {
    if (!j.contains("target")) throw ConfigError("config needs \"target\"");
    auto t = parse_target(j["target"].get<std::string>());
    if (!t) throw ConfigError("unknown target \"" + j["target"].get<std::string>() + "\"");
    c.target = *t;
    c.seed = j.value("seed", std::uint64_t{1});
    c.weight = j.value("weight", json());
    c.profile = j.value("profile", json());
    c.function = j.value("function", json());
    c.set = j.value("set", json());
    c.p = j.value("p", 2.0);
    if (j.contains("refinements")) c.refinements = j["refinements"].get<std::vector<int>>();
    c.tolerance = j.value("tolerance", c.tolerance);
    if (j.contains("kappa") && !j["kappa"].is_null()) c.kappa = j["kappa"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {{"target", target_name(target)},
            {"seed", seed},
            {"p", p},
            {"refinements", refinements},
            {"tolerance", tolerance}};
  if (!weight.is_null()) j["weight"] = weight;
  if (!profile.is_null()) j["profile"] = profile;
  if (!function.is_null()) j["function"] = function;
  if (!set.is_null()) j["set"] = set;
  if (kappa) j["kappa"] = *kappa;
  return j;
}

std::string ExperimentConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  if (refinements.empty()) throw ConfigError("refinement ladder is empty");
  for (std::size_t k = 0; k < refinements.size(); ++k) {
    if (refinements[k] < 2) throw ConfigError("refinement levels need at least 2 nodes");
    if (k > 0 && refinements[k] <= refinements[k - 1]) throw ConfigError("refinement levels must be strictly increasing");
  }
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be finite and >= 1");
  if (needs_profile(target) && profile.is_null()) throw ConfigError(target_name(target) + " needs a \"profile\"");
  if ((target == Target::Isoperimetric1D || target == Target::IsoperimetricW) && set.is_null()) {
    throw ConfigError(target_name(target) + " needs a \"set\"");
  }
  if ((target == Target::Dirichlet1D || target == Target::Landes || target == Target::Cylinder ||
       target == Target::Weighted || target == Target::Norms) &&
      function.is_null()) {
    throw ConfigError(target_name(target) + " needs a \"function\"");
  }
}

json VerificationRecord::to_json() const {
  json levels_json = json::array();
  for (const auto& l : levels) {
    levels_json.push_back({{"nodes", l.nodes},
                           {"lhs", l.lhs},
                           {"rhs", l.rhs},
                           {"margin", l.margin},
                           {"tolerance", l.tolerance},
                           {"passed", l.passed}});
  }
  json j = {{"digest", digest},   {"target", target},       {"seed", seed},       {"levels", levels_json},
            {"passed", passed},   {"converged", converged}, {"version", version}};
  if (!note.empty()) j["note"] = note;
  if (wall_seconds) j["wall_seconds"] = *wall_seconds;
  return j;
}

// ---------------------------------------------------------------------------
// Running

namespace {

WeightSpec load_weight(const json& j, std::uint64_t seed, const std::filesystem::path& base) {
  try {
    if (j.is_null()) return WeightSpec::constant(1.0);
    if (j.is_object() && j.contains("generate")) {
      std::optional<double> alpha;
      if (j.contains("alpha")) alpha = extent_from_json(j["alpha"]);
      return generate_weight(seed, j["generate"].get<std::string>(), alpha);
    }
    return weight_from_json(j, base);
  } catch (const json::exception& e) {
    throw InvalidWeightError(std::string("weight: ") + e.what());
  } catch (const Error& e) {
    throw InvalidWeightError(std::string("weight: ") + e.what());
  }
}

WeightProfile load_profile(const json& j, const std::filesystem::path& base) {
  try {
    return profile_from_json(j, base);
  } catch (const json::exception& e) {
    throw InvalidWeightError(std::string("profile: ") + e.what());
  } catch (const Error& e) {
    throw InvalidWeightError(std::string("profile: ") + e.what());
  }
}

PiecewiseLinear1D load_function_1d(const json& j, std::uint64_t seed, double alpha) {
  if (j.is_object() && j.contains("generate")) {
    return generate_nice_function(seed, j.value("complexity", 1), alpha);
  }
  auto u = piecewise_linear_from_json(j);
  if (extent_value(u.alpha()) != alpha) throw ConfigError("function and weight live on different intervals");
  return u;
}

ColumnSource load_source(const json& j, double alpha) {
  if (j.is_object() && j.contains("generate")) {
    auto kind = j["generate"].get<std::string>();
    if (kind != "shifted-tent") throw ConfigError("unknown function generator \"" + kind + "\"");
    return shifted_tent_source(j.value("a", 0.5), j.value("dimension", 2), alpha);
  }
  auto probe = column_function_from_json(j);
  if (probe.domain().alpha != alpha) throw ConfigError("function domain height differs from the weight domain");
  if (j.contains("columns")) {
    return [probe](int nodes) {
      if (nodes != probe.domain().resolution) throw ConfigError("explicit columns support a single refinement level");
      return probe;
    };
  }
  return [j](int nodes) { return column_function_from_json(j, nodes); };
}

LevelRecord from_inequality(const InequalityReport& r) {
  return {0, r.lhs, r.rhs, r.margin, r.tolerance, r.passed};
}

void fill_from_refinement(VerificationRecord& rec, const RefinementReport& r) {
  for (const auto& l : r.levels) rec.levels.push_back({l.nodes, l.lhs, l.rhs, l.margin, l.tolerance, l.passed});
  rec.passed = r.passed && r.converged;
  rec.converged = r.converged;
  rec.note = r.note;
}

void run_target(const ExperimentConfig& c, VerificationRecord& rec) {
  switch (c.target) {
    case Target::Dirichlet1D:
    case Target::Landes: {
      auto w = load_weight(c.weight, c.seed, c.base);
      auto u = load_function_1d(c.function, c.seed, w.alpha());
      VerifyOptions vo;
      vo.tolerance = c.tolerance;
      auto G = Integrand1D::power(c.p);
      auto r = c.target == Target::Dirichlet1D ? verify_dirichlet_1d(u, w, G, vo) : verify_landes(u, w, G, vo);
      rec.levels.push_back(from_inequality(r));
      rec.passed = r.passed;
      rec.note = r.note;
      return;
    }
    case Target::Isoperimetric1D: {
      auto w = load_weight(c.weight, c.seed, c.base);
      IntervalUnion m;
      if (c.set.is_object() && c.set.contains("generate")) {
        m = generate_interval_union(c.seed, c.set.value("n", 2), w.alpha());
      } else {
        m = interval_union_from_json(c.set, w.alpha());
      }
      auto r = verify_isoperimetric_1d(m, w, c.tolerance);
      double lhs = perimeter_f(m, w), rhs = perimeter_f(rearrange_set(m), w);
      double margin = std::isfinite(r.worst_margin) ? r.worst_margin : lhs - rhs;
      rec.levels.push_back({0, lhs, rhs, margin, c.tolerance, r.passed});
      rec.passed = r.passed;
      rec.note = r.note;
      return;
    }
    case Target::Cylinder: {
      auto w = load_weight(c.weight, c.seed, c.base);
      RefinementOptions ro;
      ro.refinements = c.refinements;
      ro.kappa = c.kappa;
      auto r = verify_polya_szego_cylinder(load_source(c.function, w.alpha()), CylinderWeight(w),
                                           IntegrandND::euclidean_power(c.p), ro);
      fill_from_refinement(rec, r);
      return;
    }
    case Target::Weighted:
    case Target::Norms: {
      auto P = load_profile(c.profile, c.base);
      WeightedRefinementOptions wo;
      wo.refinement.refinements = c.refinements;
      wo.refinement.kappa = c.kappa;
      auto source = load_source(c.function, P.alpha1());
      auto r = c.target == Target::Weighted
                   ? verify_weighted_dirichlet(source, P, IntegrandND::euclidean_power(c.p), wo)
                   : verify_norm_inequality(source, P, c.p, wo);
      fill_from_refinement(rec, r);
      return;
    }
    case Target::IsoperimetricW: {
      auto P = load_profile(c.profile, c.base);
      auto m = weighted_set_from_json(c.set);
      auto r = verify_isoperimetric_w(m, P, c.tolerance);
      rec.levels.push_back(from_inequality(r));
      rec.passed = r.passed;
      rec.note = r.note;
      return;
    }
  }
}

}  // namespace

VerificationRecord run(const ExperimentConfig& config, bool with_timing) {
  config.validate();
  auto start = std::chrono::steady_clock::now();
  VerificationRecord rec;
  rec.digest = config.digest();
  rec.target = target_name(config.target);
  rec.seed = config.seed;
  try {
    run_target(config, rec);
  } catch (const WeightConditionError& e) {
    throw InvalidWeightError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (with_timing) {
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

std::vector<VerificationRecord> sweep(const ExperimentConfig& base, const json& grid, bool with_timing) {
  if (!grid.is_object() || grid.empty()) throw ConfigError("sweep grid must be a non-empty object");
  std::vector<std::pair<json::json_pointer, std::vector<json>>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep axis " + key + " needs a non-empty array");
    try {
      axes.emplace_back(json::json_pointer(key), values.get<std::vector<json>>());
    } catch (const json::exception& e) {
      throw ConfigError("sweep axis " + key + ": " + e.what());
    }
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.second.size();
  std::vector<ExperimentConfig> configs;
  configs.reserve(total);
  json root = base.to_json();
  for (std::size_t i = 0; i < total; ++i) {
    json j = root;
    std::size_t rem = i;
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& values = axes[k].second;
      j[axes[k].first] = values[rem % values.size()];
      rem /= values.size();
    }
    configs.push_back(ExperimentConfig::from_json(j, base.base));
  }
  std::vector<VerificationRecord> records(total);
  parallel_for(total, [&](std::size_t i) { records[i] = run(configs[i], with_timing); });
  return records;
}

int exit_code(const std::vector<VerificationRecord>& records) {
  for (const auto& r : records) {
    if (!r.passed) return 2;
  }
  return 0;
}

std::string margins_csv(const std::vector<VerificationRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "target,seed,level,nodes,lhs,rhs,margin,tolerance,passed\n";
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
      const auto& l = r.levels[k];
      os << r.target << ',' << r.seed << ',' << k << ',' << l.nodes << ',' << l.lhs << ',' << l.rhs << ',' << l.margin
         << ',' << l.tolerance << ',' << (l.passed ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Generators

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

std::int64_t Rng::integer(std::int64_t a, std::int64_t b) {
  auto span = static_cast<std::uint64_t>(b - a) + 1;
  return a + static_cast<std::int64_t>(next() % span);
}

double Rng::dyadic(double a, double b, int bits) {
  double scale = std::ldexp(1.0, bits);
  double lo = std::ceil(a * scale), hi = std::floor(b * scale);
  if (hi < lo) return a;
  return static_cast<double>(integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi))) / scale;
}

namespace {

// n distinct sorted values strictly between lo and hi.
std::vector<double> distinct_between(Rng& r, std::size_t n, double lo, double hi) {
  std::vector<double> out;
  while (out.size() < n) {
    double v = r.dyadic(lo, hi, 16);
    if (v > lo && v < hi && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PiecewiseLinear1D generate_nice_function(std::uint64_t seed, int complexity, double alpha) {
  if (complexity < 0) throw InvalidInput("complexity must be nonnegative");
  Rng r(seed);
  std::vector<std::pair<double, double>> pts;
  double x = r.dyadic(0.0, 1.0, 8);
  pts.emplace_back(x, 0.0);
  for (int bump = 0; bump <= complexity; ++bump) {
    if (bump > 0) {
      double gap = r.dyadic(0.0, 0.5, 8);
      if (gap > 0.0) {
        x += gap;
        pts.emplace_back(x, 0.0);
      }
    }
    double peak = r.dyadic(0.25, 2.0, 16);
    std::size_t up = complexity == 0 ? 0 : static_cast<std::size_t>(r.integer(0, 2));
    std::size_t down = complexity == 0 ? 0 : static_cast<std::size_t>(r.integer(0, 2));
    for (double v : distinct_between(r, up, 0.0, peak)) {
      x += r.dyadic(1.0 / 16, 1.0, 8);
      pts.emplace_back(x, v);
    }
    x += r.dyadic(1.0 / 16, 1.0, 8);
    pts.emplace_back(x, peak);
    auto downs = distinct_between(r, down, 0.0, peak);
    std::reverse(downs.begin(), downs.end());
    for (double v : downs) {
      x += r.dyadic(1.0 / 16, 1.0, 8);
      pts.emplace_back(x, v);
    }
    x += r.dyadic(1.0 / 16, 1.0, 8);
    pts.emplace_back(x, 0.0);
  }
  Extent<double> ext;
  if (alpha < kInfinity) {
    ext = alpha;
    if (x >= 0.95 * alpha) {
      double s = 0.9 * alpha / x;
      for (auto& p : pts) p.first *= s;
    }
  }
  return PiecewiseLinear1D(std::move(pts), ext);
}

IntervalUnion generate_interval_union(std::uint64_t seed, int n, double alpha) {
  if (n < 1) throw InvalidInput("interval count must be positive");
  Rng r(seed);
  bool finite = alpha < kInfinity;
  Rational A = finite ? to_rational(alpha) : Rational(10);
  std::int64_t K = r.integer(4 * n, 200 * n);
  std::vector<std::int64_t> ks;
  while (ks.size() < static_cast<std::size_t>(2 * n)) {
    auto k = r.integer(1, K - 1);
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  std::vector<Rational> e;
  for (auto k : ks) e.push_back(A * ratio(static_cast<long>(k), static_cast<long>(K)));
  auto bits = r.integer(0, 3);
  if (bits & 1) e.front() = 0;
  if ((bits & 2) && finite) e.back() = A;
  std::vector<std::pair<Rational, Rational>> intervals;
  for (int j = 0; j < n; ++j) intervals.emplace_back(e[2 * j], e[2 * j + 1]);
  Extent<Rational> ext;
  if (finite) ext = A;
  return IntervalUnion(std::move(intervals), ext);
}

WeightSpec generate_weight(std::uint64_t seed, const std::string& family, std::optional<double> alpha) {
  Rng r(seed);
  if (family == "power") {
    return WeightSpec::power(r.dyadic(0.25, 3.0, 8), alpha.value_or(kInfinity));
  }
  if (family == "concave-symmetric") {
    double a = alpha.value_or(static_cast<double>(r.integer(1, 2)));
    if (!std::isfinite(a)) throw InvalidInput("concave-symmetric weights need a finite alpha");
    // Power-of-two segment counts keep the nodes dyadic, so symmetry holds exactly in binary.
    int m = 1 << r.integer(0, 2);
    std::vector<double> slopes;
    for (int k = 0; k < m; ++k) slopes.push_back(r.dyadic(0.0, 2.0, 8));
    std::sort(slopes.rbegin(), slopes.rend());
    double spacing = a / (2 * m);
    std::vector<double> values{r.dyadic(0.25, 2.0, 8)};
    for (int k = 0; k < m; ++k) values.push_back(values.back() + slopes[k] * spacing);
    std::vector<std::pair<double, double>> nodes;
    for (int k = 0; k <= 2 * m; ++k) nodes.emplace_back(k == 2 * m ? a : k * spacing, values[k <= m ? k : 2 * m - k]);
    auto w = WeightSpec::tabulated(std::move(nodes), a);
    w.claimed_symmetric = true;
    return w;
  }
  if (family == "tabulated") {
    int m = static_cast<int>(r.integer(2, 6));
    double spacing = r.dyadic(0.125, 1.0, 8);
    std::vector<double> slopes;
    for (int k = 0; k < m; ++k) slopes.push_back(r.dyadic(0.0, 2.0, 8));
    std::sort(slopes.rbegin(), slopes.rend());
    std::vector<std::pair<double, double>> nodes{{0.0, r.dyadic(0.0, 1.0, 8)}};
    for (int k = 0; k < m; ++k) nodes.emplace_back((k + 1) * spacing, nodes.back().second + slopes[k] * spacing);
    if (!(nodes[1].second > 0.0)) nodes[1].second = 1.0 / 256;
    for (std::size_t k = 2; k < nodes.size(); ++k) nodes[k].second = std::max(nodes[k].second, nodes[k - 1].second);
    return WeightSpec::tabulated(std::move(nodes), alpha.value_or(kInfinity));
  }
  throw InvalidInput("unknown weight family \"" + family + "\"");
}

ColumnSource shifted_tent_source(double a, int dimension, double alpha) {
  if (!(a >= 0.0)) throw InvalidInput("shift slope must be nonnegative");
  if (dimension != 2 && dimension != 3) throw InvalidInput("shifted tents support N = 2 or 3");
  return [a, dimension, alpha](int nodes) {
    CylinderDomain d;
    d.lower.assign(dimension - 1, 0.0);
    d.upper.assign(dimension - 1, 1.0);
    d.resolution = nodes;
    d.alpha = alpha;
    d.support_bound = a + 2.0;
    auto ext = d.column_alpha();
    return ColumnFunction::from_columns(d, [&](std::span<const double> xp) {
      double mean = 0.0;
      for (double v : xp) mean += v;
      double s = a * mean / static_cast<double>(xp.size());
      return PiecewiseLinear1D({{s, 0.0}, {s + 1.0, 1.0}, {s + 2.0, 0.0}}, ext);
    });
  };
}

// ---------------------------------------------------------------------------
// Oracles

OracleReport oracle_compare(std::uint64_t seed, std::size_t samples, int complexity, int levels) {
  OracleReport rep;
  auto u = generate_nice_function(seed, complexity);
  auto exact_u = u.convert<Rational>();
  auto exact_star = rearrange(exact_u);
  auto ustar = exact_star.convert<double>();
  auto oracle = sort_oracle_rearrange(u, samples);
  rep.samples = samples;
  rep.sup_error = oracle_sup_distance(oracle, ustar);
  rep.lipschitz = ustar.lipschitz();
  rep.support = u.support_bound();
  rep.bound = 2.0 * rep.lipschitz * rep.support / static_cast<double>(samples);
  Rng r(seed ^ 0x6c6576656c73ull);
  Rational top = exact_u.max_value();
  for (int k = 0; k < levels; ++k) {
    Rational c = top * ratio(static_cast<long>(r.integer(1, (1 << 20) - 1)), 1 << 20);
    if (distribution(exact_u, c) != distribution(exact_star, c)) rep.equimeasurable = false;
  }
  rep.levels_checked = levels;
  rep.passed = rep.equimeasurable && rep.sup_error <= rep.bound;
  return rep;
}

json to_json(const OracleReport& r) {
  return {{"samples", r.samples},     {"sup_error", r.sup_error},     {"bound", r.bound},
          {"lipschitz", r.lipschitz}, {"support", r.support},         {"levels_checked", r.levels_checked},
          {"equimeasurable", r.equimeasurable}, {"passed", r.passed}};
}

Counterexample find_counterexample(const WeightSpec& w, const ConditionOptions& options) {
  Counterexample c;
  c.pair_condition = check_pair_condition(w, options);
  c.violation = find_condition_violation(w, options);
  if (c.violation) {
    c.set = necessity_witness(w, *c.violation);
    c.perimeter = perimeter_f(*c.set, w);
    c.rearranged_perimeter = perimeter_f(rearrange_set(*c.set), w);
  }
  return c;
}

json to_json(const Counterexample& c) {
  json j = {{"pair_condition", to_json(c.pair_condition)}};
  if (c.violation) j["violation"] = {c.violation->first, c.violation->second};
  if (c.set) {
    j["set"] = format_interval_union(*c.set);
    j["rearranged_set"] = format_interval_union(rearrange_set(*c.set));
    j["perimeter"] = c.perimeter;
    j["rearranged_perimeter"] = c.rearranged_perimeter;
  }
  return j;
}

}  // namespace rearr
