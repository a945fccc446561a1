#include "rearr/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "rearr/error.hpp"

namespace rearr {

namespace {

const json& require(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string(what) + " needs \"" + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<std::pair<double, double>> pairs_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw InvalidInput(std::string(what) + " entries must be [a, b] pairs");
    out.emplace_back(number(p[0], what), number(p[1], what));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<double> node_values(const json& j, const CylinderDomain& d, const char* what) {
  std::vector<double> out(d.column_count());
  if (j.is_string()) {
    auto vars = cylinder_variables(d.dimension());
    vars.pop_back();
    Expression e(j.get<std::string>(), vars);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = e(d.node(i));
  } else if (j.is_number()) {
    std::fill(out.begin(), out.end(), j.get<double>());
  } else if (j.is_array()) {
    if (j.size() != out.size()) throw InvalidInput(std::string(what) + " needs one value per grid node");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = number(j[i], what);
  } else {
    throw InvalidInput(std::string(what) + " must be an expression, a number or an array");
  }
  return out;
}

}  // namespace

double extent_from_json(const json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return kInfinity;
    return parse_double(s);
  }
  double v = number(j, "alpha");
  if (!(v > 0.0)) throw InvalidInput("alpha must be positive");
  return v;
}

json extent_to_json(double alpha) {
  if (alpha == kInfinity) return "inf";
  return alpha;
}

std::vector<std::pair<double, double>> read_weight_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,f") throw ParseError("weight CSV must start with the header x,f");
  std::vector<std::pair<double, double>> nodes;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    auto t = trim(line);
    if (t.empty()) continue;
    auto comma = t.find(',');
    if (comma == std::string::npos) throw ParseError("weight CSV row " + std::to_string(row) + " has no comma");
    double x = parse_double(trim(std::string_view(t).substr(0, comma)));
    double f = parse_double(trim(std::string_view(t).substr(comma + 1)));
    if (!nodes.empty() && !(x > nodes.back().first)) {
      throw ParseError("weight CSV row " + std::to_string(row) + ": x must be strictly increasing");
    }
    if (!(f > 0.0) && !(nodes.empty() && x == 0.0)) {
      throw ParseError("weight CSV row " + std::to_string(row) + ": f must be positive");
    }
    nodes.emplace_back(x, f);
  }
  if (nodes.size() < 2) throw ParseError("weight CSV needs at least two rows");
  return nodes;
}

std::vector<std::pair<double, double>> read_weight_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open weight file " + path.string());
  return read_weight_csv(in);
}

WeightSpec weight_from_json(const json& j, const std::filesystem::path& base) {
  auto type = require(j, "type", "weight").get<std::string>();
  double alpha = j.contains("alpha") ? extent_from_json(j["alpha"]) : kInfinity;
  std::optional<WeightSpec> w;
  if (type == "power") {
    double scale = j.contains("scale") ? number(j["scale"], "scale") : 1.0;
    w = WeightSpec::power(number(require(j, "gamma", "power weight"), "gamma"), alpha, scale);
  } else if (type == "polynomial") {
    auto c = require(j, "coefficients", "polynomial weight");
    std::vector<double> coeffs;
    for (const auto& v : c) coeffs.push_back(number(v, "coefficient"));
    w = WeightSpec::polynomial(std::move(coeffs), alpha);
  } else if (type == "constant") {
    w = WeightSpec::constant(number(require(j, "value", "constant weight"), "value"), alpha);
  } else if (type == "tabulated") {
    std::vector<std::pair<double, double>> nodes;
    if (j.contains("csv")) {
      std::filesystem::path p = j["csv"].get<std::string>();
      if (p.is_relative() && !base.empty()) p = base / p;
      nodes = read_weight_csv(p);
    } else {
      nodes = pairs_from_json(require(j, "nodes", "tabulated weight"), "nodes");
    }
    w = WeightSpec::tabulated(std::move(nodes), alpha);
  } else if (type == "expression") {
    w = WeightSpec::expression(require(j, "expr", "expression weight").get<std::string>(), alpha);
  } else {
    throw InvalidInput("unknown weight type \"" + type + "\"");
  }
  w->claimed_symmetric = j.value("claimed_symmetric", false);
  w->claimed_pair_condition = j.value("claimed_pair_condition", false);
  return *w;
}

json weight_to_json(const WeightSpec& w) {
  json j;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, weight::Power>) {
          j = {{"type", "power"}, {"gamma", f.gamma}, {"scale", f.scale}};
        } else if constexpr (std::is_same_v<T, weight::Polynomial>) {
          j = {{"type", "polynomial"}, {"coefficients", f.coefficients}};
        } else if constexpr (std::is_same_v<T, weight::Tabulated>) {
          json nodes = json::array();
          for (const auto& [x, v] : f.nodes) nodes.push_back({x, v});
          j = {{"type", "tabulated"}, {"nodes", nodes}};
        } else if (f.expression) {
          j = {{"type", "expression"}, {"expr", f.name}};
        } else {
          j = {{"type", "custom"}, {"name", f.name}};
        }
      },
      w.form());
  j["alpha"] = extent_to_json(w.alpha());
  return j;
}

PiecewiseLinear1D piecewise_linear_from_json(const json& j) {
  double alpha = j.contains("alpha") ? extent_from_json(j["alpha"]) : kInfinity;
  auto pts = pairs_from_json(require(j, "points", "piecewise-linear function"), "points");
  Extent<double> a;
  if (alpha < kInfinity) a = alpha;
  return PiecewiseLinear1D(std::move(pts), a);
}

json to_json(const PiecewiseLinear1D& u) {
  json pts = json::array();
  for (const auto& [x, v] : u.points()) pts.push_back({x, v});
  return {{"alpha", extent_to_json(extent_value(u.alpha()))}, {"points", pts}};
}

IntervalUnion parse_interval_union(std::string_view text, double alpha) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  std::vector<std::pair<Rational, Rational>> intervals;
  Extent<Rational> ext;
  if (alpha < kInfinity) ext = to_rational(alpha);
  if (s.empty() || s == "{}") return IntervalUnion(ext);
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (!intervals.empty()) {
      if (s[pos] != 'u' && s[pos] != 'U') throw ParseError("expected 'u' between intervals in \"" + s + "\"");
      ++pos;
    }
    if (pos >= s.size() || s[pos] != '(') throw ParseError("expected '(' in \"" + s + "\"");
    auto comma = s.find(',', pos);
    auto close = s.find(')', pos);
    if (comma == std::string::npos || close == std::string::npos || comma > close) {
      throw ParseError("malformed interval in \"" + s + "\"");
    }
    intervals.emplace_back(parse_rational(s.substr(pos + 1, comma - pos - 1)),
                           parse_rational(s.substr(comma + 1, close - comma - 1)));
    pos = close + 1;
  }
  return IntervalUnion(std::move(intervals), ext);
}

std::string format_interval_union(const IntervalUnion& m) {
  if (m.empty()) return "{}";
  std::string out;
  for (std::size_t j = 0; j < m.interval_count(); ++j) {
    auto [a, b] = m.interval(j);
    if (j > 0) out += "u";
    out += "(" + to_string(a) + "," + to_string(b) + ")";
  }
  return out;
}

IntervalUnion interval_union_from_json(const json& j, double alpha) {
  if (j.is_string()) return parse_interval_union(j.get<std::string>(), alpha);
  if (j.is_array()) {
    std::vector<std::pair<Rational, Rational>> intervals;
    for (const auto& p : j) {
      if (!p.is_array() || p.size() != 2) throw InvalidInput("interval union entries must be [a, b] pairs");
      auto endpoint = [](const json& v) {
        return v.is_string() ? parse_rational(v.get<std::string>()) : to_rational(number(v, "endpoint"));
      };
      intervals.emplace_back(endpoint(p[0]), endpoint(p[1]));
    }
    Extent<Rational> ext;
    if (alpha < kInfinity) ext = to_rational(alpha);
    return IntervalUnion(std::move(intervals), ext);
  }
  throw InvalidInput("interval union must be a literal string or an array of pairs");
}

json to_json(const IntervalUnion& m) {
  json arr = json::array();
  for (std::size_t j = 0; j < m.interval_count(); ++j) {
    auto [a, b] = m.interval(j);
    arr.push_back({to_string(a), to_string(b)});
  }
  return arr;
}

CylinderDomain domain_from_json(const json& j) {
  CylinderDomain d;
  for (const auto& v : require(j, "lower", "domain")) d.lower.push_back(number(v, "lower"));
  for (const auto& v : require(j, "upper", "domain")) d.upper.push_back(number(v, "upper"));
  d.resolution = j.value("resolution", d.resolution);
  if (j.contains("alpha")) d.alpha = extent_from_json(j["alpha"]);
  if (j.contains("support_bound")) d.support_bound = number(j["support_bound"], "support_bound");
  d.validate();
  return d;
}

json to_json(const CylinderDomain& d) {
  return {{"lower", d.lower},
          {"upper", d.upper},
          {"resolution", d.resolution},
          {"alpha", extent_to_json(d.alpha)},
          {"support_bound", d.support_bound}};
}

ColumnFunction column_function_from_json(const json& j, int resolution) {
  auto d = domain_from_json(require(j, "domain", "column function"));
  if (j.contains("expression")) {
    if (resolution > 0) d = d.with_resolution(resolution);
    Expression e(j["expression"].get<std::string>(), cylinder_variables(d.dimension()));
    return ColumnFunction::from_expression(d, e, j.value("y_nodes", 257));
  }
  const auto& cols = require(j, "columns", "column function");
  if (resolution > 0 && resolution != d.resolution) {
    throw InvalidInput("explicit columns cannot be resampled to another resolution");
  }
  std::vector<PiecewiseLinear1D> out;
  for (const auto& c : cols) out.emplace_back(pairs_from_json(c, "column"), d.column_alpha());
  return ColumnFunction(d, std::move(out));
}

WeightProfile profile_from_json(const json& j, const std::filesystem::path& base) {
  json wj = require(j, "w", "profile");
  if (j.contains("alpha1")) wj["alpha"] = j["alpha1"];
  WeightSpec w = weight_from_json(wj, base);
  ProfileOptions options;
  if (j.contains("closed_form_W")) options.closed_form_W = j["closed_form_W"].get<std::string>();
  if (j.contains("alpha")) options.alpha = extent_from_json(j["alpha"]);
  options.enforce_conditions = j.value("enforce_conditions", true);
  return WeightProfile(std::move(w), options);
}

WeightedSetND weighted_set_from_json(const json& j, int resolution) {
  auto d = domain_from_json(require(j, "domain", "set"));
  if (resolution > 0) d = d.with_resolution(resolution);
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    auto g1 = g.contains("g1") ? node_values(g["g1"], d, "g1") : std::vector<double>(d.column_count(), 0.0);
    auto g2 = node_values(require(g, "g2", "graph set"), d, "g2");
    return WeightedSetND(d, layout::Graph{std::move(g1), std::move(g2)});
  }
  std::vector<IntervalUnion> sections;
  for (const auto& s : require(j, "cells", "set")) sections.push_back(interval_union_from_json(s, d.alpha));
  return WeightedSetND(d, layout::Cells{std::move(sections)});
}

json to_json(const ConditionReport& r) {
  json j = {{"passed", r.passed},
            {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr)},
            {"witness", r.witness},
            {"tuples_tested", r.tuples_tested},
            {"exact", r.exact}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const InequalityReport& r) {
  json j = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"margin", r.margin}, {"tolerance", r.tolerance}, {"passed", r.passed}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const RefinementReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"nodes", l.nodes},
                      {"h", l.h},
                      {"lhs", l.lhs},
                      {"rhs", l.rhs},
                      {"margin", l.margin},
                      {"tolerance", l.tolerance},
                      {"passed", l.passed}});
  }
  json j = {{"levels", levels}, {"kappa", r.kappa}, {"passed", r.passed}, {"converged", r.converged}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const JensenStep& s) { return {{"T", s.T}, {"middle", s.middle}, {"T_star", s.T_star}}; }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << content;
    if (!out) throw InvalidInput("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rearr
