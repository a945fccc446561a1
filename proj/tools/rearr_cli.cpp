// rearr: command-line front end for the rearrangement checks.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "rearr/harness.hpp"

using namespace rearr;

namespace {

// Inline JSON when the argument starts with '{' or '[', otherwise a file path.
json load_json_arg(const std::string& arg, std::filesystem::path* base = nullptr) {
  auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[' || arg[first] == '"')) {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("inline JSON: ") + e.what());
    }
  }
  if (base) *base = std::filesystem::path(arg).parent_path();
  return read_json_file(arg);
}

void emit(const json& j, const std::string& out) {
  std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

std::vector<int> parse_refinements(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad refinement level \"" + item + "\"");
    }
  }
  return out;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> tolerance;
  std::string refinements;
  std::string csv;
  bool with_timing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON file or inline)");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Write the JSON report here instead of stdout");
  cmd->add_option("--tolerance", c.tolerance, "Relative tolerance");
  cmd->add_option("--refinements", c.refinements, "Comma-separated x' grid sizes, e.g. 8,16,32");
  cmd->add_option("--csv", c.csv, "Also write a CSV margins table");
  cmd->add_flag("--with-timing", c.with_timing, "Include wall time in the record");
}

ExperimentConfig make_config(const Common& c, std::optional<std::string> target) {
  if (c.config.empty()) throw ConfigError("--config is required");
  std::filesystem::path base;
  json j = load_json_arg(c.config, &base);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (target) {
    if (j.contains("target") && j["target"] != *target) {
      throw ConfigError("config target \"" + j["target"].get<std::string>() + "\" differs from " + *target);
    }
    j["target"] = *target;
  }
  if (c.seed) j["seed"] = *c.seed;
  if (c.tolerance) j["tolerance"] = *c.tolerance;
  if (!c.refinements.empty()) j["refinements"] = parse_refinements(c.refinements);
  return ExperimentConfig::from_json(j, base);
}

int finish_records(const std::vector<VerificationRecord>& records, const Common& c, bool single) {
  json out;
  if (single) {
    out = records.front().to_json();
  } else {
    out = json::array();
    for (const auto& r : records) out.push_back(r.to_json());
  }
  emit(out, c.out);
  if (!c.csv.empty()) write_file_atomic(c.csv, margins_csv(records));
  return exit_code(records);
}

int check_weight(const std::string& spec, const ConditionOptions& opts, const std::string& out) {
  std::filesystem::path base;
  json j = load_json_arg(spec, &base);
  WeightSpec w = [&] {
    try {
      return weight_from_json(j, base);
    } catch (const Error& e) {
      throw InvalidWeightError(e.what());
    } catch (const json::exception& e) {
      throw InvalidWeightError(e.what());
    }
  }();
  json report = {{"weight", w.describe()}, {"pair_condition", to_json(check_pair_condition(w, opts))}};
  if (w.bounded()) {
    report["symmetry"] = to_json(check_symmetry(w, opts));
    report["concave_symmetric_sufficiency"] = to_json(check_concave_symmetric_sufficiency(w, opts));
  }
  auto overall = check_weight_conditions(w, opts);
  report["passed"] = overall.passed;
  emit(report, out);
  return overall.passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decreasing and weighted rearrangements: inequality checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ConditionOptions cond;
  std::string weight_spec, out_path;
  auto* cw = app.add_subcommand("check-weight", "Check the pair and symmetry conditions of a weight");
  cw->add_option("weight", weight_spec, "Weight spec (JSON file or inline)")->required();
  cw->add_option("--grid", cond.grid_count, "Grid nodes");
  cw->add_option("--window", cond.window, "Test window for unbounded domains");
  cw->add_option("--out", out_path, "Output file");

  std::string function_spec;
  auto* r1 = app.add_subcommand("rearrange-1d", "Exact decreasing rearrangement of a piecewise-linear function");
  r1->add_option("function", function_spec, "Function spec (JSON file or inline)")->required();
  r1->add_option("--out", out_path, "Output file");

  Common common;
  std::string target;
  auto* vf = app.add_subcommand("verify", "Run one verification");
  vf->add_option("target", target, "dirichlet-1d|landes|cylinder|weighted|isoperimetric-1d|isoperimetric-w|norms")
      ->required();
  add_common(vf, common);

  auto* ce = app.add_subcommand("counterexample", "Pair-condition violation and its two-interval witness");
  ce->add_option("weight", weight_spec, "Weight spec (JSON file or inline)")->required();
  ce->add_option("--grid", cond.grid_count, "Grid nodes");
  ce->add_option("--window", cond.window, "Test window for unbounded domains");
  ce->add_option("--out", out_path, "Output file");

  std::uint64_t oracle_seed = 1;
  std::size_t samples = 100000;
  int complexity = 1;
  auto* oc = app.add_subcommand("oracle-compare", "Exact rearrangement against the sorting oracle");
  oc->add_option("--seed", oracle_seed, "Generator seed");
  oc->add_option("--samples", samples, "Sample count");
  oc->add_option("--complexity", complexity, "Bumps minus one");
  oc->add_option("--out", out_path, "Output file");

  std::string grid_spec;
  auto* sw = app.add_subcommand("sweep", "Run a config over a parameter grid");
  sw->add_option("--grid", grid_spec, "{\"/json/pointer\": [values]} (JSON file or inline)")->required();
  add_common(sw, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cw->parsed()) return check_weight(weight_spec, cond, out_path);
    if (r1->parsed()) {
      auto u = piecewise_linear_from_json(load_json_arg(function_spec));
      auto exact = rearrange(u.convert<Rational>());
      json pts = json::array();
      for (const auto& [x, v] : exact.points()) pts.push_back({to_string(x), to_string(v)});
      emit({{"rearranged", to_json(exact.convert<double>())}, {"exact_points", pts}}, out_path);
      return 0;
    }
    if (vf->parsed()) {
      if (!parse_target(target)) throw ConfigError("unknown target \"" + target + "\"");
      auto config = make_config(common, target);
      return finish_records({run(config, common.with_timing)}, common, true);
    }
    if (ce->parsed()) {
      auto w = weight_from_json(load_json_arg(weight_spec));
      auto c = find_counterexample(w, cond);
      emit(to_json(c), out_path);
      return 0;
    }
    if (oc->parsed()) {
      auto rep = oracle_compare(oracle_seed, samples, complexity);
      emit(to_json(rep), out_path);
      return rep.passed ? 0 : 2;
    }
    if (sw->parsed()) {
      auto config = make_config(common, std::nullopt);
      auto records = sweep(config, load_json_arg(grid_spec), common.with_timing);
      return finish_records(records, common, false);
    }
  } catch (const InvalidWeightError& e) {
    std::cerr << "invalid weight: " << e.what() << "\n";
    return 3;
  } catch (const WeightConditionError& e) {
    std::cerr << "invalid weight: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
