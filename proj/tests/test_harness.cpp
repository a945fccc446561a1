#include <doctest.h>

#include "rearr/harness.hpp"

using namespace rearr;

namespace {

const json tent = {{"points", {{0, 0}, {1, 1}, {2, 0}}}};

ExperimentConfig config(const json& j) { return ExperimentConfig::from_json(j); }

}  // namespace

TEST_CASE("targets") {
  for (auto t : {Target::Dirichlet1D, Target::Landes, Target::Cylinder, Target::Weighted, Target::Isoperimetric1D,
                 Target::IsoperimetricW, Target::Norms}) {
    CHECK(parse_target(target_name(t)) == t);
  }
  CHECK_FALSE(parse_target("polya").has_value());
}

TEST_CASE("config parsing") {
  auto c = config({{"target", "dirichlet-1d"}, {"function", tent}, {"seed", 7}});
  CHECK(c.seed == 7);
  CHECK(c.refinements == std::vector<int>{8, 16, 32});
  CHECK(ExperimentConfig::from_json(c.to_json()).digest() == c.digest());
  CHECK(c.digest().size() == 16);
  CHECK(config({{"target", "dirichlet-1d"}, {"function", tent}, {"seed", 8}}).digest() != c.digest());

  CHECK_THROWS_AS(config({{"target", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config({{"target", "dirichlet-1d"}}), ConfigError);
  CHECK_THROWS_AS(config({{"target", "dirichlet-1d"}, {"function", tent}, {"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(config({{"target", "cylinder"}, {"function", tent}, {"refinements", {16, 8}}}), ConfigError);
  CHECK_THROWS_AS(config({{"target", "weighted"}, {"function", tent}}), ConfigError);
  CHECK_THROWS_AS(config({{"target", "dirichlet-1d"}, {"function", tent}, {"p", "two"}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("run: one-dimensional targets") {
  auto d = run(config({{"target", "dirichlet-1d"}, {"function", tent}, {"weight", {{"type", "power"}, {"gamma", 1}}}}));
  CHECK(d.passed);
  REQUIRE(d.levels.size() == 1);
  CHECK(d.levels[0].lhs == doctest::Approx(8.0 / 3.0));
  CHECK(d.levels[0].rhs == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(d.wall_seconds.has_value());

  auto l = run(config({{"target", "landes"}, {"function", tent}, {"weight", {{"type", "power"}, {"gamma", 1}}}}), true);
  CHECK(l.passed);
  CHECK(l.wall_seconds.has_value());

  auto iso = run(config({{"target", "isoperimetric-1d"}, {"set", "(1,2)u(3,5)"}, {"weight", {{"type", "power"}, {"gamma", 1}}}}));
  CHECK(iso.passed);
  CHECK(iso.levels[0].margin == 8.0);

  auto gen = run(config({{"target", "isoperimetric-1d"}, {"seed", 1}, {"set", {{"generate", "union"}, {"n", 2}}},
                         {"weight", {{"type", "power"}, {"gamma", 1}}}}));
  CHECK(gen.passed);

  auto bad = config({{"target", "isoperimetric-1d"}, {"set", "(0.999,1.001)"},
                     {"weight", {{"type", "polynomial"}, {"coefficients", {1.5, -2, 1}}}}});
  auto r = run(bad);
  CHECK_FALSE(r.passed);
  CHECK(exit_code({r}) == 2);

  auto rejected = config({{"target", "dirichlet-1d"}, {"function", tent},
                          {"weight", {{"type", "polynomial"}, {"coefficients", {1.5, -2, 1}}}}});
  CHECK_THROWS_AS(run(rejected), InvalidWeightError);
  auto broken = config({{"target", "dirichlet-1d"}, {"function", tent}, {"weight", {{"type", "spline"}}}});
  CHECK_THROWS_AS(run(broken), InvalidWeightError);
}

TEST_CASE("run: cylinder and weighted targets") {
  auto shifted = json{{"generate", "shifted-tent"}, {"a", 1.0}};
  auto c = run(config({{"target", "cylinder"}, {"function", shifted}, {"refinements", {4, 8}}}));
  CHECK(c.passed);
  CHECK(c.converged);
  CHECK(c.levels.size() == 2);

  json profile = {{"w", {{"type", "polynomial"}, {"coefficients", {0, 2}}}}};
  auto w = run(config({{"target", "weighted"}, {"function", shifted}, {"profile", profile}, {"refinements", {4, 8}}}));
  CHECK(w.passed);

  json d = {{"lower", {0}}, {"upper", {1}}, {"resolution", 5}, {"support_bound", 4}};
  json band = {{"domain", d}, {"graph", {{"g1", "0.5"}, {"g2", "1.5 + 0.5*x1"}}}};
  auto iso = run(config({{"target", "isoperimetric-w"}, {"set", band}, {"profile", profile}}));
  CHECK(iso.passed);
  CHECK(iso.levels[0].margin >= 0.0);

  json bad_profile = {{"alpha1", 1}, {"w", {{"type", "expression"}, {"expr", "exp(x)"}}}};
  CHECK_THROWS_AS(run(config({{"target", "isoperimetric-w"}, {"set", band}, {"profile", bad_profile}})),
                  InvalidWeightError);
}

TEST_CASE("determinism") {
  auto c = config({{"target", "dirichlet-1d"}, {"seed", 42}, {"function", {{"generate", "nice"}, {"complexity", 2}}},
                   {"weight", {{"generate", "power"}}}});
  CHECK(run(c).to_json().dump() == run(c).to_json().dump());
  auto s = config({{"target", "cylinder"}, {"function", {{"generate", "shifted-tent"}}}, {"refinements", {4, 8}}});
  CHECK(run(s).to_json().dump() == run(s).to_json().dump());
}

TEST_CASE("sweep") {
  auto base = config({{"target", "dirichlet-1d"}, {"function", tent}, {"weight", {{"type", "power"}, {"gamma", 1}}}});
  auto records = sweep(base, {{"/weight/gamma", {0.5, 1, 2}}});
  REQUIRE(records.size() == 3);
  for (const auto& r : records) CHECK(r.passed);
  CHECK(records[0].digest != records[1].digest);
  CHECK(exit_code(records) == 0);
  CHECK(sweep(base, {{"/weight/gamma", {0.5, 1, 2}}, {"/p", {1, 2}}}).size() == 6);

  auto csv = margins_csv(records);
  CHECK(csv.rfind("target,seed,level,nodes,lhs,rhs,margin,tolerance,passed\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  CHECK_THROWS_AS(sweep(base, json::object()), ConfigError);
  CHECK_THROWS_AS(sweep(base, {{"/weight/gamma", 1}}), ConfigError);
}

TEST_CASE("generators") {
  auto t = generate_nice_function(3, 0);
  CHECK(t.points().size() == 3);
  CHECK(generate_nice_function(3, 2) == generate_nice_function(3, 2));

  auto m = generate_interval_union(1, 2);
  CHECK(m.interval_count() == 2);
  CHECK(verify_isoperimetric_1d(m, WeightSpec::power(1)).passed);

  for (const char* family : {"power", "concave-symmetric", "tabulated"}) {
    auto w = generate_weight(5, family);
    CHECK(check_weight_conditions(w).passed);
    CHECK(weight_to_json(generate_weight(5, family)) == weight_to_json(w));
  }
  CHECK(generate_weight(5, "concave-symmetric").bounded());
  CHECK(generate_weight(5, "concave-symmetric", 2.0).alpha() == 2.0);
  CHECK_THROWS_AS(generate_weight(5, "spiky"), InvalidInput);

  Rng a(9), b(9);
  for (int k = 0; k < 100; ++k) CHECK(a.next() == b.next());
  Rng r(1);
  for (int k = 0; k < 1000; ++k) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    auto i = r.integer(-3, 3);
    CHECK(i >= -3);
    CHECK(i <= 3);
    double d = r.dyadic(0.0, 1.0, 4);
    CHECK(d * 16 == std::floor(d * 16));
  }
}

TEST_CASE("oracle comparison") {
  auto o = oracle_compare(11, 10000);
  CHECK(o.passed);
  CHECK(o.equimeasurable);
  CHECK(o.levels_checked == 100);
  CHECK(o.sup_error <= o.bound);
  CHECK(to_json(o)["passed"] == true);
}

TEST_CASE("counterexample") {
  auto c = find_counterexample(WeightSpec::polynomial({1.5, -2, 1}));
  REQUIRE(c.violation.has_value());
  CHECK(c.violation->first == 1.0);
  CHECK(c.violation->second == 1.0);
  REQUIRE(c.set.has_value());
  CHECK(c.rearranged_perimeter > c.perimeter);
  CHECK(c.rearranged_perimeter == doctest::Approx(1.496004).epsilon(1e-9));
  CHECK(to_json(c)["violation"].size() == 2);

  auto none = find_counterexample(WeightSpec::power(1));
  CHECK_FALSE(none.violation.has_value());
  CHECK_FALSE(none.set.has_value());
}
