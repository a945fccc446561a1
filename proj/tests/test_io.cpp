#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rearr/io.hpp"

using namespace rearr;

TEST_CASE("extent") {
  CHECK(extent_from_json("inf") == kInfinity);
  CHECK(extent_from_json(2.5) == 2.5);
  CHECK(extent_to_json(kInfinity) == "inf");
  CHECK(extent_to_json(3.0) == 3.0);
  CHECK_THROWS(extent_from_json("big"));
}

TEST_CASE("weight csv") {
  std::istringstream good("x,f\n0,1\n0.5,2\n1,1\n");
  auto nodes = read_weight_csv(good);
  REQUIRE(nodes.size() == 3);
  CHECK(nodes[1] == std::pair<double, double>{0.5, 2.0});

  std::istringstream header("a,b\n0,1\n");
  CHECK_THROWS_AS(read_weight_csv(header), InvalidInput);
  std::istringstream garbage("x,f\n0,one\n");
  CHECK_THROWS_AS(read_weight_csv(garbage), InvalidInput);
  std::istringstream unsorted("x,f\n0,1\n1,2\n0.5,1\n");
  CHECK_THROWS_AS(read_weight_csv(unsorted), InvalidInput);
}

TEST_CASE("weight round trip") {
  std::vector<WeightSpec> weights{WeightSpec::power(0.5), WeightSpec::power(2, 3.0, 1.5),
                                  WeightSpec::polynomial({2, -2, 1}), WeightSpec::constant(1.0, 2.0),
                                  WeightSpec::tabulated({{0, 1}, {1, 2}, {2, 1}}, 2.0),
                                  WeightSpec::expression("1 + x*(1-x)", 1.0)};
  for (const auto& w : weights) {
    auto j = weight_to_json(w);
    auto back = weight_from_json(j);
    CHECK(weight_to_json(back) == j);
    CHECK(back.alpha() == w.alpha());
    for (double x : {0.0, 0.25, 0.5, 1.0}) CHECK(back(x) == w(x));
  }
  CHECK_THROWS(weight_from_json(json{{"type", "spline"}}));
  CHECK_THROWS(weight_from_json(json{{"type", "power"}}));
}

TEST_CASE("tabulated weight from a csv file") {
  auto dir = std::filesystem::temp_directory_path() / "rearr_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "w.csv");
    out << "x,f\n0,1\n1,3\n2,2\n";
  }
  auto w = weight_from_json(json{{"type", "tabulated"}, {"csv", "w.csv"}, {"alpha", 2}}, dir);
  CHECK(w(0.5) == 2.0);
  CHECK_THROWS(weight_from_json(json{{"type", "tabulated"}, {"csv", "missing.csv"}}, dir));
  std::filesystem::remove_all(dir);
}

TEST_CASE("piecewise linear round trip") {
  PiecewiseLinear1D u({{0, 0}, {1, 1}, {2, 0}}, 3.0);
  auto j = to_json(u);
  CHECK(j["alpha"] == 3.0);
  CHECK(piecewise_linear_from_json(j) == u);
  CHECK(piecewise_linear_from_json(json{{"points", {{0, 1}, {2, 0}}}}).alpha() == std::nullopt);
  CHECK_THROWS(piecewise_linear_from_json(json{{"points", {{0, -1}, {2, 0}}}}));
}

TEST_CASE("interval unions") {
  auto m = parse_interval_union("(1,2)u(3,5)");
  CHECK(m.interval_count() == 2);
  CHECK(format_interval_union(m) == "(1,2)u(3,5)");
  CHECK(format_interval_union(parse_interval_union(" (1/3, 1/2) U (3/4,1) ", 1.0)) == "(1/3,1/2)u(3/4,1)");
  CHECK(parse_interval_union("").empty());
  CHECK(parse_interval_union("{}").empty());
  CHECK(interval_union_from_json(to_json(m)) == m);
  CHECK(interval_union_from_json(json::array({{1, 2}, {3, 5}})) == m);
  CHECK(interval_union_from_json("(0.5,1)") == parse_interval_union("(1/2,1)"));
  CHECK_THROWS_AS(parse_interval_union("(1,2)(3,4)"), ParseError);
  CHECK_THROWS_AS(parse_interval_union("(a,2)"), ParseError);
}

TEST_CASE("domains and column functions") {
  json d = {{"lower", {0}}, {"upper", {1}}, {"resolution", 5}, {"support_bound", 2}};
  auto dom = domain_from_json(d);
  CHECK(dom.resolution == 5);
  CHECK(dom.alpha == kInfinity);
  CHECK(domain_from_json(to_json(dom)).support_bound == 2.0);

  auto u = column_function_from_json({{"domain", d}, {"expression", "min(y, 2 - y)"}, {"y_nodes", 9}});
  CHECK(u.columns().size() == 5);
  CHECK(u.column(0)(1.0) == 1.0);
  CHECK(u.column(0)(0.5) == 0.5);
  CHECK(column_function_from_json({{"domain", d}, {"expression", "min(y, 2 - y)"}}, 9).columns().size() == 9);

  json cols = json::array();
  for (int k = 0; k < 5; ++k) cols.push_back(json::array({{0, 0}, {1, 1}, {2, 0}}));
  auto e = column_function_from_json({{"domain", d}, {"columns", cols}});
  CHECK(e.column(4) == PiecewiseLinear1D({{0, 0}, {1, 1}, {2, 0}}));
  CHECK_THROWS(column_function_from_json({{"domain", d}}));
  CHECK_THROWS(column_function_from_json({{"domain", d}, {"columns", json::array({cols[0]})}}));
}

TEST_CASE("profiles and sets") {
  auto P = profile_from_json({{"w", {{"type", "polynomial"}, {"coefficients", {0, 2}}}}});
  CHECK(P.W(2.0) == 4.0);
  CHECK_THROWS_AS(profile_from_json({{"alpha1", 1}, {"w", {{"type", "expression"}, {"expr", "exp(x)"}}}}),
                  WeightConditionError);
  auto loose = profile_from_json(
      {{"alpha1", 1}, {"w", {{"type", "expression"}, {"expr", "exp(x)"}}}, {"enforce_conditions", false}});
  CHECK(loose.alpha() == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));

  json d = {{"lower", {0}}, {"upper", {1}}, {"resolution", 5}, {"support_bound", 4}};
  auto g = weighted_set_from_json({{"domain", d}, {"graph", {{"g1", 0}, {"g2", "1 + x1"}}}});
  CHECK(g.is_subgraph());
  const auto& graph = std::get<layout::Graph>(g.layout());
  CHECK(graph.g2.back() == 2.0);
  auto c = weighted_set_from_json({{"domain", d}, {"cells", {"(1,2)", "", "(0,1)", "(1,2)u(3,4)"}}});
  CHECK(c.cell_count() == 4);
  CHECK_THROWS(weighted_set_from_json({{"domain", d}, {"cells", {"(1,2)"}}}));
}

TEST_CASE("reports") {
  ConditionReport r;
  r.passed = false;
  r.worst_margin = -0.5;
  r.witness = {1.0, 1.0};
  auto j = to_json(r);
  CHECK(j["passed"] == false);
  CHECK(j["worst_margin"] == -0.5);
  CHECK(j["witness"] == json::array({1.0, 1.0}));

  RefinementReport rr;
  rr.levels.push_back({8, 0.125, 2.0, 1.0, 1.0, 1e-3, true});
  auto jr = to_json(rr);
  CHECK(jr["levels"].size() == 1);
  CHECK(jr["levels"][0]["nodes"] == 8);
}

TEST_CASE("files") {
  auto dir = std::filesystem::temp_directory_path() / "rearr_io_files";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.json", "{\"x\": 1}");
  CHECK(read_json_file(dir / "a.json")["x"] == 1);
  write_file_atomic(dir / "a.json", "{\"x\": 2}");
  CHECK(read_json_file(dir / "a.json")["x"] == 2);
  write_file_atomic(dir / "bad.json", "{");
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), InvalidInput);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), InvalidInput);
  std::filesystem::remove_all(dir);
}
