#include <doctest.h>

#include "rearr/harness.hpp"
#include "rearr/sets1d.hpp"

using namespace rearr;

namespace {
IntervalUnion U(const char* text, double alpha = kInfinity) { return parse_interval_union(text, alpha); }
}  // namespace

TEST_CASE("measure") {
  CHECK(measure(U("(1,2)u(3,5)")) == 3);
  CHECK(measure(U("")) == 0);
  CHECK(measure(U("(0,4)", 4.0)) == 4);
}

TEST_CASE("rearrange_set") {
  CHECK(rearrange_set(U("(1,2)u(3,5)")) == U("(0,3)"));
  CHECK(rearrange_set(U("(0,7/3)")) == U("(0,7/3)"));
  CHECK(rearrange_set(U("")).empty());
}

TEST_CASE("construction normalises") {
  auto m = U("(3,5)u(1,2)u(2,5/2)");
  CHECK(m.endpoints() == std::vector<Rational>{1, Rational(5, 2), 3, 5});
  CHECK_THROWS_AS(U("(1,3)u(2,4)"), InvalidInput);
  CHECK_THROWS_AS(U("(2,1)"), InvalidInput);
  CHECK_THROWS_AS(U("(1,5)", 4.0), InvalidInput);
  CHECK_THROWS_AS(U("(1,2"), ParseError);
}

TEST_CASE("perimeter") {
  auto id = WeightSpec::power(1);
  CHECK(perimeter_f(U("(1,2)u(3,5)"), id) == 11.0);
  CHECK(perimeter_f(U("(0,3)"), id) == 3.0);
  auto sym = WeightSpec::expression("1 + x*(2-x)", 2.0);
  CHECK(perimeter_f(U("(1/2,2)", 2.0), sym) == doctest::Approx(sym(0.5)));
  CHECK_THROWS_AS(perimeter_f(U("(1,2)", 3.0), sym), InvalidInput);
  auto e = perimeter_f_enclosure(U("(1,2)u(3,5)"), id);
  CHECK(e.exact());
  CHECK(e.lo == 11);
}

TEST_CASE("isoperimetric inequality") {
  auto r = verify_isoperimetric_1d(U("(1,2)u(3,5)"), WeightSpec::power(1));
  CHECK(r.passed);
  CHECK(r.exact);
  CHECK(r.worst_margin == 8.0);

  auto eq = verify_isoperimetric_1d(U("(0,5/7)"), WeightSpec::power(0.5));
  CHECK(eq.passed);
  CHECK(eq.worst_margin == 0.0);

  auto sym = WeightSpec::tabulated({{0, 1}, {0.5, 2}, {1, 1}}, 1.0);
  auto tail = verify_isoperimetric_1d(U("(3/4,1)", 1.0), sym);
  CHECK(tail.passed);
  CHECK(tail.exact);
  CHECK(tail.worst_margin == 0.0);
}

TEST_CASE("necessity witnesses") {
  auto f = WeightSpec::polynomial({1.5, -2, 1});
  auto m = necessity_witness(f, {1.0, 1.0});
  CHECK(to_double(m.endpoints()[0]) == doctest::Approx(0.999));
  CHECK(to_double(m.endpoints()[1]) == doctest::Approx(1.001));
  CHECK(perimeter_f(rearrange_set(m), f) == doctest::Approx(1.496004).epsilon(1e-12));
  CHECK(perimeter_f(m, f) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_FALSE(verify_isoperimetric_1d(m, f).passed);

  CHECK_THROWS_AS(necessity_witness(WeightSpec::power(1), {1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(necessity_witness(f, {0.0, 1.0}), DomainError);

  auto lin = WeightSpec::power(1, 1.0);
  auto s = symmetry_witness(lin, 0.25);
  CHECK(s.endpoints().back() == 1);
  CHECK_FALSE(verify_isoperimetric_1d(s, lin).passed);
}

TEST_CASE("property: complement has the same perimeter") {
  auto w = WeightSpec::tabulated({{0, 1}, {0.5, 1.5}, {1, 2}, {1.5, 1.5}, {2, 1}}, 2.0);
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto m = generate_interval_union(seed, 1 + static_cast<int>(seed % 6), 2.0);
    CHECK(perimeter_f_enclosure(m, w).lo == perimeter_f_enclosure(complement(m), w).lo);
    CHECK(measure(m) + measure(complement(m)) == 2);
  }
}

TEST_CASE("property: generator covers the four endpoint cases") {
  bool seen[2][2] = {};
  for (std::uint64_t seed = 1; seed <= 64; ++seed) {
    auto m = generate_interval_union(seed, 3, 1.0);
    seen[m.endpoints().front() == 0][m.endpoints().back() == 1] = true;
    CHECK(m.interval_count() == 3);
    CHECK(measure(rearrange_set(m)) == measure(m));
  }
  CHECK(seen[0][0]);
  CHECK(seen[0][1]);
  CHECK(seen[1][0]);
  CHECK(seen[1][1]);
}

TEST_CASE("property: random unions satisfy the inequality exactly") {
  std::vector<WeightSpec> weights{WeightSpec::power(0.5), WeightSpec::power(1), WeightSpec::power(2),
                                  WeightSpec::polynomial({2, -2, 1})};
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    weights.push_back(generate_weight(seed, "concave-symmetric"));
    for (const auto& w : weights) {
      auto m = generate_interval_union(seed * 7 + 1, 1 + static_cast<int>(seed % 6), w.alpha());
      auto r = verify_isoperimetric_1d(m, w);
      CHECK(r.exact);
      CHECK_MESSAGE(r.passed, w.describe(), " ", format_interval_union(m), " ", r.worst_margin);
    }
    weights.pop_back();
  }
}
