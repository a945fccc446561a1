#include <doctest.h>

#include <atomic>
#include <cmath>

#include "rearr/error.hpp"
#include "rearr/expression.hpp"
#include "rearr/numeric.hpp"
#include "rearr/parallel.hpp"
#include "rearr/quadrature.hpp"

using namespace rearr;

TEST_CASE("rational conversion is exact") {
  CHECK(to_rational(0.5) == Rational(1, 2));
  CHECK(to_rational(0.1).get_d() == 0.1);
  CHECK(to_rational(0.1) != Rational(1, 10));
  CHECK(parse_rational("3/2") == Rational(3, 2));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("1e-3") == Rational(1, 1000));
  CHECK(parse_rational("2.5E+2") == Rational(250));
  CHECK_THROWS_AS(parse_rational("1/0"), InvalidInput);
  CHECK_THROWS_AS(parse_rational("abc"), InvalidInput);
  CHECK(parse_double("0.1") == 0.1);
  CHECK(to_string(parse_rational("6/4")) == "3/2");
}

TEST_CASE("power enclosures contain the value") {
  for (double gamma : {0.5, 1.0, 2.0, 1.0 / 3.0, 2.5}) {
    for (double x : {0.25, 1.0, 1.7, 3.0}) {
      auto e = power_enclosure(to_rational(x), gamma, Rational(1));
      double v = std::pow(x, gamma);
      CHECK(e.lo <= to_rational(v) + Rational(1, 1000000000));
      CHECK(e.lo <= e.hi);
      CHECK(std::abs(e.mid() - v) <= 1e-15 * std::max(1.0, v));
    }
  }
  auto sq = power_enclosure(Rational(3, 2), 2.0, Rational(2));
  CHECK(sq.exact());
  CHECK(sq.lo == Rational(9, 2));
  CHECK(power_enclosure(Rational(0), 0.5, Rational(1)).exact());
  CHECK_THROWS_AS(power_enclosure(Rational(1), -0.5, Rational(1)), DomainError);
}

TEST_CASE("adaptive quadrature") {
  auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  auto s = integrate_simpson([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(s.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(gauss_legendre([](double x) { return x * x * x * x; }, 0.0, 2.0, 10) == doctest::Approx(32.0 / 5.0).epsilon(1e-14));
  CHECK(integrate_adaptive([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("triangle quadrature") {
  std::array<double, 2> a{0, 0}, b{1, 0}, c{0, 1};
  auto area = integrate_triangle([](double, double) { return 1.0; }, a, b, c);
  CHECK(area.value == doctest::Approx(0.5).epsilon(1e-14));
  auto m = integrate_triangle([](double x, double y) { return x * y; }, a, b, c);
  CHECK(m.value == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("expressions") {
  Expression e("2*x1 + y^2 - min(x1, y) + abs(-1)", {"x1", "y"});
  std::array<double, 2> v{0.5, 3.0};
  CHECK(e(v) == doctest::Approx(1.0 + 9.0 - 0.5 + 1.0));
  Expression f("exp(x) - 1", {"x"});
  CHECK(f(1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  Expression g("-x^2", {"x"});
  CHECK(g(3.0) == doctest::Approx(-9.0));
  Expression h("2^3^2", {"x"});
  CHECK(h(0.0) == doctest::Approx(512.0));
  CHECK_THROWS_AS(Expression("x +", {"x"}), ParseError);
  CHECK_THROWS_AS(Expression("z", {"x"}), ParseError);
  CHECK(cylinder_variables(3) == std::vector<std::string>{"x1", "x2", "y"});
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) {
    hits[i]++;
    parallel_for(3, [](std::size_t) {});
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw InvalidInput("boom");
                  }),
                  InvalidInput);
  CHECK(worker_budget() >= 1);
}
