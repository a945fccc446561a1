#include <doctest.h>

#include <cmath>

#include "rearr/cylinder.hpp"
#include "rearr/harness.hpp"

using namespace rearr;

namespace {

CylinderDomain unit_strip(int nodes, double support = 2.0) {
  CylinderDomain d;
  d.lower = {0.0};
  d.upper = {1.0};
  d.resolution = nodes;
  d.support_bound = support;
  return d;
}

PiecewiseLinear1D tent() { return PiecewiseLinear1D({{0, 0}, {1, 1}, {2, 0}}); }

ColumnFunction flat_tent(int nodes) {
  return ColumnFunction::from_columns(unit_strip(nodes), [](std::span<const double>) { return tent(); });
}

ColumnSource flat_source() {
  return [](int nodes) { return flat_tent(nodes); };
}

const WeightSpec one = WeightSpec::constant(1.0);

}  // namespace

TEST_CASE("domain validation") {
  CylinderDomain d = unit_strip(5);
  CHECK_NOTHROW(d.validate());
  CHECK(d.column_count() == 5);
  CHECK(d.spacing(0) == 0.25);
  CHECK(d.xprime_measure() == 1.0);
  CHECK(d.quadrature_weight(0) == 0.125);
  CHECK(d.quadrature_weight(2) == 0.25);

  d.resolution = 1;
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  CylinderDomain flat = unit_strip(5);
  flat.upper = {0.0};
  CHECK_THROWS_AS(flat.validate(), InvalidInput);

  CylinderDomain box;
  box.lower = {0.0, 0.0};
  box.upper = {1.0, 2.0};
  box.resolution = 3;
  CHECK(box.column_count() == 9);
  CHECK(box.xprime_measure() == 2.0);
  CHECK(box.node(5) == std::vector<double>{0.5, 2.0});
  std::vector<int> idx{1, 2};
  CHECK(box.flat_index(idx) == 5);
}

TEST_CASE("column function validation") {
  auto d = unit_strip(3);
  CHECK_THROWS_AS(ColumnFunction(d, {tent(), tent()}), InvalidInput);
  auto wide = PiecewiseLinear1D({{0, 0}, {2, 1}, {4, 0}});
  CHECK_THROWS_AS(ColumnFunction(d, {tent(), wide, tent()}), InvalidInput);
  Expression bad("1 - y/4", cylinder_variables(2));
  CHECK_THROWS_AS(ColumnFunction::from_expression(d, bad, 17), InvalidInput);
}

TEST_CASE("rearrange columns") {
  auto r = rearrange_columns(flat_tent(9));
  for (const auto& c : r.columns()) CHECK(c == PiecewiseLinear1D({{0, 1}, {2, 0}}));
  CHECK(rearrange_columns(r).columns() == r.columns());

  auto shifted = shifted_tent_source(1.0)(5);
  auto s = rearrange_columns(shifted);
  for (const auto& c : s.columns()) {
    CHECK(c.is_nonincreasing());
    CHECK(c(0.0) == 1.0);
    CHECK(c(2.0) == 0.0);
  }

  auto trap = ColumnFunction::from_columns(unit_strip(5, 3.0), [](std::span<const double> x) {
    double s0 = x[0];
    return PiecewiseLinear1D({{s0, 0}, {s0 + 0.5, 1}, {s0 + 1.5, 1}, {s0 + 2, 0}});
  });
  auto trap_star = rearrange_columns(trap);
  for (const auto& c : trap_star.columns()) CHECK(c == PiecewiseLinear1D({{0, 1}, {1, 1}, {2, 0}}));
}

TEST_CASE("discrete gradient") {
  double a = 0.75;
  auto u = ColumnFunction::from_columns(unit_strip(5), [a](std::span<const double> x) {
    double s = 1.0 + a * x[0];
    return PiecewiseLinear1D({{0, 0}, {1, s}, {2, 0}});
  });
  for (std::size_t col : {std::size_t{0}, std::size_t{2}, std::size_t{4}}) {
    double s = 1.0 + a * u.domain().node(col)[0];
    for (const auto& g : discrete_gradient(u, col)) {
      double tent_y = g.y < 1.0 ? g.y : 2.0 - g.y;
      CHECK(g.grad_prime.at(0) == doctest::Approx(a * tent_y).epsilon(1e-12));
      CHECK(std::abs(g.uy) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  for (const auto& g : discrete_gradient(flat_tent(5), 1)) CHECK(g.grad_prime.at(0) == 0.0);
}

TEST_CASE("functional reduces to one dimension") {
  auto G = IntegrandND::euclidean_power(2);
  auto v = functional_nd(flat_tent(9), one, G);
  CHECK(v.value == doctest::Approx(2.0).epsilon(1e-12));
  auto r = functional_nd(rearrange_columns(flat_tent(9)), one, G);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));

  auto zero = ColumnFunction::from_columns(unit_strip(3), [](std::span<const double>) { return PiecewiseLinear1D(); });
  CHECK(functional_nd(zero, one, G).value == 0.0);

  auto G3 = IntegrandND::euclidean_power(3);
  auto id = WeightSpec::power(1);
  double lhs = dirichlet_functional(tent(), id, Integrand1D::power(3));
  CHECK(functional_nd(flat_tent(5), id, G3).value == doctest::Approx(lhs).epsilon(1e-10));
}

TEST_CASE("functional of a tilted tent") {
  // u = (1 + a x1) tent(y): |grad u|^2 = a^2 tent^2 + (1 + a x1)^2
  double a = 0.5;
  auto u = ColumnFunction::from_columns(unit_strip(33), [a](std::span<const double> x) {
    return PiecewiseLinear1D({{0, 0}, {1, 1.0 + a * x[0]}, {2, 0}});
  });
  double exact = a * a * 2.0 / 3.0 + 2.0 * (1.0 + a + a * a / 3.0);
  auto v = functional_nd(u, one, IntegrandND::euclidean_power(2));
  CHECK(v.value == doctest::Approx(exact).epsilon(1e-3));
}

TEST_CASE("norms are preserved") {
  auto u = shifted_tent_source(0.8)(9);
  auto s = rearrange_columns(u);
  for (double p : {1.0, 2.0, 3.0}) CHECK(lp_integral(s, p) == doctest::Approx(lp_integral(u, p)).epsilon(1e-12));
}

TEST_CASE("p-norm inequality") {
  auto flat = verify_p_norm_corollary(flat_source(), one, 2.0);
  CHECK(flat.passed);
  CHECK(flat.converged);
  REQUIRE(flat.levels.size() == 3);
  for (const auto& l : flat.levels) {
    CHECK(l.lhs == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(l.rhs == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(l.margin == doctest::Approx(1.5).epsilon(1e-10));
  }

  ColumnSource ramp = [](int nodes) {
    return ColumnFunction::from_columns(unit_strip(nodes), [](std::span<const double> x) {
      return PiecewiseLinear1D({{0, 1 + x[0]}, {2, 0}});
    });
  };
  for (const auto& l : verify_p_norm_corollary(ramp, one, 2.0).levels) CHECK(std::abs(l.margin) <= 1e-12);

  auto shifted = verify_p_norm_corollary(shifted_tent_source(1.0), WeightSpec::power(1), 3.0);
  CHECK(shifted.passed);
  CHECK(shifted.converged);
  for (const auto& l : shifted.levels) CHECK(l.margin > 0.0);

  CHECK_THROWS_AS(verify_p_norm_corollary(flat_source(), one, 1.0), InvalidInput);
}

TEST_CASE("cylinder inequality with three-dimensional columns") {
  auto r = verify_polya_szego_cylinder(shifted_tent_source(0.5, 3), one, IntegrandND::euclidean_power(2),
                                       {{4, 8}, std::nullopt});
  CHECK(r.passed);
  CHECK(r.converged);
}

TEST_CASE("cylinder inequality rejects bad weights and integrands") {
  auto bad = WeightSpec::polynomial({1.5, -2, 1});
  CHECK_THROWS_AS(verify_p_norm_corollary(flat_source(), bad, 2.0), WeightConditionError);
  IntegrandND concave(integrand_nd::Separable{"-|z'| + zN", [](std::span<const double> z) { return -std::abs(z[0]); },
                                              [](double z) { return z; }},
                      {false, true});
  CHECK_THROWS_AS(verify_polya_szego_cylinder(flat_source(), one, concave), InvalidInput);
}

TEST_CASE("refinement assessment") {
  RefinementOptions opts;
  opts.kappa = 1.0;
  std::vector<LevelReport> shrinking{{8, 0.125, 1.0, 1.01}, {16, 0.0625, 1.0, 1.004}};
  auto ok = assess_refinement(shrinking, 0.0, opts);
  CHECK(ok.passed);
  CHECK(ok.converged);

  std::vector<LevelReport> stuck{{8, 0.125, 1.0, 1.01}, {16, 0.0625, 1.0, 1.01}};
  auto bad = assess_refinement(stuck, 0.0, opts);
  CHECK(bad.passed);
  CHECK_FALSE(bad.converged);

  opts.kappa = 1e-3;
  CHECK_FALSE(assess_refinement(shrinking, 0.0, opts).passed);
}

TEST_CASE("growth validation") {
  CHECK(validate_growth(IntegrandND::euclidean_power(2), 1.0, 2.0, 2000).passed);
  IntegrandND ex(integrand_nd::Custom{"exp|z|",
                                      [](std::span<const double> zp, double zN, double, std::span<const double>) {
                                        return std::exp(std::hypot(zp[0], zN));
                                      }},
                 {true, true});
  CHECK_FALSE(validate_growth(ex, 10.0, 4.0, 2000).passed);
  IntegrandND zero(integrand_nd::Custom{"0", [](auto, double, double, auto) { return 0.0; }}, {true, true});
  CHECK(validate_growth(zero, 1.0, 2.0, 500).passed);
  CHECK_THROWS_AS(validate_growth(zero, 0.0, 2.0, 10), InvalidInput);
}

TEST_CASE("property: columns match the exact one-dimensional rearrangement") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto d = unit_strip(5, 1e6);
    auto u = ColumnFunction::from_columns(d, [&](std::span<const double> x) {
      return generate_nice_function(seed * 101 + static_cast<std::uint64_t>(x[0] * 4), static_cast<int>(seed % 3));
    });
    auto s = rearrange_columns(u);
    for (std::size_t i = 0; i < u.columns().size(); ++i) {
      auto exact = rearrange(u.column(i).convert<Rational>());
      auto approx = exact.convert<double>();
      REQUIRE(s.column(i).points().size() == approx.points().size());
      for (std::size_t k = 0; k < approx.points().size(); ++k) {
        CHECK(s.column(i).points()[k].first == doctest::Approx(approx.points()[k].first).epsilon(1e-14));
        CHECK(s.column(i).points()[k].second == approx.points()[k].second);
      }
      for (int k = 1; k < 16; ++k) {
        double c = u.column(i).max_value() * k / 16.0;
        CHECK(distribution(s.column(i), c) == doctest::Approx(distribution(u.column(i), c)).epsilon(1e-14));
      }
    }
  }
}
