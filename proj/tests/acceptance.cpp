// Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
// tolerance and wall-time limit. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rearr/harness.hpp"

using namespace rearr;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

bool criterion(int id, const char* name, double limit_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= limit_seconds) out.require(false, "time limit");
  std::printf("%s %d %s:%s time=%.2fs/%.0fs\n", out.passed ? "PASS" : "FAIL", id, name, out.detail.str().c_str(),
              elapsed, limit_seconds);
  std::fflush(stdout);
  return out.passed;
}

// ---------------------------------------------------------------------------

void isoperimetric_exactness(Outcome& out) {
  std::vector<WeightSpec> weights{WeightSpec::power(0.5), WeightSpec::power(1), WeightSpec::power(2),
                                  WeightSpec::polynomial({2, -2, 1})};
  for (std::uint64_t k = 0; k < 3; ++k) weights.push_back(generate_weight(1000 + k, "concave-symmetric", 1.0 + k % 2));
  constexpr int kUnions = 10000;
  std::size_t checks = 0, failures = 0, inexact = 0;
  double worst = kInfinity;
  for (int i = 0; i < kUnions; ++i) {
    int n = 1 + i % 6;
    for (const auto& w : weights) {
      auto m = generate_interval_union(static_cast<std::uint64_t>(i) + 1, n, w.alpha());
      auto r = verify_isoperimetric_1d(m, w, 0.0);
      ++checks;
      if (!r.exact) ++inexact;
      if (!r.passed || r.worst_margin < 0.0) ++failures;
      worst = std::min(worst, r.worst_margin);
    }
  }
  out.detail << " checks=" << checks << " worst_margin=" << worst << " inexact=" << inexact;
  out.require(failures == 0, "negative margin");
  out.require(inexact == 0, "undecided in exact arithmetic");
}

void counterexample(Outcome& out) {
  auto f = WeightSpec::polynomial({1.5, -2, 1});
  auto c = find_counterexample(f);
  out.require(c.violation.has_value(), "no pair-condition violation");
  if (!c.violation) return;
  auto [x1, x2] = *c.violation;
  out.detail << " witness=(" << x1 << "," << x2 << ") P(M)=" << c.perimeter << " P(M*)=" << c.rearranged_perimeter;
  out.require(std::abs(x1 - 1.0) <= 0.05 && std::abs(x2 - 1.0) <= 0.05, "witness not near (1,1)");
  out.require(c.rearranged_perimeter > c.perimeter, "P(M*) <= P(M)");
  out.require(c.set && !verify_isoperimetric_1d(*c.set, f).passed, "exact check does not flag the set");
}

void rearrangement_oracle(Outcome& out) {
  constexpr int kFunctions = 1000;
  constexpr std::size_t kSamples = 100000;
  int failures = 0, non_equimeasurable = 0;
  double worst_ratio = 0.0;
  for (int k = 1; k <= kFunctions; ++k) {
    auto r = oracle_compare(static_cast<std::uint64_t>(k), kSamples, k % 2, 100);
    if (!r.passed) ++failures;
    if (!r.equimeasurable || r.levels_checked != 100) ++non_equimeasurable;
    worst_ratio = std::max(worst_ratio, r.sup_error / r.bound);
  }
  out.detail << " functions=" << kFunctions << " samples=" << kSamples << " worst_error/bound=" << worst_ratio;
  out.require(failures == 0, "sup error above 2 Lip support / samples");
  out.require(non_equimeasurable == 0, "distribution mismatch");
}

void dirichlet_landes(Outcome& out) {
  constexpr double kRel = 1e-9;
  PiecewiseLinear1D tent({{0, 0}, {1, 1}, {2, 0}});
  auto G2 = Integrand1D::power(2);
  auto one = WeightSpec::constant(1.0);
  auto id = WeightSpec::power(1);
  auto d1 = verify_dirichlet_1d(tent, one, G2);
  auto d2 = verify_dirichlet_1d(tent, id, G2);
  auto l = verify_landes(tent, id, G2);
  double oracle_err = std::max({relative_error(d1.lhs, 2.0), relative_error(d1.rhs, 0.5),
                                relative_error(d2.lhs, 8.0 / 3.0), relative_error(d2.rhs, 2.0 / 3.0),
                                relative_error(l.lhs, 2.0), relative_error(l.rhs, 0.5)});
  out.detail << " oracle_rel_error=" << oracle_err;
  out.require(oracle_err <= kRel, "tent closed forms");

  const std::vector<Integrand1D> integrands{Integrand1D::power(1), Integrand1D::power(2), Integrand1D::power(3)};
  constexpr int kCases = 1000;
  const char* families[] = {"power", "tabulated", "concave-symmetric"};
  double worst = kInfinity;
  int failures = 0;
  for (int k = 0; k < kCases; ++k) {
    auto seed = static_cast<std::uint64_t>(k) + 1;
    auto w = generate_weight(seed, families[k % 3]);
    auto u = generate_nice_function(seed * 7919, k % 4, w.alpha());
    const auto& G = integrands[k % 3];
    for (const auto& r : {verify_dirichlet_1d(u, w, G), verify_landes(u, w, G)}) {
      double scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
      double normalised = r.margin / scale;
      worst = std::min(worst, normalised);
      if (normalised < -1e-9) ++failures;
    }
  }
  out.detail << " cases=" << kCases << " worst_margin/scale=" << worst;
  out.require(failures == 0, "margin below -1e-9 scale");
}

void cylinder(Outcome& out) {
  int ladders = 0, failures = 0;
  double worst = kInfinity;
  for (double a : {0.25, 0.5, 1.0}) {
    for (const auto& f : {WeightSpec::constant(1.0), WeightSpec::power(1)}) {
      for (double p : {2.0, 3.0}) {
        auto r = verify_p_norm_corollary(shifted_tent_source(a), f, p);
        ++ladders;
        if (!r.passed || !r.converged || r.levels.size() != 3) ++failures;
        for (const auto& lv : r.levels) worst = std::min(worst, lv.margin + lv.tolerance);
      }
    }
  }
  out.detail << " ladders=" << ladders << " min(margin+tol)=" << worst;
  out.require(failures == 0, "margin below -tol(h) or not shrinking");

  PiecewiseLinear1D tent({{0, 0}, {1, 1}, {2, 0}});
  auto tent_star = rearrange(tent.convert<Rational>()).convert<double>();
  ColumnSource flat = [&](int nodes) {
    CylinderDomain d;
    d.lower = {0.0};
    d.upper = {1.0};
    d.resolution = nodes;
    d.support_bound = 2.0;
    return ColumnFunction::from_columns(d, [&](std::span<const double>) { return tent; });
  };
  double reduction = 0.0;
  for (const auto& f : {WeightSpec::constant(1.0), WeightSpec::power(1)}) {
    for (double p : {2.0, 3.0}) {
      auto G = Integrand1D::power(p);
      double lhs = dirichlet_functional(tent, f, G), rhs = dirichlet_functional(tent_star, f, G);
      for (const auto& lv : verify_p_norm_corollary(flat, f, p).levels) {
        reduction = std::max({reduction, relative_error(lv.lhs, lhs), relative_error(lv.rhs, rhs)});
      }
    }
  }
  out.detail << " reduction_rel_error=" << reduction;
  out.require(reduction <= 1e-10, "x'-independent input differs from 1D");
}

void weighted_consistency(Outcome& out) {
  constexpr double kRel = 1e-10;
  WeightProfile unit(WeightSpec::constant(1.0));
  WeightProfile linear(WeightSpec::polynomial({0, 2}));
  auto G = IntegrandND::euclidean_power(2);

  double consistency = 0.0;
  for (double a : {0.5, 1.0}) {
    auto w = verify_weighted_dirichlet(shifted_tent_source(a), unit, G);
    auto c = verify_polya_szego_cylinder(shifted_tent_source(a), WeightSpec::constant(1.0), G);
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      consistency = std::max({consistency, relative_error(w.levels.at(k).lhs, c.levels[k].lhs),
                              relative_error(w.levels.at(k).rhs, c.levels[k].rhs)});
    }
  }
  auto sets = parse_interval_union("(1,2)u(3,5)");
  CylinderDomain strip;
  strip.lower = {0.0};
  strip.upper = {1.0};
  strip.resolution = 2;
  strip.support_bound = 10.0;
  auto r1 = w_rearrange_set(WeightedSetND(strip, layout::Cells{{sets}}), unit);
  bool set_match = std::get<layout::Cells>(r1.layout()).sections.at(0) == rearrange_set(sets);
  out.detail << " w=1_rel_error=" << consistency;
  out.require(consistency <= kRel, "w = 1 differs from the unweighted ladder");
  out.require(set_match, "w = 1 set rearrangement differs from 1D");

  auto band = w_rearrange_set(WeightedSetND(strip, layout::Cells{{parse_interval_union("(1,2)")}}), linear);
  double h = to_double(std::get<layout::Cells>(band.layout()).sections.at(0).endpoints().at(1));
  out.detail << " h_err=" << std::abs(h - std::sqrt(3.0));
  out.require(relative_error(h, std::sqrt(3.0)) <= kRel, "h != sqrt 3");

  strip.resolution = 9;
  strip.support_bound = 3.0;
  auto v = shifted_tent_source(1.0)(9);
  auto tv = w_rearrange(v, linear);
  Rng rng(2024);
  std::vector<std::pair<double, double>> bands;
  for (int k = 0; k < 100; ++k) {
    double a = rng.uniform(1e-3, 0.99);
    bands.emplace_back(a, rng.uniform(a + 1e-3, 1.2));
  }
  auto slice = verify_slice_preservation(v, tv, linear, bands, 1e-9);
  out.detail << " bands=100 worst_slice_error=" << -slice.worst_margin;
  out.require(slice.passed, "slice measure differs by more than 1e-9");
}

void norms_and_perimeter(Outcome& out) {
  WeightProfile linear(WeightSpec::polynomial({0, 2}));
  int ladders = 0, failures = 0;
  for (double a : {0.5, 1.0}) {
    for (double p : {1.0, 2.0, 3.0}) {
      auto r = verify_norm_inequality(shifted_tent_source(a), linear, p);
      ++ladders;
      if (!r.passed || !r.converged) ++failures;
    }
  }
  out.detail << " norm_ladders=" << ladders;
  out.require(failures == 0, "norm inequality");

  std::vector<const WeightProfile*> profiles{&linear};
  WeightProfile unit(WeightSpec::constant(1.0));
  WeightProfile cubic(WeightSpec::power(2));
  profiles.push_back(&unit);
  profiles.push_back(&cubic);
  CylinderDomain d;
  d.lower = {0.0};
  d.upper = {1.0};
  d.resolution = 9;
  d.support_bound = 10.0;
  Rng rng(77);
  double worst = kInfinity;
  int sets = 0, set_failures = 0;
  for (int k = 0; k < 30; ++k) {
    std::vector<double> g1, g2;
    for (int i = 0; i < d.resolution; ++i) {
      g1.push_back(rng.uniform(0.0, 1.0));
      g2.push_back(g1.back() + rng.uniform(0.2, 2.0));
    }
    WeightedSetND m(d, layout::Graph{g1, g2});
    for (const auto* P : profiles) {
      auto r = verify_isoperimetric_w(m, *P, 1e-8);
      ++sets;
      worst = std::min(worst, r.margin);
      if (!r.passed) ++set_failures;
    }
  }
  WeightedSetND sub(d, layout::Graph{std::vector<double>(9, 0.0), {1, 1.5, 2, 1.2, 0.8, 1, 1.4, 1.1, 0.9}});
  double fixed = verify_isoperimetric_w(sub, linear).margin;
  out.detail << " graph_sets=" << sets << " worst_margin=" << worst << " subgraph_margin=" << fixed;
  out.require(set_failures == 0, "graph perimeter inequality");
  out.require(fixed == 0.0, "subgraph is not a fixed point");
}

void jensen_step_property(Outcome& out) {
  std::vector<WeightSpec> weights{WeightSpec::power(0.5), WeightSpec::power(1), WeightSpec::power(2),
                                  WeightSpec::polynomial({2, -2, 1}), generate_weight(3, "concave-symmetric", 1.0),
                                  generate_weight(4, "concave-symmetric", 2.0)};
  const std::vector<Integrand1D> integrands{Integrand1D::power(1), Integrand1D::power(2), Integrand1D::power(3)};
  constexpr int kTuples = 100000;
  Rng rng(8);
  int tested = 0, skipped = 0, failures = 0;
  double worst = kInfinity;
  std::vector<double> x, b;
  for (int k = 0; k < kTuples; ++k) {
    const auto& w = weights[k % weights.size()];
    double top = w.bounded() ? w.alpha() : 8.0;
    int n = 1 + static_cast<int>(rng.integer(0, 4));
    x.resize(n);
    b.resize(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.uniform(0.0, top);
      b[i] = rng.uniform(0.05, 4.0);
    }
    std::sort(x.begin(), x.end());
    if (!check_alternating_sum(w, x).passed) {
      ++skipped;
      continue;
    }
    ++tested;
    for (const auto& G : integrands) {
      auto s = jensen_step(x, b, w, G);
      double rel = (s.T - s.T_star) / std::max(std::abs(s.T), 1e-300);
      worst = std::min(worst, rel);
      if (rel < -1e-12) ++failures;
    }
  }
  out.detail << " tuples=" << kTuples << " tested=" << tested << " skipped=" << skipped
             << " worst_rel_margin=" << worst;
  out.require(failures == 0, "T < T*");
  out.require(tested >= kTuples / 2, "too few tuples satisfy the hypothesis");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion(1, "isoperimetric-exactness", 10, isoperimetric_exactness);
  ok &= criterion(2, "counterexample", 1, counterexample);
  ok &= criterion(3, "rearrangement-oracle", 60, rearrangement_oracle);
  ok &= criterion(4, "dirichlet-landes-1d", 120, dirichlet_landes);
  ok &= criterion(5, "cylinder", 300, cylinder);
  ok &= criterion(6, "weighted-consistency", 120, weighted_consistency);
  ok &= criterion(7, "norms-and-perimeter", 300, norms_and_perimeter);
  ok &= criterion(8, "jensen-step", 10, jensen_step_property);
  return ok ? 0 : 1;
}
