#include "rearr/sets1d.hpp"

#include <algorithm>
#include <sstream>

namespace rearr {

namespace {

Extent<Rational> rational_alpha(double alpha) {
  if (alpha == kInfinity) return std::nullopt;
  return to_rational(alpha);
}

void require_same_domain(const IntervalUnion& m, const WeightSpec& w) {
  bool same = m.alpha() ? (w.bounded() && to_rational(w.alpha()) == *m.alpha()) : !w.bounded();
  if (!same) throw InvalidInput("interval union and weight live on different domains");
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<std::pair<Rational, Rational>> intervals, Extent<Rational> alpha)
    : alpha_(std::move(alpha)) {
  if (alpha_ && *alpha_ <= 0) throw InvalidInput("interval union needs alpha > 0");
  if (alpha_) alpha_->canonicalize();
  for (auto& [a, b] : intervals) {
    a.canonicalize();
    b.canonicalize();
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& [a, b] : intervals) {
    if (!(a < b)) throw InvalidInput("interval (" + to_string(a) + ", " + to_string(b) + ") is empty or reversed");
    if (a < 0 || (alpha_ && b > *alpha_)) {
      throw InvalidInput("interval (" + to_string(a) + ", " + to_string(b) + ") leaves the domain");
    }
    if (!endpoints_.empty()) {
      if (a < endpoints_.back()) throw InvalidInput("intervals overlap");
      if (a == endpoints_.back()) {
        endpoints_.back() = b;
        continue;
      }
    }
    endpoints_.push_back(a);
    endpoints_.push_back(b);
  }
}

IntervalUnion IntervalUnion::from_doubles(const std::vector<std::pair<double, double>>& intervals, double alpha) {
  std::vector<std::pair<Rational, Rational>> exact;
  exact.reserve(intervals.size());
  for (const auto& [a, b] : intervals) exact.emplace_back(to_rational(a), to_rational(b));
  return IntervalUnion(std::move(exact), rational_alpha(alpha));
}

std::vector<Rational> IntervalUnion::interior_boundary() const {
  std::vector<Rational> out;
  for (const auto& x : endpoints_) {
    if (x > 0 && (!alpha_ || x < *alpha_)) out.push_back(x);
  }
  return out;
}

Rational measure(const IntervalUnion& m) {
  Rational total(0);
  for (std::size_t j = 0; j < m.interval_count(); ++j) {
    auto [a, b] = m.interval(j);
    total += b - a;
  }
  return total;
}

IntervalUnion rearrange_set(const IntervalUnion& m) {
  if (m.empty()) return IntervalUnion(m.alpha());
  return IntervalUnion({{Rational(0), measure(m)}}, m.alpha());
}

IntervalUnion complement(const IntervalUnion& m) {
  std::vector<std::pair<Rational, Rational>> out;
  Rational cursor(0);
  for (std::size_t j = 0; j < m.interval_count(); ++j) {
    auto [a, b] = m.interval(j);
    if (cursor < a) out.emplace_back(cursor, a);
    cursor = b;
  }
  if (!m.alpha()) throw DomainError("complement of a set in (0, inf) has infinite measure");
  if (cursor < *m.alpha()) out.emplace_back(cursor, *m.alpha());
  return IntervalUnion(std::move(out), m.alpha());
}

double perimeter_f(const IntervalUnion& m, const WeightSpec& w) {
  require_same_domain(m, w);
  double total = 0.0;
  for (const auto& x : m.interior_boundary()) total += w(to_double(x));
  return total;
}

Enclosure perimeter_f_enclosure(const IntervalUnion& m, const WeightSpec& w) {
  require_same_domain(m, w);
  Enclosure total = Enclosure::point(Rational(0));
  for (const auto& x : m.interior_boundary()) total = total + w.enclose(x);
  return total;
}

ConditionReport verify_isoperimetric_1d(const IntervalUnion& m, const WeightSpec& w, double tolerance) {
  require_same_domain(m, w);
  IntervalUnion star = rearrange_set(m);
  std::vector<Rational> boundary = m.interior_boundary();
  std::vector<Rational> star_boundary = star.interior_boundary();
  std::vector<double> witness;
  for (const auto& x : boundary) witness.push_back(to_double(x));

  ConditionReport report;
  report.tuples_tested = 1;

  if (!w.has_exact_evaluation()) {
    double lhs = 0.0, rhs = 0.0;
    for (const auto& x : boundary) lhs += w(to_double(x));
    for (const auto& x : star_boundary) rhs += w(to_double(x));
    report.record(lhs - rhs, witness);
    report.tuples_tested = 1;
    report.finish(tolerance);
    report.note = "floating-point evaluation";
    return report;
  }

  // A boundary point shared by M and M* cancels symbolically.
  for (auto it = star_boundary.begin(); it != star_boundary.end();) {
    auto hit = std::find(boundary.begin(), boundary.end(), *it);
    if (hit != boundary.end()) {
      boundary.erase(hit);
      it = star_boundary.erase(it);
    } else {
      ++it;
    }
  }
  Enclosure margin = Enclosure::point(Rational(0));
  for (const auto& x : boundary) margin = margin + w.enclose(x);
  for (const auto& x : star_boundary) margin = margin - w.enclose(x);

  report.worst_margin = margin.mid();
  report.witness = witness;
  if (margin.lo >= 0) {
    report.passed = true;
    report.exact = true;
  } else if (margin.hi < 0) {
    report.passed = false;
    report.exact = true;
  } else {
    report.finish(tolerance);
    report.note = "enclosure straddles zero";
  }
  return report;
}

IntervalUnion necessity_witness(const WeightSpec& w, std::pair<double, double> violation, double delta) {
  auto [x1, x2] = violation;
  if (x1 > x2) std::swap(x1, x2);
  double alpha = w.alpha();
  if (x1 <= 0.0 || x2 >= alpha) {
    throw DomainError("violation pair touches the domain boundary; use symmetry_witness");
  }
  if (x1 == x2) {
    x1 -= delta;
    x2 += delta;
    if (x1 <= 0.0 || x2 >= alpha) throw DomainError("widened violation pair leaves the domain");
  }
  auto m = IntervalUnion::from_doubles({{x1, x2}}, alpha);
  auto report = verify_isoperimetric_1d(m, w);
  if (report.passed) {
    std::ostringstream os;
    os << "(" << x1 << ", " << x2 << ") does not violate the isoperimetric inequality";
    throw InvalidInput(os.str());
  }
  return m;
}

IntervalUnion symmetry_witness(const WeightSpec& w, double x) {
  if (!w.bounded()) throw DomainError("symmetry witness needs a bounded domain");
  double alpha = w.alpha();
  if (!(x > 0.0 && x < alpha)) throw DomainError("symmetry witness point must lie inside (0, alpha)");
  for (double start : {x, alpha - x}) {
    auto m = IntervalUnion::from_doubles({{start, alpha}}, alpha);
    if (!verify_isoperimetric_1d(m, w).passed) return m;
  }
  std::ostringstream os;
  os << "f(" << x << ") = f(alpha - " << x << "); no symmetry witness";
  throw InvalidInput(os.str());
}

}  // namespace rearr
