#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rearr/error.hpp"
#include "rearr/io.hpp"

namespace rearr {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed experiment configuration (exit code 4).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Weight or profile rejected (exit code 3).
class InvalidWeightError : public Error {
 public:
  using Error::Error;
};

enum class Target { Dirichlet1D, Landes, Cylinder, Weighted, Isoperimetric1D, IsoperimetricW, Norms };

std::optional<Target> parse_target(std::string_view name);
std::string target_name(Target t);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  Target target = Target::Dirichlet1D;
  json weight;     // weight spec or {"generate": family}
  json profile;    // weighted targets
  json function;   // function spec or {"generate": ...}
  json set;        // set spec or {"generate": ...}
  double p = 2.0;  // integrand exponent
  std::vector<int> refinements{8, 16, 32};
  double tolerance = 1e-10;
  std::optional<double> kappa;
  std::filesystem::path base;  // relative paths in the config resolve here

  static ExperimentConfig from_json(const json& j, const std::filesystem::path& base = {});
  json to_json() const;
  /// FNV-1a of the canonical JSON form.
  std::string digest() const;
  void validate() const;
};

struct LevelRecord {
  int nodes = 0;  // 0 for single-shot checks
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct VerificationRecord {
  std::string digest;
  std::string target;
  std::uint64_t seed = 0;
  std::vector<LevelRecord> levels;
  bool passed = true;
  bool converged = true;
  std::string note;
  std::string version = kVersion;
  std::optional<double> wall_seconds;

  json to_json() const;
};

/// Deterministic given the seed. Throws ConfigError or InvalidWeightError on bad input.
VerificationRecord run(const ExperimentConfig& config, bool with_timing = false);

/// Cartesian product over {"/json/pointer": [values...]}; records in grid order.
std::vector<VerificationRecord> sweep(const ExperimentConfig& base, const json& grid, bool with_timing = false);

/// 0 when every record passes, 2 otherwise.
int exit_code(const std::vector<VerificationRecord>& records);

/// "target,seed,level,nodes,lhs,rhs,margin,tolerance,passed" rows.
std::string margins_csv(const std::vector<VerificationRecord>& records);

// ---------------------------------------------------------------------------
// Generators

/// Uniform doubles in [0, 1) with 53 random bits; platform independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();
  double uniform(double a, double b);
  /// Integer in [a, b].
  std::int64_t integer(std::int64_t a, std::int64_t b);
  /// Uniform value rounded to a multiple of 2^-bits.
  double dyadic(double a, double b, int bits = 16);

 private:
  std::uint64_t state_;
};

/// Nice function with complexity + 1 unimodal bumps separated by zero gaps;
/// complexity 0 is a single tent. The support lies inside (0, alpha).
PiecewiseLinear1D generate_nice_function(std::uint64_t seed, int complexity, double alpha = kInfinity);

/// n disjoint intervals with rational endpoints. The seed also picks whether the
/// union starts at 0 and (for finite alpha) whether it ends at alpha.
IntervalUnion generate_interval_union(std::uint64_t seed, int n, double alpha = kInfinity);

/// Families: "power" (x^gamma on (0, inf)), "concave-symmetric" (tabulated on
/// (0, alpha), alpha in {1, 2} unless given), "tabulated" (concave nondecreasing on (0, inf)).
WeightSpec generate_weight(std::uint64_t seed, const std::string& family, std::optional<double> alpha = std::nullopt);

/// Columns (s, 0), (s + 1, 1), (s + 2, 0) with s = a * mean(x') on Omega' = (0, 1)^(N-1).
ColumnSource shifted_tent_source(double a, int dimension = 2, double alpha = kInfinity);

// ---------------------------------------------------------------------------
// Oracles and witnesses

struct OracleReport {
  std::size_t samples = 0;
  double sup_error = 0.0;
  double bound = 0.0;  // 2 Lip(u*) support / samples
  double lipschitz = 0.0;
  double support = 0.0;
  int levels_checked = 0;
  bool equimeasurable = true;  // exact distribution match at every level checked
  bool passed = true;
};

/// Exact rearrangement of generate_nice_function(seed, complexity) against the sort oracle.
OracleReport oracle_compare(std::uint64_t seed, std::size_t samples, int complexity = 1, int levels = 100);
json to_json(const OracleReport& r);

struct Counterexample {
  std::optional<std::pair<double, double>> violation;
  ConditionReport pair_condition;
  std::optional<IntervalUnion> set;
  double perimeter = 0.0;             // P_f(M)
  double rearranged_perimeter = 0.0;  // P_f(M*)
};

/// Pair-condition violation of w and the two-interval set built from it.
Counterexample find_counterexample(const WeightSpec& w, const ConditionOptions& options = {});
json to_json(const Counterexample& c);

}  // namespace rearr
