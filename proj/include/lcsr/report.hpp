#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcsr/chart.hpp"

namespace lcsr {

inline constexpr std::string_view kToolkitVersion = "0.3.0";

/// Deterministic generator. Uniform and normal variates are derived here
/// rather than through <random> distributions, whose output is not pinned
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for (seed, label, index).
  static Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();

 private:
  std::uint64_t state_;
  std::optional<double> spare_;
};

enum class CheckStatus { pass, fail, not_applicable };
/// below: every value must be < tolerance. above: every value must be > tolerance.
/// max_above: the largest value must be > tolerance (violation detected somewhere).
enum class Comparison { below, above, max_above };

struct SampleWitness {
  double value = 0.0;
  ChartPoint point;
};

struct CheckRecord {
  std::string id;
  std::string anchor;  // quoted identity, or "plumbing"
  std::optional<double> xi;
  CheckStatus status = CheckStatus::not_applicable;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double min_residual = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::below;
  int samples = 0;
  std::vector<SampleWitness> worst;  // up to three
  std::string note;
  int errors = 0;  // evaluations that raised

  /// Re-derives status for a new tolerance.
  void set_tolerance(double tol);
};

/// Collects per-sample values for one check. Order-independent: the result
/// depends only on the multiset of (value, point) pairs.
class CheckAccumulator {
 public:
  CheckAccumulator(std::string id, std::string anchor, double tolerance, Comparison comparison = Comparison::below,
                   std::optional<double> xi = std::nullopt);

  void add(double value, ChartPoint point);
  /// Records an evaluation that raised an error: counts as the worst possible value.
  void add_failure(const std::string& message, ChartPoint point);
  void set_note(std::string note) { note_ = std::move(note); }
  CheckRecord finish() const;

  static CheckRecord not_applicable(std::string id, std::string anchor, double tolerance, std::string note,
                                    std::optional<double> xi = std::nullopt, Comparison comparison = Comparison::below);

 private:
  std::string id_;
  std::string anchor_;
  double tolerance_;
  Comparison comparison_;
  std::optional<double> xi_;
  std::vector<SampleWitness> values_;
  std::vector<std::string> errors_;
  std::string note_;
};

struct VerificationReport {
  std::string scenario;
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<double> xis;
  std::string toolkit_version{kToolkitVersion};
  std::vector<CheckRecord> checks;
  std::vector<CheckRecord> controls;  // status pass = violation detected as expected

  /// "pass", "fail" or "control_failure".
  std::string verdict() const;
  int exit_code() const { return verdict() == "pass" ? 0 : 1; }
  const CheckRecord* find(std::string_view id, std::optional<double> xi = std::nullopt) const;
};

std::string status_name(CheckStatus s);
std::string comparison_name(Comparison c);
std::string to_json(const VerificationReport& r);
std::string to_text(const VerificationReport& r);

}  // namespace lcsr
