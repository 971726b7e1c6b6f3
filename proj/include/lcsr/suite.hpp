#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lcsr/catalog.hpp"
#include "lcsr/report.hpp"

namespace lcsr {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kDefaultSamples = 200;

struct RunConfig {
  std::string scenario;
  std::vector<double> xis;  // empty: the scenario's default sweep
  int samples = kDefaultSamples;
  std::uint64_t seed = kDefaultSeed;
  std::map<std::string, double> tolerances;  // check id -> tolerance override
  std::string format = "json";
  std::string out;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// `key = value` lines; `#` starts a comment. Keys: scenario, xi (comma list),
/// samples, seed, format, out, tol.<check id>. Values already set in `base`
/// are kept unless the text overrides them.
RunConfig parse_config(std::string_view text, RunConfig base = {});
/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Seed from LCS_REDUCE_SEED when set, else kDefaultSeed.
std::uint64_t default_seed();

struct CheckInfo {
  std::string id;
  std::string anchor;
  double tolerance = 0.0;
  Comparison comparison = Comparison::below;
  bool control = false;
  std::string scope;  // "all", "per-xi", "xi=0", or a scenario name
};
/// Core checks followed by every scenario's extra checks, in report order.
std::vector<CheckInfo> check_catalog();

VerificationReport run_suite(const RunConfig& config);
/// "json" or "text".
std::string emit_report(const VerificationReport& report, const std::string& format);

}  // namespace lcsr
