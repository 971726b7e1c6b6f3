#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <json.hpp>
#include <set>
#include <sstream>

#include "lcsr/errors.hpp"
#include "lcsr/suite.hpp"

using namespace lcsr;

namespace {

RunConfig quick(const std::string& scenario, std::vector<double> xis, int samples = 5) {
  RunConfig c;
  c.scenario = scenario;
  c.xis = std::move(xis);
  c.samples = samples;
  return c;
}

int config_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

RunConfig random_config(Rng& rng) {
  const auto names = scenario_names();
  RunConfig c;
  c.scenario = names[rng.next() % names.size()];
  const int nxi = static_cast<int>(rng.next() % 4);
  for (int i = 0; i < nxi; ++i) c.xis.push_back(rng.uniform(-2, 2));
  c.samples = 1 + static_cast<int>(rng.next() % 1000);
  c.seed = rng.next();
  const auto catalog = check_catalog();
  const int ntol = static_cast<int>(rng.next() % 3);
  for (int i = 0; i < ntol; ++i) c.tolerances[catalog[rng.next() % catalog.size()].id] = std::exp(rng.uniform(-30, 0));
  c.format = rng.next() % 2 ? "json" : "text";
  if (rng.next() % 2) c.out = "reports/run" + std::to_string(rng.next() % 100) + ".json";
  return c;
}

/// The same config written with shuffled keys, comments and ragged spacing.
std::string scrambled(const RunConfig& c, Rng& rng) {
  std::vector<std::string> lines;
  std::istringstream in(serialize_config(c));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    lines.push_back("  " + line.substr(0, eq) + "=" + std::string(rng.next() % 3, ' ') + line.substr(eq + 3) + "   ");
  }
  for (std::size_t i = lines.size(); i > 1; --i) std::swap(lines[i - 1], lines[rng.next() % i]);
  std::string out = "# generated\n\n";
  for (const auto& l : lines) out += l + (rng.next() % 2 ? "  # trailing\n" : "\n");
  return out;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  RunConfig base;
  base.scenario = "hopf-s3";
  const RunConfig c = parse_config("", base);
  CHECK(c.samples == 200);
  CHECK(c.seed == 42);
  CHECK(c.format == "json");
  CHECK(c.xis.empty());

  CHECK(config_error_line("scenario = hopf-s3\nsamples = 0\n") == 2);
  CHECK(config_error_line("scenario = hopf-s3\n\n# c\nsampels = 10\n") == 4);
  CHECK(config_error_line("scenario = nowhere\n") == 1);
  CHECK(config_error_line("scenario hopf-s3\n") == 1);
  CHECK(config_error_line("scenario = hopf-s3\ntol.twisted.cartan = -1\n") == 2);
  CHECK(config_error_line("scenario = hopf-s3\ntol.no.such.check = 1e-3\n") == 2);
  CHECK(config_error_line("scenario = hopf-s3\nformat = xml\n") == 2);
  CHECK(config_error_line("scenario = hopf-s3\nxi = 0.3, abc\n") == 2);
  CHECK_THROWS_AS(parse_config("samples = 10\n"), ConfigError);

  const RunConfig d = parse_config("scenario = s1xs3\nxi = 0, 0.7\nsamples = 12\nseed = 7\ntol.twisted.cartan = 1e-7\n");
  CHECK(d.xis == std::vector<double>{0.0, 0.7});
  CHECK(d.samples == 12);
  CHECK(d.seed == 7);
  CHECK(d.tolerances.at("twisted.cartan") == 1e-7);
}

TEST_CASE("config round trip over generated configs") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const RunConfig c = random_config(rng);
    const std::string canonical = serialize_config(c);
    CHECK(parse_config(canonical) == c);
    const std::string messy = scrambled(c, rng);
    CHECK(serialize_config(parse_config(messy)) == canonical);
  }
}

TEST_CASE("LCS_REDUCE_SEED") {
  ::unsetenv("LCS_REDUCE_SEED");
  CHECK(default_seed() == 42);
  ::setenv("LCS_REDUCE_SEED", "1234", 1);
  CHECK(default_seed() == 1234);
  ::unsetenv("LCS_REDUCE_SEED");
}

TEST_CASE("check catalog") {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& c : check_catalog()) {
    CHECK_FALSE(c.anchor.empty());
    CHECK(c.tolerance > 0.0);
    CHECK(seen.insert({c.id, c.scope}).second);
    CHECK(c.control == (c.id.rfind("control.", 0) == 0));
    if (c.control) CHECK(c.comparison == Comparison::max_above);
  }
}

TEST_CASE("passing report") {
  const VerificationReport r = run_suite(quick("flat-baseline", {0.0, 0.3}));
  CHECK(r.verdict() == "pass");
  CHECK(r.exit_code() == 0);
  for (const auto* list : {&r.checks, &r.controls}) {
    for (const auto& c : *list) {
      CHECK_FALSE(c.anchor.empty());
      CHECK(c.worst.size() <= 3);
    }
  }
  const auto j = nlohmann::json::parse(emit_report(r, "json"));
  CHECK(j.at("verdict") == "pass");
  CHECK(j.at("seed") == 42);
  CHECK(j.at("samples") == 5);
  for (const auto& c : j.at("checks")) {
    for (const char* key : {"id", "anchor", "xi", "status", "max_residual", "mean_residual", "tolerance",
                            "comparison", "samples", "worst"}) {
      CHECK(c.contains(key));
    }
    CHECK((c.at("max_residual").is_number() || c.at("max_residual").is_null()));
  }
  CHECK(j.at("controls").size() == r.controls.size());
}

TEST_CASE("JSON re-serializes idempotently") {
  const VerificationReport r = run_suite(quick("translation-lcs", {0.0, -0.7}, 3));
  const std::string text = emit_report(r, "json");
  const auto once = nlohmann::json::parse(text);
  const auto twice = nlohmann::json::parse(once.dump(2));
  CHECK(once == twice);
  CHECK(once.dump(2) == twice.dump(2));
  const auto ordered = nlohmann::ordered_json::parse(text);
  CHECK(ordered.dump(2) == text.substr(0, text.find_last_not_of('\n') + 1));
}

TEST_CASE("failed check and failed control") {
  RunConfig c = quick("flat-baseline", {0.0, 0.3}, 3);
  c.tolerances["jets.fd_agreement"] = 1e-20;
  const VerificationReport failed = run_suite(c);
  CHECK(failed.verdict() == "fail");
  CHECK(failed.exit_code() == 1);
  const std::string text = emit_report(failed, "text");
  const auto at = text.find("[fail] jets.fd_agreement");
  REQUIRE(at != std::string::npos);
  const auto block = text.substr(at, text.find("\n[", at + 1) - at);
  std::size_t worst_lines = 0;
  for (auto p = block.find("worst "); p != std::string::npos; p = block.find("worst ", p + 1)) ++worst_lines;
  CHECK(worst_lines == 3);
  CHECK(block.find("T*R2 (") != std::string::npos);

  RunConfig k = quick("flat-baseline", {0.0, 0.3}, 3);
  k.tolerances["control.phi0_off_level"] = 1e6;
  const VerificationReport control = run_suite(k);
  CHECK(control.verdict() == "control_failure");
  CHECK(control.exit_code() == 1);
  CHECK(nlohmann::json::parse(emit_report(control, "json")).at("verdict") == "control_failure");

  // A failed check outranks a failed control.
  c.tolerances["control.phi0_off_level"] = 1e6;
  CHECK(run_suite(c).verdict() == "fail");
}

TEST_CASE("zero level of s1xs3") {
  const VerificationReport r = run_suite(quick("s1xs3", {0.0}));
  CHECK(r.verdict() == "pass");
  for (const char* id : {"phi0.tautological", "phi0.lee_form", "phi0.lcs_form", "phi0.well_defined", "phi0.roundtrip"}) {
    const CheckRecord* c = r.find(id, 0.0);
    REQUIRE(c != nullptr);
    CHECK(c->status == CheckStatus::pass);
    CHECK(c->samples > 0);
  }
  for (const char* id : {"embedding.composite_omega", "embedding.composite_theta", "embedding.annihilator",
                         "embedding.witness"}) {
    const CheckRecord* c = r.find(id, 0.0);
    REQUIRE(c != nullptr);
    CHECK(c->status == CheckStatus::not_applicable);
    CHECK(c->note.rfind("n/a (ξ=0 path)", 0) == 0);
  }
}

TEST_CASE("determinism") {
  const RunConfig c = quick("hopf-s3", {0.0, 0.7}, 4);
  CHECK(emit_report(run_suite(c), "json") == emit_report(run_suite(c), "json"));
  CHECK(emit_report(run_suite(c), "text") == emit_report(run_suite(c), "text"));
  RunConfig other = c;
  other.seed = 43;
  CHECK(emit_report(run_suite(c), "json") != emit_report(run_suite(other), "json"));
}

TEST_CASE("structured errors") {
  RunConfig c;
  c.scenario = "nowhere";
  CHECK_THROWS_AS(run_suite(c), ConfigError);
  const VerificationReport r = run_suite(quick("flat-baseline", {0.0}, 1));
  CHECK_THROWS_AS(emit_report(r, "yaml"), ConfigError);
}
