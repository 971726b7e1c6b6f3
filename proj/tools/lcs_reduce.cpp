#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcsr/errors.hpp"
#include "lcsr/suite.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lcsr::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join_xis(const std::string& list) {
  return "xi = " + list + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for LCS reduction on cotangent bundles"};
  app.require_subcommand(1);

  std::string scenario;
  std::string xi_list;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> tols;
  std::string format;
  std::string out;

  auto* verify = app.add_subcommand("verify", "Run the check suite on a scenario");
  verify->add_option("--scenario", scenario, "Scenario name or config file path")->required();
  verify->add_option("--xi", xi_list, "Comma-separated ξ values");
  auto* samples_opt = verify->add_option("--samples", samples, "Samples per check");
  auto* seed_opt = verify->add_option("--seed", seed, "RNG seed (default: $LCS_REDUCE_SEED or 42)");
  verify->add_option("--tol", tols, "Tolerance override <check>=<value>")->take_all();
  verify->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  verify->add_option("--out", out, "Write the report here instead of stdout");

  auto* list_scenarios = app.add_subcommand("list-scenarios", "Print the scenario names");
  auto* list_checks = app.add_subcommand("list-checks", "Print every check id with anchor and tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_scenarios->parsed()) {
      for (const auto& name : lcsr::scenario_names()) {
        std::cout << name << "  " << lcsr::make_scenario(name).summary << "\n";
      }
      return 0;
    }
    if (list_checks->parsed()) {
      for (const auto& c : lcsr::check_catalog()) {
        std::cout << c.id << "\t" << (c.control ? "control" : "check") << "\t" << c.scope << "\t"
                  << lcsr::comparison_name(c.comparison) << " " << c.tolerance << "\t" << c.anchor << "\n";
      }
      return 0;
    }

    lcsr::RunConfig base;
    base.seed = lcsr::default_seed();
    lcsr::RunConfig config;
    if (std::filesystem::is_regular_file(scenario)) {
      config = lcsr::parse_config(read_file(scenario), base);
    } else {
      config = lcsr::parse_config("scenario = " + scenario + "\n", base);
    }
    std::string overrides;
    if (!xi_list.empty()) overrides += join_xis(xi_list);
    for (const auto& t : tols) overrides += "tol." + t + "\n";
    if (!overrides.empty()) config = lcsr::parse_config(overrides, config);
    if (samples_opt->count() > 0) config.samples = samples;
    if (seed_opt->count() > 0) config.seed = seed;
    if (!format.empty()) config.format = format;
    if (!out.empty()) config.out = out;
    config.validate();

    const auto report = lcsr::run_suite(config);
    const auto text = lcsr::emit_report(report, config.format);
    if (config.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(config.out, std::ios::binary);
      if (!f || !(f << text) || !f.flush()) {
        std::cerr << "error: cannot write report to '" << config.out << "'\n";
        return 2;
      }
    }
    return report.exit_code();
  } catch (const lcsr::ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const lcsr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
