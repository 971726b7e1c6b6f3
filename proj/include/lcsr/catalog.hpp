#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lcsr/reduction.hpp"
#include "lcsr/report.hpp"

namespace lcsr {

/// Everything the checks need on one base chart.
struct Patch {
  BaseChart base;
  CotangentChart cotangent;
  ClosedOneForm theta;
  ActionSpec action;
  /// α_ξ on this chart, or nullopt where the scenario has none for ξ.
  std::function<std::optional<KFormField>(std::span<const double>)> alpha;
  std::optional<QuotientData> quotient;
  std::optional<CotangentChart> quotient_cotangent;
};

struct BasePoint {
  int patch = 0;
  std::vector<double> q;
};

struct ExpectedFacts {
  int rank = 0;              // rank dμ
  int foliation_dim = 0;     // dim 𝔤_ξ
  int level_set_dim = 0;     // dim T*Q − dim 𝔤
  int reduced_dim = 0;       // level_set_dim − foliation_dim
};

/// Context handed to scenario-specific checks.
struct ExtraCheckContext {
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<double> xis;
};

struct ExtraCheck {
  std::string id;
  std::string anchor;
  double tolerance = 0.0;
  Comparison comparison = Comparison::below;
  std::function<std::vector<CheckRecord>(const ExtraCheckContext&)> run;
};

struct ScenarioBundle {
  std::string name;
  std::string summary;
  LieAlgebraSpec algebra;
  std::vector<Patch> patches;
  std::function<BasePoint(Rng&)> sample_base;
  std::vector<double> default_xis;
  ExpectedFacts expected;
  /// Short statement of which ξ carry an α_ξ.
  std::string alpha_regime;
  std::vector<ExtraCheck> extra_checks;
  std::vector<ExtraCheck> extra_controls;
};

/// Sign and frame index relating μ to the (iq, jq, kq) trivialization of T*S³:
/// μ = sign · α(e_index).
struct HopfFrameConvention {
  int index = 0;
  double sign = -1.0;
};
inline constexpr HopfFrameConvention kHopfFrame{};

ScenarioBundle scenario_hopf_s3();
/// Q = S¹ × S³ with θ the angle form of the S¹ factor.
ScenarioBundle scenario_s1_times_s3();
/// Q = ℝ × S³ with θ = dt, plus the checks for the quotient map φ̃(t, m) = e^{−it/ξ}m.
ScenarioBundle scenario_rxm_quotient();
ScenarioBundle scenario_flat_baseline();
/// Q = ℝ × (ℝ² \ 0) with the angle form of the plane as Lee form; carries a valid α_ξ for every ξ.
ScenarioBundle scenario_translation_lcs();

std::vector<std::string> scenario_names();
/// Throws ConfigError for unknown names.
ScenarioBundle make_scenario(const std::string& name);

// -- pieces exposed for tests ------------------------------------------------

/// Stereographic chart of S³ centred on q1 = ∓1 (sign = +1: u = (q2,q3,q4)/(1+q1)).
std::vector<Jet2> s3_from_chart(std::span<const Jet2> u, double sign);
std::vector<Jet2> s3_to_chart(std::span<const Jet2> q, double sign);
/// Hopf map S³ → S² ⊂ ℝ³.
std::vector<Jet2> hopf_map(std::span<const Jet2> q);
/// (iq, jq, kq) at q ∈ ℝ⁴.
std::vector<std::vector<double>> quaternion_frame(std::span<const double> q);

/// α_ξ = β + fθ after checking X_a(f) = ξ(a) and L_{X_a}β = 0, β(X_a) = −ξ(a) at samples.
KFormField alpha_xi_from_f(const KFormField& beta, const KFormField& f, const ClosedOneForm& theta,
                           const ActionSpec& action, std::span<const double> xi,
                           const std::vector<std::vector<double>>& samples, double tol = 1e-9);

/// The quotient map φ̃(t, m) = e^{−it/ξ}·m on ℝ × S³ in ambient coordinates.
std::vector<double> rxm_quotient_point(double t, std::span<const double> m, double xi);

}  // namespace lcsr
