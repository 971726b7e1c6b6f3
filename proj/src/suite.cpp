#include "lcsr/suite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "lcsr/errors.hpp"

namespace lcsr {

// ------------------------------------------------------------------ config

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a finite number, got '" + s + "'", line);
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& s, int line) {
  Int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'", line);
  }
  return v;
}

std::vector<double> parse_list(const std::string& s, int line) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) throw ConfigError("empty entry in ξ list", line);
    out.push_back(parse_double(t, line));
  }
  if (out.empty()) throw ConfigError("empty ξ list", line);
  return out;
}

std::set<std::string> known_check_ids() {
  std::set<std::string> ids;
  for (const auto& c : check_catalog()) ids.insert(c.id);
  return ids;
}

}  // namespace

void RunConfig::validate() const {
  const auto names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (format != "json" && format != "text") throw ConfigError("format must be json or text");
  const auto ids = known_check_ids();
  for (const auto& [id, tol] : tolerances) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tolerance for " + id + " must be positive");
    if (!ids.count(id)) throw ConfigError("unknown check id '" + id + "' in tolerance override");
  }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  RunConfig c = std::move(base);
  std::stringstream ss{std::string(text)};
  std::string raw;
  int line = 0;
  const auto ids = known_check_ids();
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", line);
    if (key == "scenario") {
      const auto names = scenario_names();
      if (std::find(names.begin(), names.end(), value) == names.end()) {
        throw ConfigError("unknown scenario '" + value + "'", line);
      }
      c.scenario = value;
    } else if (key == "xi") {
      c.xis = parse_list(value, line);
    } else if (key == "samples") {
      c.samples = parse_int<int>(value, line);
      if (c.samples < 1) throw ConfigError("samples must be at least 1", line);
    } else if (key == "seed") {
      c.seed = parse_int<std::uint64_t>(value, line);
    } else if (key == "format") {
      if (value != "json" && value != "text") throw ConfigError("format must be json or text", line);
      c.format = value;
    } else if (key == "out") {
      c.out = value;
    } else if (key.rfind("tol.", 0) == 0) {
      const auto id = key.substr(4);
      if (!ids.count(id)) throw ConfigError("unknown check id '" + id + "'", line);
      const double t = parse_double(value, line);
      if (!(t > 0.0)) throw ConfigError("tolerance must be positive", line);
      c.tolerances[id] = t;
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }
  if (c.scenario.empty()) throw ConfigError("no scenario given");
  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "scenario = " << c.scenario << "\n";
  if (!c.xis.empty()) {
    os << "xi = ";
    for (std::size_t i = 0; i < c.xis.size(); ++i) os << (i ? ", " : "") << format_double(c.xis[i]);
    os << "\n";
  }
  os << "samples = " << c.samples << "\n";
  os << "seed = " << c.seed << "\n";
  os << "format = " << c.format << "\n";
  if (!c.out.empty()) os << "out = " << c.out << "\n";
  for (const auto& [id, tol] : c.tolerances) os << "tol." << id << " = " << format_double(tol) << "\n";
  return os.str();
}

std::uint64_t default_seed() {
  const char* env = std::getenv("LCS_REDUCE_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  try {
    return parse_int<std::uint64_t>(trim(env), 0);
  } catch (const ConfigError&) {
    throw ConfigError(std::string("LCS_REDUCE_SEED is not an unsigned integer: ") + env);
  }
}

// ---------------------------------------------------------------- catalog

namespace {

const std::vector<CheckInfo>& core_checks() {
  using C = Comparison;
  static const std::vector<CheckInfo> list = {
      {"jets.fd_agreement", "plumbing", 1e-6, C::below, false, "all"},
      {"charts.transitions", "plumbing", 1e-9, C::below, false, "all"},
      {"lcs.closed_lee_form", "dθ = 0", 1e-9, C::below, false, "all"},
      {"lcs.structure_equation", "dω = θ ∧ ω", 1e-9, C::below, false, "all"},
      {"lcs.nondegenerate", "ω_θ = d_{π*θ} η is an LCS form on T*Q", 1e-8, C::above, false, "all"},
      {"lcs.coordinate_expansion", "ω_θ̃ = dη − θ∧η = Σ da_i∧dq_i − Σ_{i<j}(θ_i a_j − θ_j a_i)dq_i∧dq_j", 1e-10,
       C::below, false, "all"},
      {"twisted.d_theta_squared", "we have d_θ² = 0", 1e-9, C::below, false, "all"},
      {"twisted.cartan", "L_X^θ α = L_X α − θ(X) α", 1e-8, C::below, false, "all"},
      {"cotangent.projection_of_lift", "π_* X̃_a = X_a", 1e-10, C::below, false, "all"},
      {"cotangent.eta_invariance", "g·α_q(g_*v) = α_q(v)", 1e-9, C::below, false, "all"},
      {"cotangent.theta_dual_closed_form", "θ̃^{ω_θ̃} = Σ θ_i ∂/∂a_i", 1e-10, C::below, false, "all"},
      {"hamiltonian.potential", "the 1-form i_{X_a}ω is d_θ-exact", 1e-8, C::below, false, "all"},
      {"hamiltonian.lee_annihilates_orbits", "θ(X_a) = 0", 1e-10, C::below, false, "all"},
      {"hamiltonian.group_invariance", "The action of G preserves the LCS form ω", 1e-9, C::below, false, "all"},
      {"momentum.tautological_pairing", "μ(x)(a) = −η_x((X_a)_x)", 1e-12, C::below, false, "all"},
      {"quotient.section", "plumbing", 1e-10, C::below, false, "all"},
      {"theta.descends", "φ̄₀* θ̃' = ... = θ̃", 1e-9, C::below, false, "all"},
      {"momentum.regularity", "all its values are regular", 0.5, C::below, false, "per-xi"},
      {"momentum.level_set", "μ(α)(a) = −α(X_a)", 1e-12, C::below, false, "per-xi"},
      {"foliation.frame_tangent", "X_a + ξ(a) θ^ω ... a ∈ 𝔤_ξ", 1e-9, C::below, false, "per-xi"},
      {"foliation.brute_force", "T μ^{−1}(ξ) ∩ (T μ^{−1}(ξ))^ω = { X_a + ξ(a)θ^ω | a ∈ 𝔤_ξ }", 1e-6, C::below,
       false, "per-xi"},
      {"foliation.annihilator", "(T μ^{−1}(ξ))^ω = { X_a + ξ(a)θ^ω | a ∈ 𝔤 }", 1e-6, C::below, false, "per-xi"},
      {"foliation.dimension", "μ^{−1}(ξ)/⟨X + ξθ̃^{ω̃}⟩", 0.5, C::below, false, "per-xi"},
      {"foliation.reduced_dimension", "μ^{−1}(ξ)/⟨X + ξθ̃^{ω̃}⟩", 0.5, C::below, false, "per-xi"},
      {"alpha.membership", "(α_ξ)_q ∈ μ'^{−1}(ξ')", 1e-9, C::below, false, "per-xi"},
      {"alpha.lie_condition", "L_{X_a} α_ξ = ξ(a) θ", 1e-9, C::below, false, "per-xi"},
      {"shift.lee_form", "S̄_ξ* θ̃ = θ̃", 1e-8, C::below, false, "per-xi"},
      {"shift.tautological", "S̄_ξ* η = η − π* α_ξ", 1e-8, C::below, false, "per-xi"},
      {"shift.lcs_form", "S̄_ξ* ω_θ̃ = ω_θ̃ − π* d_θ α_ξ", 1e-8, C::below, false, "per-xi"},
      {"shift.theta_dual", "S̄_{ξ*} θ̃^{ω_θ̃} = θ̃^{ω_θ̃}", 1e-8, C::below, false, "per-xi"},
      {"shift.invariance_equivalence", "L_{X_a} α_ξ = ξ(a) θ", 1e-8, C::below, false, "per-xi"},
      {"shift.maps_level_sets", "S̄_ξ: μ^{−1}(ξ) → μ^{−1}(0)", 1e-10, C::below, false, "per-xi"},
      {"beta.horizontal", "i_{X_a} d_θ α_ξ = 0", 1e-9, C::below, false, "per-xi"},
      {"beta.descends", "p* β_ξ = d_θ α_ξ", 1e-8, C::below, false, "per-xi"},
      {"beta.twisted_closed", "p* β_ξ = d_θ α_ξ", 1e-8, C::below, false, "per-xi"},
      {"embedding.composite_omega", "S̄_ξ* φ̄₀* (ω_θ̃' + B_ξ) = ω_θ̃", 1e-8, C::below, false, "per-xi"},
      {"embedding.composite_theta", "S̄_ξ* φ̄₀* θ̃' = θ̃", 1e-8, C::below, false, "per-xi"},
      {"embedding.annihilator", "Im φ = Ann(p_* O)", 1e-9, C::below, false, "per-xi"},
      {"embedding.witness", "α_q = p* η_{q̂} + α_ξ(q)", 1e-10, C::below, false, "per-xi"},
      {"embedding.covers_base", "π' ∘ φ̄₀ = p ∘ π", 1e-12, C::below, false, "per-xi"},
      {"phi0.well_defined", "φ̄₀(α_q)(v_{q̂}) = α_q(v_q)", 1e-12, C::below, false, "xi=0"},
      {"phi0.tautological", "φ̄₀* η' = η", 1e-8, C::below, false, "xi=0"},
      {"phi0.lee_form", "φ̄₀* θ̃' = ... = θ̃", 1e-8, C::below, false, "xi=0"},
      {"phi0.lcs_form", "φ̄₀* ω_θ̃' = ω_θ̃", 1e-8, C::below, false, "xi=0"},
      {"phi0.roundtrip", "take α_q = p*η; then φ̄₀(α_q) = η", 1e-10, C::below, false, "xi=0"},
      {"control.shift_perturbed_alpha", "L_{X_a} α_ξ = ξ(a) θ", 1e-4, C::max_above, true, "all"},
      {"control.hamiltonian_non_invariant_theta", "the 1-form i_{X_a}ω is d_θ-exact", 1e-4, C::max_above, true,
       "all"},
      {"control.regularity_degenerate_action", "all its values are regular", 0.5, C::max_above, true, "all"},
      {"control.phi0_off_level", "φ̄₀(α_q)(v_{q̂}) = α_q(v_q)", 1e-4, C::max_above, true, "all"},
      {"control.foliation_wrong_sign", "X_a + ξ(a) θ^ω ... a ∈ 𝔤_ξ", 1e-4, C::max_above, true, "all"},
  };
  return list;
}

const CheckInfo& info(const std::string& id) {
  for (const auto& c : core_checks()) {
    if (c.id == id) return c;
  }
  throw PreconditionFailed("no check '" + id + "' in the catalog");
}

}  // namespace

std::vector<CheckInfo> check_catalog() {
  std::vector<CheckInfo> out = core_checks();
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    for (const auto& e : b.extra_checks) out.push_back({e.id, e.anchor, e.tolerance, e.comparison, false, name});
    for (const auto& e : b.extra_controls) out.push_back({e.id, e.anchor, e.tolerance, e.comparison, true, name});
  }
  return out;
}

// ----------------------------------------------------------------- running

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct PatchData {
  const Patch* patch;
  LCSStructure lcs;
  ClosedOneForm lifted_theta;
  KFormField eta;
  KFormField expansion;
  std::vector<LiftedField> lifts;
  std::vector<KFormField> rho;
  VectorField theta_dual;
  std::optional<SmoothMap> zero_map;
  std::optional<LCSStructure> quotient_lcs;
  std::optional<KFormField> quotient_eta;
};

PatchData prepare(const Patch& p) {
  const auto& c = p.cotangent;
  std::vector<LiftedField> lifts;
  std::vector<KFormField> rho;
  for (int k = 0; k < p.action.algebra.dim; ++k) {
    lifts.push_back(lift_fundamental_field(c, p.action.fields[static_cast<std::size_t>(k)]));
    rho.push_back(momentum_component(c, p.action, k));
  }
  PatchData d{&p,
              lcs_form(c, p.theta),
              lifted_lee_form(c, p.theta),
              tautological_form(c),
              lcs_form_coordinate_expansion(c, p.theta),
              std::move(lifts),
              std::move(rho),
              theta_omega_dual(c, p.theta),
              std::nullopt,
              std::nullopt,
              std::nullopt};
  if (p.quotient && p.quotient_cotangent) {
    d.zero_map = zero_level_quotient_map(c, *p.quotient_cotangent, *p.quotient);
    d.quotient_lcs = lcs_form(*p.quotient_cotangent, p.quotient->theta_bar);
    d.quotient_eta = tautological_form(*p.quotient_cotangent);
  }
  return d;
}

/// Whether q lies on a patch with quotient data and projects into the quotient chart.
bool quotient_image_inside(const Patch& p, std::span<const double> q) {
  if (!p.quotient) return false;
  try {
    return p.quotient->chart.contains(p.quotient->projection.apply(q));
  } catch (const DomainError&) {
    return false;
  }
}

/// β_ξ on the quotient, or nullopt when d_θα_ξ has no room there (2-form on a line).
std::optional<KFormField> descended_beta(const Patch& p, const KFormField& alpha) {
  if (p.quotient->chart.dim < 2) return std::nullopt;
  return beta_xi_descend(alpha, p.theta, *p.quotient);
}

struct Sample {
  int patch = 0;
  std::vector<double> q;
  std::vector<double> x;
};

class Runner {
 public:
  Runner(const ScenarioBundle& b, const RunConfig& cfg, std::vector<double> xis)
      : b_(b), cfg_(cfg), xis_(std::move(xis)) {
    for (const auto& p : b_.patches) data_.push_back(prepare(p));
  }

  VerificationReport run();

 private:
  using Body = std::function<std::optional<double>(Rng&, ChartPoint&)>;

  CheckRecord sampled(const std::string& id, std::optional<double> xi, std::uint64_t stream, const Body& body,
                      int samples = -1) const {
    const CheckInfo& ci = info(id);
    CheckAccumulator acc(id, ci.anchor, ci.tolerance, ci.comparison, xi);
    Rng rng = Rng::substream(cfg_.seed, id, stream);
    const int n = samples < 0 ? cfg_.samples : samples;
    for (int i = 0; i < n; ++i) {
      ChartPoint where{"", {}};
      try {
        const auto v = body(rng, where);
        if (v) acc.add(*v, where);
      } catch (const Error& e) {
        acc.add_failure(e.what(), where);
      }
    }
    auto r = acc.finish();
    if (auto it = notes_.find(id); it != notes_.end()) {
      r.note = r.note.empty() ? it->second : it->second + "; " + r.note;
    }
    notes_.erase(id);
    return r;
  }

  CheckRecord na(const std::string& id, std::optional<double> xi, const std::string& note) const {
    const CheckInfo& ci = info(id);
    return CheckAccumulator::not_applicable(id, ci.anchor, ci.tolerance, note, xi, ci.comparison);
  }

  using Keep = std::function<bool(const Patch&, std::span<const double>)>;

  BasePoint base_point(Rng& rng, const Keep& keep = nullptr) const {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      auto bp = b_.sample_base(rng);
      if (!keep || keep(b_.patches[static_cast<std::size_t>(bp.patch)], bp.q)) return bp;
    }
    throw PreconditionFailed("no sample point satisfies the patch filter");
  }

  Sample cotangent_sample(Rng& rng, ChartPoint& where, const Keep& keep = nullptr) const {
    auto bp = base_point(rng, keep);
    const auto& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    std::vector<double> c(bp.q.size());
    for (double& v : c) v = rng.normal();
    Sample s{bp.patch, bp.q, p.cotangent.point(bp.q, c)};
    where = {p.cotangent.chart().id, s.x};
    return s;
  }

  Sample level_sample(Rng& rng, ChartPoint& where, double xi,
                      const Keep& keep = nullptr) const {
    auto bp = base_point(rng, keep);
    const auto& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    std::vector<double> c(bp.q.size());
    for (double& v : c) v = rng.normal();
    where = {p.base.chart.id, bp.q};
    const std::vector<double> xiv(static_cast<std::size_t>(b_.algebra.dim), xi);
    Sample s{bp.patch, bp.q, level_set_point(p.cotangent, p.action, xiv, bp.q, c)};
    where = {p.cotangent.chart().id, s.x};
    return s;
  }

  std::vector<double> xi_vector(double xi) const {
    return std::vector<double>(static_cast<std::size_t>(b_.algebra.dim), xi);
  }

  /// Group element near the identity whose cotangent lift keeps x inside the chart.
  std::optional<SmoothMap> lifted_group_element(const Patch& p, Rng& rng, std::span<const double> q) const {
    if (!p.action.group_element) return std::nullopt;
    std::vector<double> a(static_cast<std::size_t>(b_.algebra.dim));
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    for (int attempt = 0; attempt < 8; ++attempt) {
      try {
        const SmoothMap g = p.action.group_element(a);
        const auto img = g.apply(q);
        if (p.base.chart.contains(img)) return cotangent_lift_map(p.cotangent, p.cotangent, g);
      } catch (const DomainError&) {
      }
      for (double& v : a) v *= 0.5;
    }
    return std::nullopt;
  }

  const std::optional<KFormField>& alpha(int patch, std::size_t xi_i) const {
    const auto key = std::make_pair(patch, xi_i);
    auto it = alpha_cache_.find(key);
    if (it == alpha_cache_.end()) {
      std::optional<KFormField> a;
      try {
        a = b_.patches[static_cast<std::size_t>(patch)].alpha(xi_vector(xis_[xi_i]));
      } catch (const Error& e) {
        alpha_errors_[key] = e.what();
      }
      it = alpha_cache_.emplace(key, std::move(a)).first;
    }
    return it->second;
  }

  bool any_alpha(std::size_t xi_i) const {
    for (int p = 0; p < static_cast<int>(b_.patches.size()); ++p) {
      if (alpha(p, xi_i)) return true;
    }
    return false;
  }

  std::string alpha_error(std::size_t xi_i) const {
    for (int p = 0; p < static_cast<int>(b_.patches.size()); ++p) {
      if (auto it = alpha_errors_.find({p, xi_i}); it != alpha_errors_.end()) return it->second;
    }
    return {};
  }

  bool has_quotient() const {
    return std::any_of(b_.patches.begin(), b_.patches.end(), [](const Patch& p) { return p.quotient.has_value(); });
  }

  void xi_independent(std::vector<CheckRecord>& out) const;
  void per_xi(std::vector<CheckRecord>& out) const;
  void zero_level(std::vector<CheckRecord>& out) const;
  void controls(std::vector<CheckRecord>& out) const;

  const ScenarioBundle& b_;
  const RunConfig& cfg_;
  std::vector<double> xis_;
  std::vector<PatchData> data_;
  mutable std::map<std::pair<int, std::size_t>, std::optional<KFormField>> alpha_cache_;
  mutable std::map<std::pair<int, std::size_t>, std::string> alpha_errors_;
  mutable std::map<std::string, std::string> notes_;
};

double vec_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector lengths differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Max normwise relative AD/FD discrepancy of every component of f at p: each
/// gradient or Hessian error is scaled by max(1, largest AD entry of that block).
double fd_discrepancy(const JetMap& f, const Chart& chart, std::span<const double> p) {
  const auto z = seed(p);
  const auto jets = f(std::span<const Jet2>(z));
  const int n = static_cast<int>(p.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < jets.size(); ++k) {
    const ScalarFunction comp = [&f, k](std::span<const double> y) {
      const auto zy = seed(y);
      return f(std::span<const Jet2>(zy))[k].value();
    };
    const auto fd = fd_oracle(comp, p, 1e-4, chart.lower, chart.upper);
    const Jet2& j = jets[k];
    if (j.order() >= 1) {
      double scale = 1.0;
      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(j.grad(i)));
        err = std::max(err, std::abs(j.grad(i) - fd.grad[static_cast<std::size_t>(i)]));
      }
      worst = std::max(worst, err / scale);
    }
    if (j.order() >= 2) {
      double scale = 1.0;
      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
          scale = std::max(scale, std::abs(j.hess(i, l)));
          err = std::max(err, std::abs(j.hess(i, l) - fd.hess[static_cast<std::size_t>(i * n + l)]));
        }
      }
      worst = std::max(worst, err / scale);
    }
  }
  return worst;
}

/// A 1-form no catalog action preserves.
KFormField generic_one_form(const Chart& chart) {
  const int n = chart.dim;
  return KFormField::one_form(chart, [n](std::span<const Jet2> x) {
    std::vector<Jet2> out;
    for (int i = 0; i < n; ++i) out.push_back(sin(1.3 * x[static_cast<std::size_t>((i + 1) % n)] + 0.7 * i));
    return out;
  });
}

KFormField generic_function(const Chart& chart) {
  const int n = chart.dim;
  return KFormField::function(chart, [n](std::span<const Jet2> x) {
    Jet2 acc = Jet2::constant(x.front().dim(), 0.0);
    for (int i = 0; i < n; ++i) acc += 0.5 * sin(x[static_cast<std::size_t>(i)] + i);
    return acc;
  });
}

/// d_θ(d_θ a) at p, or nullopt when the degree does not fit.
std::optional<double> d_theta_squared(const ClosedOneForm& theta, const KFormField& a, std::span<const double> p) {
  if (a.degree() + 2 > a.dim()) return std::nullopt;
  return twisted_derivative(theta, twisted_derivative(theta, a)).at(p).max_abs();
}

std::optional<double> cartan_residual(const VectorField& x, const ClosedOneForm& theta, const KFormField& a,
                                      std::span<const double> p) {
  if (a.degree() + 1 > a.dim()) return std::nullopt;
  const FormValue lhs = twisted_lie_derivative(x, theta, a).at(p);
  FormValue rhs = interior_product(x, twisted_derivative(theta, a)).at(p);
  if (a.degree() > 0) rhs += twisted_derivative(theta, interior_product(x, a)).at(p);
  return residual(lhs, rhs);
}

void Runner::xi_independent(std::vector<CheckRecord>& out) const {
  // AD vs FD on every coefficient function the scenario declares.
  out.push_back(sampled(
      "jets.fd_agreement", std::nullopt, 0,
      [this](Rng& rng, ChartPoint& where) -> std::optional<double> {
        const Sample s = cotangent_sample(rng, where);
        const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
        const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
        const Chart& base = p.base.chart;
        double worst = 0.0;
        auto coeffs = [](const KFormField& f) {
          return JetMap([f](std::span<const Jet2> x) { return f.coefficients(x); });
        };
        worst = std::max(worst, fd_discrepancy(coeffs(p.theta.form()), base, s.q));
        for (const auto& f : p.action.fields) {
          worst = std::max(worst, fd_discrepancy([f](std::span<const Jet2> x) { return f.components(x); }, base, s.q));
        }
        for (std::size_t i = 0; i < xis_.size(); ++i) {
          if (const auto& a = alpha(s.patch, i)) {
            worst = std::max(worst, fd_discrepancy(coeffs(*a), base, s.q));
            break;
          }
        }
        const Chart& cc = p.cotangent.chart();
        worst = std::max(worst, fd_discrepancy(coeffs(d.expansion), cc, s.x));
        worst = std::max(worst, fd_discrepancy(coeffs(d.lcs.omega()), cc, s.x));
        for (const auto& r : d.rho) worst = std::max(worst, fd_discrepancy(coeffs(r), cc, s.x));
        if (p.quotient) {
          const auto& qd = *p.quotient;
          worst = std::max(worst, fd_discrepancy([m = qd.projection](std::span<const Jet2> x) { return m.apply(x); },
                                                 base, s.q));
          const auto y = qd.projection.apply(std::span<const double>(s.q));
          if (qd.chart.contains(y)) {
            worst = std::max(worst, fd_discrepancy([m = qd.section](std::span<const Jet2> x) { return m.apply(x); },
                                                   qd.chart, y));
            worst = std::max(worst, fd_discrepancy(coeffs(qd.theta_bar.form()), qd.chart, y));
          }
        }
        return worst;
      },
      std::min(cfg_.samples, 25)));

  out.push_back(sampled("charts.transitions", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) -> std::optional<double> {
    const auto bp = base_point(rng);
    const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    where = {p.base.chart.id, bp.q};
    if (p.base.transitions.empty()) return 0.0;
    return p.base.transition_residual({bp.q});
  }));

  out.push_back(sampled("lcs.closed_lee_form", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    return std::optional<double>(
        std::max(closedness_residual(p.theta.form(), s.q), closedness_residual(d.lifted_theta.form(), s.x)));
  }));

  out.push_back(sampled("lcs.structure_equation", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    return std::optional<double>(data_[static_cast<std::size_t>(s.patch)].lcs.structure_residual(s.x));
  }));

  out.push_back(sampled("lcs.nondegenerate", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    return std::optional<double>(std::abs(data_[static_cast<std::size_t>(s.patch)].lcs.determinant_at(s.x)));
  }));

  out.push_back(sampled("lcs.coordinate_expansion", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    return std::optional<double>(residual(d.lcs.omega().at(s.x), d.expansion.at(s.x)));
  }));

  out.push_back(sampled("twisted.d_theta_squared", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    double worst = 0.0;
    auto take = [&worst](std::optional<double> v) {
      if (v) worst = std::max(worst, *v);
    };
    take(d_theta_squared(d.lifted_theta, d.eta, s.x));
    take(d_theta_squared(d.lifted_theta, d.expansion, s.x));
    take(d_theta_squared(d.lifted_theta, d.lifted_theta.form(), s.x));
    for (const auto& r : d.rho) take(d_theta_squared(d.lifted_theta, r, s.x));
    take(d_theta_squared(p.theta, p.theta.form(), s.q));
    take(d_theta_squared(p.theta, generic_one_form(p.base.chart), s.q));
    take(d_theta_squared(p.theta, generic_function(p.base.chart), s.q));
    for (std::size_t i = 0; i < xis_.size(); ++i) {
      if (const auto& a = alpha(s.patch, i)) take(d_theta_squared(p.theta, *a, s.q));
    }
    return std::optional<double>(worst);
  }));

  out.push_back(sampled("twisted.cartan", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    double worst = 0.0;
    auto take = [&worst](std::optional<double> v) {
      if (v) worst = std::max(worst, *v);
    };
    std::vector<VectorField> fields{d.theta_dual};
    for (const auto& l : d.lifts) fields.push_back(l.lifted);
    for (const auto& x : fields) {
      take(cartan_residual(x, d.lifted_theta, d.eta, s.x));
      take(cartan_residual(x, d.lifted_theta, d.expansion, s.x));
      for (const auto& r : d.rho) take(cartan_residual(x, d.lifted_theta, r, s.x));
    }
    for (const auto& x : p.action.fields) take(cartan_residual(x, p.theta, generic_one_form(p.base.chart), s.q));
    return std::optional<double>(worst);
  }));

  out.push_back(sampled("cotangent.projection_of_lift", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    double worst = 0.0;
    for (const auto& l : d.lifts) {
      const auto pushed = p.cotangent.projection().push(s.x, l.lifted.at(s.x));
      worst = std::max(worst, vec_diff(pushed, l.base.at(s.q)));
    }
    return std::optional<double>(worst);
  }));

  out.push_back(sampled("cotangent.eta_invariance", std::nullopt, 0,
                        [this](Rng& rng, ChartPoint& where) -> std::optional<double> {
                          const Sample s = cotangent_sample(rng, where);
                          const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
                          const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
                          const auto g = lifted_group_element(p, rng, s.q);
                          if (!g) return std::nullopt;
                          return residual(pullback(*g, d.eta).at(s.x), d.eta.at(s.x));
                        }));

  out.push_back(sampled("cotangent.theta_dual_closed_form", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    const auto numeric = omega_dual_vector(d.lcs.omega().at(s.x), d.lifted_theta.form().at(s.x));
    return std::optional<double>(vec_diff(numeric, d.theta_dual.at(s.x)));
  }));

  out.push_back(sampled("hamiltonian.potential", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    double worst = 0.0;
    for (std::size_t k = 0; k < d.lifts.size(); ++k) {
      const auto lhs = interior_product(d.lifts[k].lifted, d.lcs.omega()).at(s.x);
      const auto rhs = twisted_derivative(d.lifted_theta, d.rho[k]).at(s.x);
      worst = std::max(worst, residual(lhs, rhs));
    }
    return std::optional<double>(worst);
  }));

  out.push_back(sampled("hamiltonian.lee_annihilates_orbits", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const auto bp = base_point(rng);
    const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    where = {p.base.chart.id, bp.q};
    double worst = 0.0;
    for (const auto& x : p.action.fields) worst = std::max(worst, std::abs(dot(p.theta.form().at(bp.q).coeffs(), x.at(bp.q))));
    return std::optional<double>(worst);
  }));

  out.push_back(sampled("hamiltonian.group_invariance", std::nullopt, 0,
                        [this](Rng& rng, ChartPoint& where) -> std::optional<double> {
                          const Sample s = cotangent_sample(rng, where);
                          const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
                          const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
                          const auto g = lifted_group_element(p, rng, s.q);
                          if (!g) return std::nullopt;
                          return std::max(residual(pullback(*g, d.lcs.omega()).at(s.x), d.lcs.omega().at(s.x)),
                                          residual(pullback(*g, d.lifted_theta.form()).at(s.x),
                                                   d.lifted_theta.form().at(s.x)));
                        }));

  out.push_back(sampled("momentum.tautological_pairing", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    const auto mu = momentum_map(p.cotangent, p.action, s.x);
    double worst = 0.0;
    for (std::size_t k = 0; k < d.lifts.size(); ++k) {
      const double via_eta = -dot(d.eta.at(s.x).coeffs(), d.lifts[k].lifted.at(s.x));
      worst = std::max({worst, std::abs(mu[k] - via_eta), std::abs(mu[k] - d.rho[k].scalar_at(s.x))});
    }
    return std::optional<double>(worst);
  }));

  if (!has_quotient()) {
    out.push_back(na("quotient.section", std::nullopt, "scenario has no quotient chart"));
    out.push_back(na("theta.descends", std::nullopt, "scenario has no quotient chart"));
    return;
  }
  const auto with_quotient = [](const Patch& p, std::span<const double> q) { return quotient_image_inside(p, q); };
  out.push_back(sampled("quotient.section", std::nullopt, 0, [this, with_quotient](Rng& rng, ChartPoint& where) -> std::optional<double> {
    const auto bp = base_point(rng, with_quotient);
    const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    where = {p.base.chart.id, bp.q};
    const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
    if (!p.quotient->chart.contains(y)) return std::nullopt;
    const auto back = p.quotient->projection.apply(p.quotient->section.apply(std::span<const double>(y)));
    return vec_diff(back, y);
  }));
  out.push_back(sampled("theta.descends", std::nullopt, 0, [this, with_quotient](Rng& rng, ChartPoint& where) -> std::optional<double> {
    const auto bp = base_point(rng, with_quotient);
    const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    where = {p.base.chart.id, bp.q};
    const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
    if (!p.quotient->chart.contains(y)) return std::nullopt;
    return residual(pullback(p.quotient->projection, p.quotient->theta_bar.form()).at(bp.q), p.theta.form().at(bp.q));
  }));
}

void Runner::per_xi(std::vector<CheckRecord>& out) const {
  const auto& ex = b_.expected;
  for (std::size_t xi_i = 0; xi_i < xis_.size(); ++xi_i) {
    const double xi = xis_[xi_i];
    const auto xiv = xi_vector(xi);

    out.push_back(sampled("momentum.regularity", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const auto r = regularity_check(p.cotangent, p.action, s.x);
      return std::optional<double>(std::abs(r.rank - ex.rank));
    }));

    out.push_back(sampled("momentum.level_set", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      return std::optional<double>(level_set_defect(p.cotangent, p.action, xiv, s.x));
    }));

    out.push_back(sampled("foliation.frame_tangent", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const auto frame = foliation_frame(p.cotangent, p.action, p.theta, xiv, s.x);
      const auto dmu = momentum_jacobian(p.cotangent, p.action, s.x);
      const auto tangent = level_set_tangent(p.cotangent, p.action, s.x);
      const auto omega = d.lcs.omega().at(s.x);
      double worst = 0.0;
      for (const auto& v : frame) {
        worst = std::max(worst, max_abs(dmu * std::span<const double>(v)));
        for (const auto& w : tangent.vectors()) worst = std::max(worst, std::abs(omega.evaluate({v, w})));
      }
      return std::optional<double>(worst);
    }));

    out.push_back(sampled("foliation.brute_force", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const SubspaceBasis frame(2 * p.cotangent.n(), foliation_frame(p.cotangent, p.action, p.theta, xiv, s.x));
      return std::optional<double>(principal_angle_distance(frame, foliation_brute_force(p.cotangent, p.action, d.lcs, s.x)));
    }));

    out.push_back(sampled("foliation.annihilator", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      return std::optional<double>(
          omega_annihilator_of_level_set(p.cotangent, p.action, p.theta, d.lcs, xiv, s.x).angle);
    }));

    std::set<int> fol_dims;
    std::set<int> level_dims;
    std::set<int> reduced_dims;
    auto dims = [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const int fol = foliation_brute_force(p.cotangent, p.action, d.lcs, s.x).dim();
      const int level = level_set_tangent(p.cotangent, p.action, s.x).dim();
      fol_dims.insert(fol);
      level_dims.insert(level);
      reduced_dims.insert(level - fol);
      return std::make_pair(fol, level);
    };
    auto describe = [](const std::set<int>& s) {
      std::string r;
      for (int v : s) r += (r.empty() ? "" : "/") + std::to_string(v);
      return r;
    };
    auto fol_record = sampled("foliation.dimension", xi, xi_i, [&](Rng& rng, ChartPoint& where) {
      const auto [fol, level] = dims(rng, where);
      return std::optional<double>(std::max(std::abs(fol - ex.foliation_dim), std::abs(level - ex.level_set_dim)));
    });
    fol_record.note = "observed foliation dim " + describe(fol_dims) + ", level-set dim " + describe(level_dims) +
                      " (expected " + std::to_string(ex.foliation_dim) + ", " + std::to_string(ex.level_set_dim) + ")" +
                      (fol_record.note.empty() ? "" : "; " + fol_record.note);
    out.push_back(std::move(fol_record));
    reduced_dims.clear();
    auto red_record = sampled("foliation.reduced_dimension", xi, xi_i, [&](Rng& rng, ChartPoint& where) {
      const auto [fol, level] = dims(rng, where);
      return std::optional<double>(std::abs(level - fol - ex.reduced_dim));
    });
    red_record.note = "observed reduced dim " + describe(reduced_dims) + " (expected " +
                      std::to_string(ex.reduced_dim) + ")" + (red_record.note.empty() ? "" : "; " + red_record.note);
    out.push_back(std::move(red_record));

    // Checks that need α_ξ.
    const std::vector<std::string> alpha_ids = {"alpha.membership", "alpha.lie_condition", "shift.lee_form",
                                                "shift.tautological", "shift.lcs_form", "shift.theta_dual",
                                                "shift.invariance_equivalence", "shift.maps_level_sets"};
    const std::vector<std::string> beta_ids = {"beta.horizontal", "beta.descends", "beta.twisted_closed"};
    const std::vector<std::string> embed_ids = {"embedding.composite_omega", "embedding.composite_theta",
                                                "embedding.annihilator", "embedding.witness",
                                                "embedding.covers_base"};
    if (!any_alpha(xi_i)) {
      const auto err = alpha_error(xi_i);
      const std::string note = err.empty() ? "no α_ξ for this ξ (" + b_.alpha_regime + ")" : "α_ξ construction failed: " + err;
      for (const auto* ids : {&alpha_ids, &beta_ids, &embed_ids}) {
        for (const auto& id : *ids) {
          if (err.empty()) {
            out.push_back(na(id, xi, note));
          } else {
            CheckRecord r = na(id, xi, note);
            r.status = CheckStatus::fail;
            r.errors = 1;
            out.push_back(std::move(r));
          }
        }
      }
      continue;
    }
    const auto with_alpha = [this, xi_i](const Patch& p, std::span<const double> = {}) {
      const auto idx = static_cast<int>(&p - b_.patches.data());
      return alpha(idx, xi_i).has_value();
    };
    out.push_back(sampled("alpha.membership", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const auto bp = base_point(rng, with_alpha);
      const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
      where = {p.base.chart.id, bp.q};
      return std::optional<double>(alpha_xi_residuals(*alpha(bp.patch, xi_i), p.action, p.theta, xiv, bp.q).membership);
    }));
    out.push_back(sampled("alpha.lie_condition", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const auto bp = base_point(rng, with_alpha);
      const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
      where = {p.base.chart.id, bp.q};
      return std::optional<double>(alpha_xi_residuals(*alpha(bp.patch, xi_i), p.action, p.theta, xiv, bp.q).lie);
    }));

    using ShiftBody = std::function<double(const Patch&, const PatchData&, const KFormField&, const SmoothMap&,
                                           const Sample&)>;
    auto shift_check = [&, this](const std::string& id, const ShiftBody& f) {
      return sampled(id, xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
        const Sample s = level_sample(rng, where, xi, with_alpha);
        const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
        const KFormField& a = *alpha(s.patch, xi_i);
        return std::optional<double>(f(p, data_[static_cast<std::size_t>(s.patch)], a, shift_map(p.cotangent, a), s));
      });
    };
    out.push_back(shift_check("shift.lee_form", [](const Patch&, const PatchData& d, const KFormField&,
                                                   const SmoothMap& sh, const Sample& s) {
      return residual(pullback(sh, d.lifted_theta.form()).at(s.x), d.lifted_theta.form().at(s.x));
    }));
    out.push_back(shift_check("shift.tautological", [](const Patch& p, const PatchData& d, const KFormField& a,
                                                       const SmoothMap& sh, const Sample& s) {
      const auto rhs = d.eta.at(s.x) - pullback(p.cotangent.projection(), a).at(s.x);
      return residual(pullback(sh, d.eta).at(s.x), rhs);
    }));
    out.push_back(shift_check("shift.lcs_form", [](const Patch& p, const PatchData& d, const KFormField& a,
                                                   const SmoothMap& sh, const Sample& s) {
      const auto rhs = d.lcs.omega().at(s.x) -
                       pullback(p.cotangent.projection(), twisted_derivative(p.theta, a)).at(s.x);
      return residual(pullback(sh, d.lcs.omega()).at(s.x), rhs);
    }));
    out.push_back(shift_check("shift.theta_dual", [](const Patch&, const PatchData& d, const KFormField&,
                                                     const SmoothMap& sh, const Sample& s) {
      const auto y = sh.apply(std::span<const double>(s.x));
      return vec_diff(sh.push(s.x, d.theta_dual.at(s.x)), d.theta_dual.at(y));
    }));
    out.push_back(shift_check("shift.invariance_equivalence", [xi](const Patch&, const PatchData& d, const KFormField&,
                                                              const SmoothMap& sh, const Sample& s) {
      const auto y = sh.apply(std::span<const double>(s.x));
      double worst = 0.0;
      for (const auto& l : d.lifts) {
        auto rhs = l.lifted.at(y);
        const auto dual = d.theta_dual.at(y);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= xi * dual[i];
        worst = std::max(worst, vec_diff(sh.push(s.x, l.lifted.at(s.x)), rhs));
      }
      return worst;
    }));
    out.push_back(shift_check("shift.maps_level_sets", [](const Patch& p, const PatchData&, const KFormField&,
                                                          const SmoothMap& sh, const Sample& s) {
      return max_abs(momentum_map(p.cotangent, p.action, sh.apply(std::span<const double>(s.x))));
    }));

    const auto with_both = [&](const Patch& p, std::span<const double> q) { return with_alpha(p) && quotient_image_inside(p, q); };
    const bool quotient_alpha = std::any_of(b_.patches.begin(), b_.patches.end(),
                                            [&](const Patch& p) { return with_alpha(p) && p.quotient.has_value(); });
    if (!quotient_alpha) {
      for (const auto* ids : {&beta_ids, &embed_ids}) {
        for (const auto& id : *ids) out.push_back(na(id, xi, "no quotient chart carries α_ξ"));
      }
      continue;
    }
    out.push_back(sampled("beta.horizontal", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const auto bp = base_point(rng, with_both);
      const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
      where = {p.base.chart.id, bp.q};
      const auto dta = twisted_derivative(p.theta, *alpha(bp.patch, xi_i));
      double worst = 0.0;
      for (const auto& x : p.action.fields) worst = std::max(worst, interior_product(x, dta).at(bp.q).max_abs());
      return std::optional<double>(worst);
    }));
    out.push_back(sampled("beta.descends", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto bp = base_point(rng, with_both);
      const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
      where = {p.base.chart.id, bp.q};
      const auto& a = *alpha(bp.patch, xi_i);
      const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
      if (!p.quotient->chart.contains(y)) return std::nullopt;
      const auto dta = twisted_derivative(p.theta, a).at(bp.q);
      const auto beta = descended_beta(p, a);
      if (!beta) return dta.max_abs();
      return residual(pullback(p.quotient->projection, *beta).at(bp.q), dta);
    }));
    const bool fits = std::all_of(b_.patches.begin(), b_.patches.end(), [&](const Patch& p) {
      return !(with_alpha(p) && p.quotient) || p.quotient->chart.dim >= 3;
    });
    if (fits) {
      out.push_back(sampled("beta.twisted_closed", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
        const auto bp = base_point(rng, with_both);
        const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
        const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
        where = {p.quotient->chart.id, y};
        if (!p.quotient->chart.contains(y)) return std::nullopt;
        const auto beta = beta_xi_descend(*alpha(bp.patch, xi_i), p.theta, *p.quotient);
        return twisted_derivative(p.quotient->theta_bar, beta).at(y).max_abs();
      }));
    } else {
      out.push_back(na("beta.twisted_closed", xi, "d_θ̄β_ξ is a 3-form; the quotient has dimension below 3"));
    }

    if (xi == 0.0) {
      for (const auto& id : embed_ids) out.push_back(na(id, xi, "n/a (ξ=0 path): covered by the φ₀ checks"));
      continue;
    }
    // Ψ = φ̄₀ ∘ S̄_ξ on the level set, evaluated with its image inside the quotient chart.
    struct EmbedSample {
      Sample s;
      SmoothMap psi;
      SubspaceBasis tangent;
    };
    auto embed_sample = [&, this](Rng& rng, ChartPoint& where) -> std::optional<EmbedSample> {
      const Sample s = level_sample(rng, where, xi, with_both);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const auto y = p.quotient->projection.apply(std::span<const double>(s.q));
      if (!p.quotient->chart.contains(y)) return std::nullopt;
      const SmoothMap psi = compose(*d.zero_map, shift_map(p.cotangent, *alpha(s.patch, xi_i)));
      return EmbedSample{s, psi, level_set_tangent(p.cotangent, p.action, s.x)};
    };
    out.push_back(sampled("embedding.composite_omega", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto e = embed_sample(rng, where);
      if (!e) return std::nullopt;
      const Patch& p = b_.patches[static_cast<std::size_t>(e->s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(e->s.patch)];
      const auto beta = descended_beta(p, *alpha(e->s.patch, xi_i));
      const KFormField target =
          beta ? d.quotient_lcs->omega() + pullback(p.quotient_cotangent->projection(), *beta) : d.quotient_lcs->omega();
      return residual(pullback(e->psi, target).at(e->s.x).restrict_to(e->tangent),
                      d.lcs.omega().at(e->s.x).restrict_to(e->tangent));
    }));
    out.push_back(sampled("embedding.composite_theta", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto e = embed_sample(rng, where);
      if (!e) return std::nullopt;
      const PatchData& d = data_[static_cast<std::size_t>(e->s.patch)];
      return residual(pullback(e->psi, d.quotient_lcs->theta().form()).at(e->s.x).restrict_to(e->tangent),
                      d.lifted_theta.form().at(e->s.x).restrict_to(e->tangent));
    }));
    notes_["embedding.annihilator"] = "p_*X_a vanishes identically for the catalog quotients (abelian 𝔤 = 𝔤_ξ)";
    out.push_back(sampled("embedding.annihilator", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto e = embed_sample(rng, where);
      if (!e) return std::nullopt;
      const Patch& p = b_.patches[static_cast<std::size_t>(e->s.patch)];
      const auto img = e->psi.apply(std::span<const double>(e->s.x));
      const auto gamma = CotangentChart::fiber_part(img);
      double worst = 0.0;
      for (const auto& x : p.action.fields) {
        worst = std::max(worst, std::abs(dot(gamma, p.quotient->projection.push(e->s.q, x.at(e->s.q)))));
      }
      return worst;
    }));
    out.push_back(sampled("embedding.witness", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto bp = base_point(rng, with_both);
      const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(bp.patch)];
      where = {p.base.chart.id, bp.q};
      const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
      if (!p.quotient->chart.contains(y)) return std::nullopt;
      std::vector<double> gamma(y.size());
      for (double& v : gamma) v = rng.normal();
      const DenseMatrix dp = p.quotient->projection.jacobian(bp.q);
      auto c = dp.transpose() * std::span<const double>(gamma);
      const auto a = alpha(bp.patch, xi_i)->at(bp.q).coeffs();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += a[i];
      const auto x = p.cotangent.point(bp.q, c);
      where = {p.cotangent.chart().id, x};
      const SmoothMap psi = compose(*d.zero_map, shift_map(p.cotangent, *alpha(bp.patch, xi_i)));
      const auto img = psi.apply(std::span<const double>(x));
      return std::max(level_set_defect(p.cotangent, p.action, xiv, x),
                      vec_diff(CotangentChart::fiber_part(img), gamma));
    }));
    out.push_back(sampled("embedding.covers_base", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto e = embed_sample(rng, where);
      if (!e) return std::nullopt;
      const Patch& p = b_.patches[static_cast<std::size_t>(e->s.patch)];
      const auto img = e->psi.apply(std::span<const double>(e->s.x));
      return vec_diff(CotangentChart::base_part(img), p.quotient->projection.apply(std::span<const double>(e->s.q)));
    }));
  }
}

void Runner::zero_level(std::vector<CheckRecord>& out) const {
  const std::vector<std::string> ids = {"phi0.well_defined", "phi0.tautological", "phi0.lee_form", "phi0.lcs_form",
                                        "phi0.roundtrip"};
  const auto zero = std::find(xis_.begin(), xis_.end(), 0.0);
  if (zero == xis_.end()) {
    for (const auto& id : ids) out.push_back(na(id, std::nullopt, "ξ = 0 not requested"));
    return;
  }
  if (!has_quotient()) {
    for (const auto& id : ids) out.push_back(na(id, 0.0, "scenario has no quotient chart"));
    return;
  }
  const std::size_t xi_i = static_cast<std::size_t>(zero - xis_.begin());
  const auto with_quotient = [](const Patch& p, std::span<const double> q) { return quotient_image_inside(p, q); };
  struct ZeroSample {
    Sample s;
    SubspaceBasis tangent;
  };
  auto zero_sample = [&, this](Rng& rng, ChartPoint& where) -> std::optional<ZeroSample> {
    const Sample s = level_sample(rng, where, 0.0, with_quotient);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const auto y = p.quotient->projection.apply(std::span<const double>(s.q));
    if (!p.quotient->chart.contains(y)) return std::nullopt;
    return ZeroSample{s, level_set_tangent(p.cotangent, p.action, s.x)};
  };
  out.push_back(sampled("phi0.well_defined", 0.0, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
    const auto z = zero_sample(rng, where);
    if (!z) return std::nullopt;
    const Patch& p = b_.patches[static_cast<std::size_t>(z->s.patch)];
    const auto first = phi_zero(p.cotangent, p.action, *p.quotient, z->s.x);
    double worst = 0.0;
    for (int k = 0; k < b_.algebra.dim; ++k) {
      std::vector<double> a(static_cast<std::size_t>(b_.algebra.dim), 0.0);
      a[static_cast<std::size_t>(k)] = 1.0;
      worst = std::max(worst, vec_diff(first, phi_zero_second_lift(p.cotangent, p.action, *p.quotient, z->s.x, a)));
    }
    return worst;
  }));
  using FormPick = std::function<std::pair<KFormField, KFormField>(const PatchData&)>;
  auto pullback_check = [&, this](const std::string& id, const FormPick& pick) {
    return sampled(id, 0.0, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto z = zero_sample(rng, where);
      if (!z) return std::nullopt;
      const PatchData& d = data_[static_cast<std::size_t>(z->s.patch)];
      const auto [quotient_form, form] = pick(d);
      return residual(pullback(*d.zero_map, quotient_form).at(z->s.x).restrict_to(z->tangent),
                      form.at(z->s.x).restrict_to(z->tangent));
    });
  };
  out.push_back(pullback_check("phi0.tautological", [](const PatchData& d) {
    return std::make_pair(*d.quotient_eta, d.eta);
  }));
  out.push_back(pullback_check("phi0.lee_form", [](const PatchData& d) {
    return std::make_pair(d.quotient_lcs->theta().form(), d.lifted_theta.form());
  }));
  out.push_back(pullback_check("phi0.lcs_form", [](const PatchData& d) {
    return std::make_pair(d.quotient_lcs->omega(), d.lcs.omega());
  }));
  out.push_back(sampled("phi0.roundtrip", 0.0, xi_i, [&, this](Rng& rng, ChartPoint& where) -> std::optional<double> {
    const auto bp = base_point(rng, with_quotient);
    const Patch& p = b_.patches[static_cast<std::size_t>(bp.patch)];
    where = {p.base.chart.id, bp.q};
    const auto y = p.quotient->projection.apply(std::span<const double>(bp.q));
    if (!p.quotient->chart.contains(y)) return std::nullopt;
    std::vector<double> gamma(y.size());
    for (double& v : gamma) v = rng.normal();
    const auto c = p.quotient->projection.jacobian(bp.q).transpose() * std::span<const double>(gamma);
    const auto x = p.cotangent.point(bp.q, c);
    where = {p.cotangent.chart().id, x};
    return vec_diff(phi_zero(p.cotangent, p.action, *p.quotient, x), gamma);
  }));
}

void Runner::controls(std::vector<CheckRecord>& out) const {
  // Perturbed α_ξ: prefer a nonzero ξ carrying α_ξ, else any ξ with α_ξ.
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < xis_.size(); ++i) {
    if (xis_[i] != 0.0 && any_alpha(i)) {
      pick = i;
      break;
    }
  }
  if (!pick) {
    for (std::size_t i = 0; i < xis_.size(); ++i) {
      if (any_alpha(i)) {
        pick = i;
        break;
      }
    }
  }
  if (!pick) {
    out.push_back(na("control.shift_perturbed_alpha", std::nullopt, "no α_ξ at any requested ξ"));
  } else {
    const std::size_t xi_i = *pick;
    const double xi = xis_[xi_i];
    notes_["control.shift_perturbed_alpha"] = "α_ξ + 0.01·γ with γ not invariant; expected violation";
    out.push_back(sampled("control.shift_perturbed_alpha", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const auto keep = [this, xi_i](const Patch& p, std::span<const double>) {
        return alpha(static_cast<int>(&p - b_.patches.data()), xi_i).has_value();
      };
      const Sample s = level_sample(rng, where, xi, keep);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const KFormField bad = *alpha(s.patch, xi_i) + 0.01 * generic_one_form(p.base.chart);
      const SmoothMap sh = shift_map(p.cotangent, bad);
      const auto y = sh.apply(std::span<const double>(s.x));
      double worst = 0.0;
      for (const auto& l : d.lifts) {
        auto rhs = l.lifted.at(y);
        const auto dual = d.theta_dual.at(y);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= xi * dual[i];
        worst = std::max(worst, vec_diff(sh.push(s.x, l.lifted.at(s.x)), rhs));
      }
      return std::optional<double>(worst);
    }));
  }

  notes_["control.hamiltonian_non_invariant_theta"] = "θ + dg with X(g) ≠ 0; expected violation";
  out.push_back(sampled("control.hamiltonian_non_invariant_theta", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
    const ClosedOneForm bad =
        p.theta + ClosedOneForm::exact_by_construction(exterior_derivative(generic_function(p.base.chart)));
    const auto lcs = lcs_form(p.cotangent, bad);
    const auto lifted = lifted_lee_form(p.cotangent, bad);
    double worst = 0.0;
    for (std::size_t k = 0; k < d.lifts.size(); ++k) {
      worst = std::max(worst, residual(interior_product(d.lifts[k].lifted, lcs.omega()).at(s.x),
                                       twisted_derivative(lifted, d.rho[k]).at(s.x)));
    }
    return std::optional<double>(worst);
  }));

  notes_["control.regularity_degenerate_action"] = "fundamental fields replaced by zero; rank deficiency expected";
  out.push_back(sampled("control.regularity_degenerate_action", std::nullopt, 0, [this](Rng& rng, ChartPoint& where) {
    const Sample s = cotangent_sample(rng, where);
    const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
    ActionSpec degenerate = p.action;
    for (auto& f : degenerate.fields) f = VectorField::zero(p.base.chart);
    const auto r = regularity_check(p.cotangent, degenerate, s.x);
    return std::optional<double>(std::abs(r.expected - r.rank));
  }));

  if (!has_quotient()) {
    out.push_back(na("control.phi0_off_level", std::nullopt, "scenario has no quotient chart"));
  } else {
    const double off = 0.3;
    notes_["control.phi0_off_level"] = "two lifts compared at μ = 0.3; expected disagreement";
    out.push_back(sampled("control.phi0_off_level", off, 0, [this, off](Rng& rng, ChartPoint& where) -> std::optional<double> {
      const auto keep = [](const Patch& p, std::span<const double> q) { return quotient_image_inside(p, q); };
      const Sample s = level_sample(rng, where, off, keep);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const auto y = p.quotient->projection.apply(std::span<const double>(s.q));
      if (!p.quotient->chart.contains(y)) return std::nullopt;
      std::vector<double> a(static_cast<std::size_t>(b_.algebra.dim), 0.0);
      a[0] = 1.0;
      return vec_diff(phi_zero(p.cotangent, p.action, *p.quotient, s.x, kUnbounded),
                      phi_zero_second_lift(p.cotangent, p.action, *p.quotient, s.x, a, kUnbounded));
    }));
  }

  const auto nonzero = std::find_if(xis_.begin(), xis_.end(), [](double v) { return v != 0.0; });
  if (nonzero == xis_.end()) {
    out.push_back(na("control.foliation_wrong_sign", std::nullopt, "no nonzero ξ requested"));
  } else {
    const std::size_t xi_i = static_cast<std::size_t>(nonzero - xis_.begin());
    const double xi = *nonzero;
    double largest_dual = 0.0;
    auto rec = sampled("control.foliation_wrong_sign", xi, xi_i, [&, this](Rng& rng, ChartPoint& where) {
      const Sample s = level_sample(rng, where, xi);
      const Patch& p = b_.patches[static_cast<std::size_t>(s.patch)];
      const PatchData& d = data_[static_cast<std::size_t>(s.patch)];
      const auto dual = d.theta_dual.at(s.x);
      largest_dual = std::max(largest_dual, max_abs(dual));
      std::vector<std::vector<double>> wrong;
      for (const auto& l : d.lifts) {
        auto v = l.lifted.at(s.x);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= xi * dual[i];
        wrong.push_back(std::move(v));
      }
      const SubspaceBasis frame(2 * p.cotangent.n(), wrong);
      return std::optional<double>(principal_angle_distance(frame, foliation_brute_force(p.cotangent, p.action, d.lcs, s.x)));
    });
    if (largest_dual == 0.0) {
      out.push_back(na("control.foliation_wrong_sign", xi, "θ = 0: the sign of the θ̃^ω term is invisible"));
    } else {
      rec.note = "frame X̃ − ξθ̃^ω; expected violation";
      out.push_back(std::move(rec));
    }
  }
}

VerificationReport Runner::run() {
  VerificationReport r;
  r.scenario = b_.name;
  r.seed = cfg_.seed;
  r.samples = cfg_.samples;
  r.xis = xis_;
  xi_independent(r.checks);
  per_xi(r.checks);
  zero_level(r.checks);
  controls(r.controls);
  const ExtraCheckContext ctx{cfg_.seed, cfg_.samples, xis_};
  auto run_extra = [&ctx](const ExtraCheck& e, std::vector<CheckRecord>& out) {
    try {
      for (auto& rec : e.run(ctx)) out.push_back(std::move(rec));
    } catch (const Error& err) {
      CheckRecord rec = CheckAccumulator::not_applicable(e.id, e.anchor, e.tolerance, err.what(), std::nullopt,
                                                         e.comparison);
      rec.status = CheckStatus::fail;
      rec.errors = 1;
      out.push_back(std::move(rec));
    }
  };
  for (const auto& e : b_.extra_checks) run_extra(e, r.checks);
  for (const auto& e : b_.extra_controls) run_extra(e, r.controls);
  for (auto* list : {&r.checks, &r.controls}) {
    for (auto& c : *list) {
      if (auto it = cfg_.tolerances.find(c.id); it != cfg_.tolerances.end()) c.set_tolerance(it->second);
    }
  }
  return r;
}

}  // namespace

VerificationReport run_suite(const RunConfig& config) {
  config.validate();
  const ScenarioBundle b = make_scenario(config.scenario);
  Runner runner(b, config, config.xis.empty() ? b.default_xis : config.xis);
  return runner.run();
}

std::string emit_report(const VerificationReport& report, const std::string& format) {
  if (format == "json") return to_json(report);
  if (format == "text") return to_text(report);
  throw ConfigError("format must be json or text");
}

}  // namespace lcsr
