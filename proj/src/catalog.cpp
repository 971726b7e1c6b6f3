#include "lcsr/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lcsr/errors.hpp"

namespace lcsr {

namespace {

constexpr double kS3Box = 3.0;
constexpr double kS2Box = 6.0;
constexpr double kPi = std::numbers::pi;

Jet2 zero_like(std::span<const Jet2> x) { return Jet2::constant(x.empty() ? 0 : x.front().dim(), 0.0); }

std::vector<Jet2> slice(std::span<const Jet2> x, int from, int count) {
  return {x.begin() + from, x.begin() + from + count};
}

std::vector<Jet2> concat(std::vector<Jet2> a, const std::vector<Jet2>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// e^{is}·(z1, z2) with z1 = q1 + i q2, z2 = q3 + i q4.
std::vector<Jet2> rotate(std::span<const Jet2> q, double s) {
  const double c = std::cos(s);
  const double n = std::sin(s);
  return {c * q[0] - n * q[1], n * q[0] + c * q[1], c * q[2] - n * q[3], n * q[2] + c * q[3]};
}

std::vector<Jet2> iq(std::span<const Jet2> q) { return {-1.0 * q[1], q[0], -1.0 * q[3], q[2]}; }

/// 4x3 Jacobian of the chart parametrization, row-major.
std::vector<Jet2> s3_chart_jacobian(std::span<const Jet2> u, double sign) {
  const Jet2 r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  const Jet2 d = 1.0 + r2;
  const Jet2 d2 = d * d;
  std::vector<Jet2> j;
  for (int i = 0; i < 3; ++i) j.push_back((-4.0 * sign) * u[static_cast<std::size_t>(i)] / d2);
  for (int r = 0; r < 3; ++r) {
    for (int i = 0; i < 3; ++i) {
      Jet2 e = -4.0 * u[static_cast<std::size_t>(r)] * u[static_cast<std::size_t>(i)] / d2;
      if (r == i) e += 2.0 / d;
      j.push_back(e);
    }
  }
  return j;
}

/// Ambient tangent vector v at q pushed into the chart.
std::vector<Jet2> s3_push(std::span<const Jet2> q, std::span<const Jet2> v, double sign) {
  const Jet2 den = 1.0 + sign * q[0];
  const Jet2 den2 = den * den;
  std::vector<Jet2> out;
  for (int j = 0; j < 3; ++j) {
    const auto sj = static_cast<std::size_t>(j + 1);
    out.push_back(v[sj] / den - sign * q[sj] * v[0] / den2);
  }
  return out;
}

/// Ambient covector a at q(u) pulled back to the chart: Jᵀ a.
std::vector<Jet2> s3_pull(std::span<const Jet2> u, std::span<const Jet2> a, double sign) {
  const auto j = s3_chart_jacobian(u, sign);
  std::vector<Jet2> out(3, zero_like(u));
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 4; ++r) out[static_cast<std::size_t>(i)] += j[static_cast<std::size_t>(r * 3 + i)] * a[static_cast<std::size_t>(r)];
  }
  return out;
}

/// d(x3 ∘ Hopf) = 2(q1, q2, −q3, −q4) in ambient coordinates.
std::vector<Jet2> dx3_ambient(std::span<const Jet2> q) {
  return {2.0 * q[0], 2.0 * q[1], -2.0 * q[2], -2.0 * q[3]};
}

/// South-pole stereographic coordinates of S² at Hopf(q).
std::vector<Jet2> s2_chart_of(std::span<const Jet2> q) {
  const auto x = hopf_map(q);
  const Jet2 den = 1.0 + x[2];
  return {x[0] / den, x[1] / den};
}

/// Section of the Hopf map over the S² chart, landing in the S3+ chart.
std::vector<Jet2> s2_section_chart(std::span<const Jet2> w) {
  const Jet2 root = sqrt(1.0 + w[0] * w[0] + w[1] * w[1]);
  const Jet2 den = root + 1.0;
  return {zero_like(w), w[0] / den, -1.0 * w[1] / den};
}

/// dh for h = x3 = (1 − |w|²)/(1 + |w|²).
std::vector<Jet2> dh_s2(std::span<const Jet2> w) {
  const Jet2 d = 1.0 + w[0] * w[0] + w[1] * w[1];
  const Jet2 d2 = d * d;
  return {-4.0 * w[0] / d2, -4.0 * w[1] / d2};
}

Chart s3_chart(double sign, const std::string& prefix = "", std::vector<double> lead_lo = {},
               std::vector<double> lead_hi = {}) {
  std::vector<double> lo = std::move(lead_lo);
  std::vector<double> hi = std::move(lead_hi);
  for (int i = 0; i < 3; ++i) {
    lo.push_back(-kS3Box);
    hi.push_back(kS3Box);
  }
  return Chart::box(prefix + (sign > 0 ? "S3+" : "S3-"), std::move(lo), std::move(hi));
}

/// Uniform point on S³ by rejection from the cube.
std::vector<double> sample_s3(Rng& rng) {
  for (;;) {
    std::vector<double> q(4);
    double r2 = 0.0;
    for (double& v : q) {
      v = rng.uniform(-1.0, 1.0);
      r2 += v * v;
    }
    if (r2 > 1.0 || r2 < 1e-4) continue;
    const double r = std::sqrt(r2);
    for (double& v : q) v /= r;
    return q;
  }
}

std::vector<double> to_chart_values(std::span<const double> q, double sign) {
  const auto qj = seed(q);
  return values_of(s3_to_chart(std::span<const Jet2>(qj), sign));
}

std::vector<double> from_chart_values(std::span<const double> u, double sign) {
  const auto uj = seed(u);
  return values_of(s3_from_chart(std::span<const Jet2>(uj), sign));
}

std::vector<std::vector<double>> grid_samples(const Chart& chart, int per_axis) {
  std::vector<std::vector<double>> pts{{}};
  for (int i = 0; i < chart.dim; ++i) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts) {
      for (int k = 0; k < per_axis; ++k) {
        const double lo = chart.lower[static_cast<std::size_t>(i)];
        const double hi = chart.upper[static_cast<std::size_t>(i)];
        auto e = p;
        e.push_back(lo + (hi - lo) * (k + 0.5) / per_axis);
        next.push_back(std::move(e));
      }
    }
    pts = std::move(next);
  }
  return pts;
}

/// Ambient covector A ∈ ℝ⁴ with A·q = 0 representing the chart covector c at u.
std::vector<double> ambient_covector(std::span<const double> u, std::span<const double> c, double sign) {
  const auto uj = seed(u);
  const auto j = values_of(s3_chart_jacobian(std::span<const Jet2>(uj), sign));
  const auto q = from_chart_values(u, sign);
  DenseMatrix m(4, 4);
  std::vector<double> rhs(4, 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 4; ++r) m(i, r) = j[static_cast<std::size_t>(r * 3 + i)];
    rhs[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
  }
  for (int r = 0; r < 4; ++r) m(3, r) = q[static_cast<std::size_t>(r)];
  return solve_linear(m, rhs);
}

ChartPoint cp(const Chart& c, std::vector<double> x) { return {c.id, std::move(x)}; }

// ------------------------------------------------------------------ S³ pieces

/// Fundamental field of the Hopf action in a chart with `lead` leading
/// coordinates that the action does not move.
VectorField hopf_field(const Chart& chart, double sign, int lead) {
  return VectorField(chart, [sign, lead](std::span<const Jet2> x) {
    const auto u = slice(x, lead, 3);
    const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
    const auto v = iq(q);
    std::vector<Jet2> out(static_cast<std::size_t>(lead), zero_like(x));
    return concat(std::move(out), s3_push(std::span<const Jet2>(q), std::span<const Jet2>(v), sign));
  });
}

/// exp(s) acting on the S³ factor, within one chart.
std::function<SmoothMap(std::span<const double>)> hopf_group(const Chart& chart, double sign, int lead) {
  return [chart, sign, lead](std::span<const double> a) {
    auto make = [sign, lead](double s) {
      return JetMap([sign, lead, s](std::span<const Jet2> x) {
        const auto u = slice(x, lead, 3);
        const auto q = rotate(s3_from_chart(std::span<const Jet2>(u), sign), s);
        std::vector<Jet2> out(x.begin(), x.begin() + lead);
        return concat(std::move(out), s3_to_chart(std::span<const Jet2>(q), sign));
      });
    };
    return SmoothMap(chart, chart, make(a[0]), make(-a[0]));
  };
}

JetMap s3_transition(double from_sign, int lead, std::function<Jet2(const Jet2&)> lead_map) {
  (void)from_sign;
  return [lead, lead_map](std::span<const Jet2> x) {
    std::vector<Jet2> out;
    for (int i = 0; i < lead; ++i) out.push_back(lead_map(x[static_cast<std::size_t>(i)]));
    const Jet2 r2 = x[static_cast<std::size_t>(lead)] * x[static_cast<std::size_t>(lead)] +
                    x[static_cast<std::size_t>(lead + 1)] * x[static_cast<std::size_t>(lead + 1)] +
                    x[static_cast<std::size_t>(lead + 2)] * x[static_cast<std::size_t>(lead + 2)];
    for (int i = 0; i < 3; ++i) out.push_back(x[static_cast<std::size_t>(lead + i)] / r2);
    return out;
  };
}

LieAlgebraSpec circle_algebra() {
  LieAlgebraSpec g;
  g.dim = 1;
  g.labels = {"e"};
  return g;
}

// --------------------------------------------------------- product scenarios

struct LeadFactor {
  std::string id;
  double lo;
  double hi;
};

ScenarioBundle product_scenario(const std::string& name, const std::vector<LeadFactor>& lead_charts, bool circle) {
  ScenarioBundle b;
  b.name = name;
  b.algebra = circle_algebra();
  const double signs[2] = {1.0, -1.0};
  std::vector<Chart> charts;
  for (const auto& lf : lead_charts) {
    for (double s : signs) charts.push_back(s3_chart(s, lf.id + "_", {lf.lo}, {lf.hi}));
  }
  for (std::size_t pi = 0; pi < charts.size(); ++pi) {
    const Chart& chart = charts[pi];
    const double sign = signs[pi % 2];
    const std::size_t lead_index = pi / 2;
    Patch p{BaseChart{chart, {}},
            CotangentChart(chart),
            ClosedOneForm::exact_by_construction(KFormField::coordinate_differential(chart, 0)),
            ActionSpec{b.algebra, chart, {hopf_field(chart, sign, 1)}, hopf_group(chart, sign, 1)},
            {},
            std::nullopt,
            std::nullopt};
    p.alpha = [chart](std::span<const double> xi) -> std::optional<KFormField> {
      if (xi[0] == 0.0) return KFormField::zero(chart, 1);
      return std::nullopt;
    };
    // Transitions to every other patch: angle shift on the lead factor, inversion on S³.
    for (std::size_t pj = 0; pj < charts.size(); ++pj) {
      if (pj == pi) continue;
      const std::size_t lead_j = pj / 2;
      const bool flip = (pj % 2) != (pi % 2);
      std::function<Jet2(const Jet2&)> lead_map = [](const Jet2& t) { return t; };
      std::function<Jet2(const Jet2&)> lead_inv = [](const Jet2& t) { return t; };
      if (circle && lead_j != lead_index) {
        if (lead_index == 0) {
          lead_map = [](const Jet2& t) { return t.value() >= 0.0 ? t : t + 2.0 * kPi; };
          lead_inv = [](const Jet2& t) { return t.value() <= kPi ? t : t - 2.0 * kPi; };
        } else {
          lead_map = [](const Jet2& t) { return t.value() <= kPi ? t : t - 2.0 * kPi; };
          lead_inv = [](const Jet2& t) { return t.value() >= 0.0 ? t : t + 2.0 * kPi; };
        }
      }
      JetMap fwd;
      JetMap inv;
      if (flip) {
        fwd = s3_transition(sign, 1, lead_map);
        inv = s3_transition(-sign, 1, lead_inv);
      } else {
        fwd = [lead_map](std::span<const Jet2> x) {
          std::vector<Jet2> out(x.begin(), x.end());
          out[0] = lead_map(x[0]);
          return out;
        };
        inv = [lead_inv](std::span<const Jet2> x) {
          std::vector<Jet2> out(x.begin(), x.end());
          out[0] = lead_inv(x[0]);
          return out;
        };
      }
      p.base.transitions.emplace_back(chart, charts[pj], fwd, inv);
    }
    if (sign > 0) {
      const auto& lf = lead_charts[lead_index];
      Chart qc = Chart::box(lf.id + "_S2s", {lf.lo, -kS2Box, -kS2Box}, {lf.hi, kS2Box, kS2Box});
      SmoothMap proj(chart, qc, [](std::span<const Jet2> x) {
        const auto u = slice(x, 1, 3);
        const auto q = s3_from_chart(std::span<const Jet2>(u), 1.0);
        return concat({x[0]}, s2_chart_of(std::span<const Jet2>(q)));
      });
      SmoothMap sec(qc, chart, [](std::span<const Jet2> y) {
        const auto w = slice(y, 1, 2);
        return concat({y[0]}, s2_section_chart(std::span<const Jet2>(w)));
      });
      p.quotient = QuotientData{qc, proj, sec,
                                ClosedOneForm::exact_by_construction(KFormField::coordinate_differential(qc, 0))};
      p.quotient_cotangent = CotangentChart(qc);
    }
    b.patches.push_back(std::move(p));
  }
  const int n_lead = static_cast<int>(lead_charts.size());
  b.sample_base = [circle, n_lead, lead_charts](Rng& rng) {
    BasePoint bp;
    double t = 0.0;
    int lead_index = 0;
    if (circle) {
      const double tau = rng.uniform(-kPi, kPi);
      if (std::abs(tau) <= kPi / 2) {
        t = tau;
      } else {
        lead_index = 1;
        t = tau < 0 ? tau + 2.0 * kPi : tau;
      }
    } else {
      lead_index = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_lead));
      const auto& lf = lead_charts[static_cast<std::size_t>(lead_index)];
      t = rng.uniform(lf.lo + 0.5, lf.hi - 0.5);
    }
    const auto q = sample_s3(rng);
    const double sign = q[0] >= 0.0 ? 1.0 : -1.0;
    bp.patch = 2 * lead_index + (sign > 0 ? 0 : 1);
    bp.q = {t};
    const auto u = to_chart_values(q, sign);
    bp.q.insert(bp.q.end(), u.begin(), u.end());
    return bp;
  };
  b.default_xis = {0.0, 0.3, -0.3, 0.7, -0.7, 1.0};
  b.expected = ExpectedFacts{1, 1, 7, 6};
  b.alpha_regime = "α_ξ = 0 at ξ = 0; no α_ξ exists for ξ ≠ 0 (orbits are closed circles)";

  // Checks shared by the S¹×S³ and ℝ×S³ scenarios.
  const std::vector<Patch> patches = b.patches;
  const auto sampler = b.sample_base;
  b.extra_checks.push_back(
      {"s1xm.lcs_component", "X + ξ θ̃^ω", 0.1, Comparison::above, [patches, sampler](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         for (std::size_t xi_i = 0; xi_i < ctx.xis.size(); ++xi_i) {
           const double xi = ctx.xis[xi_i];
           if (xi == 0.0) {
             out.push_back(CheckAccumulator::not_applicable("s1xm.lcs_component", "X + ξ θ̃^ω", 0.1,
                                                            "ξ = 0: foliation has no θ̃^ω component", xi,
                                                            Comparison::above));
             continue;
           }
           CheckAccumulator acc("s1xm.lcs_component", "X + ξ θ̃^ω", 0.1, Comparison::above, xi);
           Rng rng = Rng::substream(ctx.seed, "s1xm.lcs_component", xi_i);
           for (int s = 0; s < ctx.samples; ++s) {
             const auto bp = sampler(rng);
             const Patch& p = patches[static_cast<std::size_t>(bp.patch)];
             std::vector<double> seedc(4);
             for (double& v : seedc) v = rng.normal();
             const std::vector<double> xiv{xi};
             const auto x = level_set_point(p.cotangent, p.action, xiv, bp.q, seedc);
             const auto dual = theta_omega_dual(p.cotangent, p.theta).at(x);
             // |ξ|·‖θ̃^ω‖ relative to |ξ|, with ‖θ‖ = 1 for the angle form.
             acc.add(std::abs(xi) * norm2(dual) / std::abs(xi), cp(p.cotangent.chart(), x));
           }
           out.push_back(acc.finish());
         }
         return out;
       }});
  b.extra_checks.push_back(
      {"s1xm.leaf_quotient_map", "S¹ × μ'^{−1}(ξ)", 1e-8, Comparison::below, [patches, sampler](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         const std::string anchor = "S¹ × μ'^{−1}(ξ)";
         for (std::size_t xi_i = 0; xi_i < ctx.xis.size(); ++xi_i) {
           const double xi = ctx.xis[xi_i];
           if (xi == 0.0) {
             out.push_back(CheckAccumulator::not_applicable("s1xm.leaf_quotient_map", anchor, 1e-8,
                                                            "ξ = 0: no fiber-coordinate quotient map", xi));
             continue;
           }
           CheckAccumulator acc("s1xm.leaf_quotient_map", anchor, 1e-8, Comparison::below, xi);
           Rng rng = Rng::substream(ctx.seed, "s1xm.leaf_quotient_map", xi_i);
           for (int s = 0; s < ctx.samples; ++s) {
             const auto bp = sampler(rng);
             const Patch& p = patches[static_cast<std::size_t>(bp.patch)];
             const double sign = bp.patch % 2 == 0 ? 1.0 : -1.0;
             std::vector<double> seedc(4);
             for (double& v : seedc) v = rng.normal();
             const std::vector<double> xiv{xi};
             const auto x = level_set_point(p.cotangent, p.action, xiv, bp.q, seedc);
             const auto frame = foliation_frame(p.cotangent, p.action, p.theta, xiv, x);
             // g(t, u, c) = (t, e^{−i c_t/ξ}·q(u)) is constant along the leaves.
             const auto z = seed(x);
             const auto u = slice(z, 1, 3);
             const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
             std::vector<Jet2> g{z[0]};
             const Jet2 phase = -1.0 * z[4] / xi;
             const Jet2 c = cos(phase);
             const Jet2 sn = sin(phase);
             g.push_back(c * q[0] - sn * q[1]);
             g.push_back(sn * q[0] + c * q[1]);
             g.push_back(c * q[2] - sn * q[3]);
             g.push_back(sn * q[2] + c * q[3]);
             double worst = 0.0;
             for (const auto& v : frame) {
               for (const auto& gi : g) worst = std::max(worst, std::abs(dot(gi.gradient(), v)));
             }
             acc.add(worst, cp(p.cotangent.chart(), x));
           }
           out.push_back(acc.finish());
         }
         return out;
       }});
  b.extra_controls.push_back(
      {"control.alpha_candidate", "(α_ξ)_q ∈ μ'^{−1}(ξ')", 1e-4, Comparison::max_above, [patches, sampler](const ExtraCheckContext& ctx) {
         // α = ξ dt satisfies neither the level condition nor L_X α = ξθ for ξ ≠ 0.
         std::vector<CheckRecord> out;
         const std::string anchor = "(α_ξ)_q ∈ μ'^{−1}(ξ')";
         std::optional<std::size_t> pick;
         for (std::size_t i = 0; i < ctx.xis.size(); ++i) {
           if (ctx.xis[i] != 0.0) {
             pick = i;
             break;
           }
         }
         if (!pick) {
           out.push_back(CheckAccumulator::not_applicable("control.alpha_candidate", anchor, 1e-4,
                                                          "no nonzero ξ requested", std::nullopt, Comparison::max_above));
           return out;
         }
         const double xi = ctx.xis[*pick];
         CheckAccumulator acc("control.alpha_candidate", anchor, 1e-4, Comparison::max_above, xi);
         acc.set_note("candidate α = ξ·dt; expected violation");
         Rng rng = Rng::substream(ctx.seed, "control.alpha_candidate", *pick);
         for (int s = 0; s < ctx.samples; ++s) {
           const auto bp = sampler(rng);
           const Patch& p = patches[static_cast<std::size_t>(bp.patch)];
           const KFormField cand = xi * KFormField::coordinate_differential(p.base.chart, 0);
           const std::vector<double> xiv{xi};
           const auto r = alpha_xi_residuals(cand, p.action, p.theta, xiv, bp.q);
           acc.add(std::max(r.membership, r.lie), cp(p.base.chart, bp.q));
         }
         out.push_back(acc.finish());
         return out;
       }});
  return b;
}

}  // namespace

// ------------------------------------------------------------ public helpers

std::vector<Jet2> s3_from_chart(std::span<const Jet2> u, double sign) {
  if (u.size() != 3) throw DimensionMismatch("S³ chart has three coordinates");
  const Jet2 r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  const Jet2 d = 1.0 + r2;
  return {sign * (1.0 - r2) / d, 2.0 * u[0] / d, 2.0 * u[1] / d, 2.0 * u[2] / d};
}

std::vector<Jet2> s3_to_chart(std::span<const Jet2> q, double sign) {
  if (q.size() != 4) throw DimensionMismatch("S³ lives in ℝ⁴");
  const Jet2 den = 1.0 + sign * q[0];
  if (std::abs(den.value()) < 1e-12) throw DomainError("point at the pole of the S³ chart");
  return {q[1] / den, q[2] / den, q[3] / den};
}

std::vector<Jet2> hopf_map(std::span<const Jet2> q) {
  if (q.size() != 4) throw DimensionMismatch("Hopf map takes a point of ℝ⁴");
  return {2.0 * (q[0] * q[2] + q[1] * q[3]), 2.0 * (q[1] * q[2] - q[0] * q[3]),
          q[0] * q[0] + q[1] * q[1] - q[2] * q[2] - q[3] * q[3]};
}

std::vector<std::vector<double>> quaternion_frame(std::span<const double> q) {
  return {{-q[1], q[0], -q[3], q[2]}, {-q[2], q[3], q[0], -q[1]}, {-q[3], -q[2], q[1], q[0]}};
}

std::vector<double> rxm_quotient_point(double t, std::span<const double> m, double xi) {
  if (xi == 0.0) throw PreconditionFailed("the ℝ×M quotient map needs ξ ≠ 0");
  const auto mj = seed(m);
  return values_of(rotate(std::span<const Jet2>(mj), -t / xi));
}

KFormField alpha_xi_from_f(const KFormField& beta, const KFormField& f, const ClosedOneForm& theta,
                           const ActionSpec& action, std::span<const double> xi,
                           const std::vector<std::vector<double>>& samples, double tol) {
  const KFormField df = exterior_derivative(f);
  double worst = 0.0;
  for (const auto& a : action.algebra.stabilizer_basis(xi)) {
    const VectorField x = action.field(a);
    const double xa = dot(xi, a);
    for (const auto& q : samples) {
      const auto xv = x.at(q);
      worst = std::max(worst, std::abs(dot(df.at(q).coeffs(), xv) - xa));
      worst = std::max(worst, std::abs(dot(beta.at(q).coeffs(), xv) + xa));
      worst = std::max(worst, lie_derivative(x, beta).at(q).max_abs());
    }
  }
  if (worst > tol) throw PreconditionFailed("α_ξ = β + fθ: preconditions fail", worst);
  return beta + f * theta.form();
}

// --------------------------------------------------------------- scenarios

ScenarioBundle scenario_hopf_s3() {
  ScenarioBundle b;
  b.name = "hopf-s3";
  b.summary = "S³ ⊂ ℂ² with the diagonal S¹ action; Lee form pulled back from S² along the Hopf map";
  b.algebra = circle_algebra();
  const double signs[2] = {1.0, -1.0};
  for (double sign : signs) {
    const Chart chart = s3_chart(sign);
    const KFormField th = KFormField::one_form(chart, [sign](std::span<const Jet2> u) {
      const auto q = s3_from_chart(u, sign);
      const auto a = dx3_ambient(std::span<const Jet2>(q));
      return s3_pull(u, std::span<const Jet2>(a), sign);
    });
    Patch p{BaseChart{chart, {}},
            CotangentChart(chart),
            ClosedOneForm::exact_by_construction(th),
            ActionSpec{b.algebra, chart, {hopf_field(chart, sign, 0)}, hopf_group(chart, sign, 0)},
            {},
            std::nullopt,
            std::nullopt};
    p.alpha = [chart](std::span<const double> xi) -> std::optional<KFormField> {
      if (xi[0] == 0.0) return KFormField::zero(chart, 1);
      return std::nullopt;
    };
    p.base.transitions.emplace_back(chart, s3_chart(-sign), s3_transition(sign, 0, nullptr),
                                    s3_transition(-sign, 0, nullptr));
    if (sign > 0) {
      Chart qc = Chart::box("S2s", {-kS2Box, -kS2Box}, {kS2Box, kS2Box});
      SmoothMap proj(chart, qc, [](std::span<const Jet2> u) {
        const auto q = s3_from_chart(u, 1.0);
        return s2_chart_of(std::span<const Jet2>(q));
      });
      SmoothMap sec(qc, chart, [](std::span<const Jet2> w) { return s2_section_chart(w); });
      const KFormField dh = KFormField::one_form(qc, [](std::span<const Jet2> w) { return dh_s2(w); });
      p.quotient = QuotientData{qc, proj, sec, ClosedOneForm::exact_by_construction(dh)};
      p.quotient_cotangent = CotangentChart(qc);
    }
    b.patches.push_back(std::move(p));
  }
  b.sample_base = [](Rng& rng) {
    const auto q = sample_s3(rng);
    const double sign = q[0] >= 0.0 ? 1.0 : -1.0;
    return BasePoint{sign > 0 ? 0 : 1, to_chart_values(q, sign)};
  };
  b.default_xis = {0.0, 0.3, -0.3, 0.7, -0.7, 1.0};
  b.expected = ExpectedFacts{1, 1, 5, 4};
  b.alpha_regime = "α_ξ = 0 at ξ = 0; no α_ξ exists for ξ ≠ 0 (orbits are closed circles)";

  const std::vector<Patch> patches = b.patches;
  const auto sampler = b.sample_base;
  b.extra_checks.push_back(
      {"hopf.momentum_frame", "μ'(q,(a,b,c)) = c", 1e-12, Comparison::below, [patches, sampler](const ExtraCheckContext& ctx) {
         CheckAccumulator acc("hopf.momentum_frame", "μ'(q,(a,b,c)) = c", 1e-12);
         acc.set_note("μ = " + std::string(kHopfFrame.sign < 0 ? "−" : "+") + "α(e" +
                      std::to_string(kHopfFrame.index + 1) + ") in the frame (iq, jq, kq)");
         Rng rng = Rng::substream(ctx.seed, "hopf.momentum_frame");
         for (int s = 0; s < ctx.samples; ++s) {
           const auto bp = sampler(rng);
           const Patch& p = patches[static_cast<std::size_t>(bp.patch)];
           const double sign = bp.patch == 0 ? 1.0 : -1.0;
           std::vector<double> c(3);
           for (double& v : c) v = rng.normal();
           const auto x = p.cotangent.point(bp.q, c);
           const auto mu = momentum_map(p.cotangent, p.action, x);
           const auto a = ambient_covector(bp.q, c, sign);
           const auto frame = quaternion_frame(from_chart_values(bp.q, sign));
           const double coeff = kHopfFrame.sign * dot(a, frame[static_cast<std::size_t>(kHopfFrame.index)]);
           acc.add(std::abs(mu[0] - coeff), cp(p.cotangent.chart(), x));
         }
         return std::vector<CheckRecord>{acc.finish()};
       }});
  b.extra_checks.push_back(
      {"hopf.level_frame_coefficient", "μ'(q,(a,b,c)) = c", 1e-10, Comparison::below, [patches, sampler](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         for (std::size_t xi_i = 0; xi_i < ctx.xis.size(); ++xi_i) {
           const double xi = ctx.xis[xi_i];
           CheckAccumulator acc("hopf.level_frame_coefficient", "μ'(q,(a,b,c)) = c", 1e-10, Comparison::below, xi);
           Rng rng = Rng::substream(ctx.seed, "hopf.level_frame_coefficient", xi_i);
           for (int s = 0; s < ctx.samples; ++s) {
             const auto bp = sampler(rng);
             const Patch& p = patches[static_cast<std::size_t>(bp.patch)];
             const double sign = bp.patch == 0 ? 1.0 : -1.0;
             std::vector<double> seedc(3);
             for (double& v : seedc) v = rng.normal();
             const std::vector<double> xiv{xi};
             const auto x = level_set_point(p.cotangent, p.action, xiv, bp.q, seedc);
             const auto a = ambient_covector(bp.q, CotangentChart::fiber_part(x), sign);
             const auto frame = quaternion_frame(from_chart_values(bp.q, sign));
             const double coeff = kHopfFrame.sign * dot(a, frame[static_cast<std::size_t>(kHopfFrame.index)]);
             acc.add(std::abs(coeff - xi), cp(p.cotangent.chart(), x));
           }
           out.push_back(acc.finish());
         }
         return out;
       }});
  return b;
}

ScenarioBundle scenario_s1_times_s3() {
  auto b = product_scenario("s1xs3", {{"S1a", -2.2, 2.2}, {"S1b", 0.9, 5.4}}, true);
  b.summary = "Q = S¹ × S³, Lee form the angle form of S¹, S¹ acting on the S³ factor";
  return b;
}

ScenarioBundle scenario_rxm_quotient() {
  auto b = product_scenario("rxm-quotient", {{"R", -3.0, 3.0}}, false);
  b.summary = "Q = ℝ × S³ with θ = dt; the quotient of ℝ × M by s·(t,m) = (t + sξ, e^{is}m) is M";

  // Quotient-map checks on ℝ × S³ in ambient and chart coordinates.
  struct Forms {
    Chart chart;         // (t, u) on ℝ × S3±
    Chart target;        // u on S3±
    double sign;
  };
  std::vector<Forms> charts;
  for (double sign : {1.0, -1.0}) charts.push_back({s3_chart(sign, "R_", {-3.0}, {3.0}), s3_chart(sign), sign});

  // Invariant horizontal test form (1 + x1²) df ∧ dx3 with f = Re(e^{−it/ξ} z1),
  // and the invariant non-horizontal control A ∧ dx3 with A = ⟨iq, dq⟩.
  auto test_form = [](const Chart& chart, double sign, double xi, bool horizontal) {
    const KFormField g = KFormField::function(chart, [sign](std::span<const Jet2> x) {
      const auto u = slice(x, 1, 3);
      const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
      const Jet2 x1 = 2.0 * (q[0] * q[2] + q[1] * q[3]);
      return 1.0 + x1 * x1;
    });
    const KFormField dx3 = KFormField::one_form(chart, [sign](std::span<const Jet2> x) {
      const auto u = slice(x, 1, 3);
      const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
      const auto a = dx3_ambient(std::span<const Jet2>(q));
      return concat({zero_like(x)}, s3_pull(std::span<const Jet2>(u), std::span<const Jet2>(a), sign));
    });
    KFormField first;
    if (horizontal) {
      first = KFormField::one_form(chart, [sign, xi](std::span<const Jet2> x) {
        const auto u = slice(x, 1, 3);
        const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
        const Jet2 c = cos(x[0] / xi);
        const Jet2 s = sin(x[0] / xi);
        const Jet2 dt = (q[1] * c - q[0] * s) / xi;
        const std::vector<Jet2> a{c, s, zero_like(x), zero_like(x)};
        return concat({dt}, s3_pull(std::span<const Jet2>(u), std::span<const Jet2>(a), sign));
      });
    } else {
      first = KFormField::one_form(chart, [sign](std::span<const Jet2> x) {
        const auto u = slice(x, 1, 3);
        const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
        const auto a = iq(q);
        return concat({zero_like(x)}, s3_pull(std::span<const Jet2>(u), std::span<const Jet2>(a), sign));
      });
    }
    return g * wedge(first, dx3);
  };
  // Restriction to {0} × S³ in the u chart.
  auto restricted_form = [](const Chart& target, double sign, bool horizontal) {
    const KFormField g = KFormField::function(target, [sign](std::span<const Jet2> u) {
      const auto q = s3_from_chart(u, sign);
      const Jet2 x1 = 2.0 * (q[0] * q[2] + q[1] * q[3]);
      return 1.0 + x1 * x1;
    });
    const KFormField dx3 = KFormField::one_form(target, [sign](std::span<const Jet2> u) {
      const auto q = s3_from_chart(u, sign);
      const auto a = dx3_ambient(std::span<const Jet2>(q));
      return s3_pull(u, std::span<const Jet2>(a), sign);
    });
    const KFormField first = KFormField::one_form(target, [sign, horizontal](std::span<const Jet2> u) {
      const auto q = s3_from_chart(u, sign);
      std::vector<Jet2> a = horizontal ? std::vector<Jet2>{zero_like(u) + 1.0, zero_like(u), zero_like(u), zero_like(u)}
                                       : iq(q);
      return s3_pull(u, std::span<const Jet2>(a), sign);
    });
    return g * wedge(first, dx3);
  };
  auto quotient_map = [](const Chart& chart, double sign, const Chart& target, double target_sign, double xi) {
    return SmoothMap(chart, target, [sign, target_sign, xi](std::span<const Jet2> x) {
      const auto u = slice(x, 1, 3);
      const auto q = s3_from_chart(std::span<const Jet2>(u), sign);
      // e^{−it/ξ}·q with t a jet.
      const Jet2 c = cos(x[0] / xi);
      const Jet2 s = sin(x[0] / xi);
      const std::vector<Jet2> r{c * q[0] + s * q[1], c * q[1] - s * q[0], c * q[2] + s * q[3], c * q[3] - s * q[2]};
      return s3_to_chart(std::span<const Jet2>(r), target_sign);
    });
  };
  auto nonzero = [](const std::vector<double>& xis) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < xis.size(); ++i) {
      if (xis[i] != 0.0) idx.push_back(i);
    }
    return idx;
  };
  auto sample_rxm = [](Rng& rng) {
    const double t = rng.uniform(-2.5, 2.5);
    const auto q = sample_s3(rng);
    return std::make_pair(t, q);
  };

  b.extra_checks.push_back({"rxm.identity_at_zero", "φ̃(t,m) = e^{−it/ξ}·m", 1e-14, Comparison::below, [nonzero, sample_rxm](const ExtraCheckContext& ctx) {
                              std::vector<CheckRecord> out;
                              for (std::size_t i : nonzero(ctx.xis)) {
                                const double xi = ctx.xis[i];
                                CheckAccumulator acc("rxm.identity_at_zero", "φ̃(t,m) = e^{−it/ξ}·m", 1e-14,
                                                     Comparison::below, xi);
                                Rng rng = Rng::substream(ctx.seed, "rxm.identity_at_zero", i);
                                for (int s = 0; s < ctx.samples; ++s) {
                                  const auto [t, m] = sample_rxm(rng);
                                  (void)t;
                                  const auto img = rxm_quotient_point(0.0, m, xi);
                                  double worst = 0.0;
                                  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(img[static_cast<std::size_t>(k)] - m[static_cast<std::size_t>(k)]));
                                  acc.add(worst, {"R4", m});
                                }
                                out.push_back(acc.finish());
                              }
                              return out;
                            }});
  b.extra_checks.push_back(
      {"rxm.equivariance", "φ̃(t+sξ, e^{is}·m) = ... = φ̃(t,m)", 1e-10, Comparison::below, [nonzero, sample_rxm](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         for (std::size_t i : nonzero(ctx.xis)) {
           const double xi = ctx.xis[i];
           CheckAccumulator acc("rxm.equivariance", "φ̃(t+sξ, e^{is}·m) = ... = φ̃(t,m)", 1e-10, Comparison::below, xi);
           Rng rng = Rng::substream(ctx.seed, "rxm.equivariance", i);
           for (int s = 0; s < ctx.samples; ++s) {
             const auto [t, m] = sample_rxm(rng);
             const double sh = rng.uniform(-kPi, kPi);
             const auto mj = seed(m);
             const auto moved = values_of(rotate(std::span<const Jet2>(mj), sh));
             const auto lhs = rxm_quotient_point(t + sh * xi, moved, xi);
             const auto rhs = rxm_quotient_point(t, m, xi);
             double worst = 0.0;
             for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(lhs[static_cast<std::size_t>(k)] - rhs[static_cast<std::size_t>(k)]));
             std::vector<double> pt{t};
             pt.insert(pt.end(), m.begin(), m.end());
             acc.add(worst, {"RxR4", pt});
           }
           out.push_back(acc.finish());
         }
         return out;
       }});

  auto descent_check = [charts, test_form, restricted_form, quotient_map, nonzero](
                           const ExtraCheckContext& ctx, const std::string& id, bool horizontal, double tol,
                           Comparison cmp, bool first_only) {
    std::vector<CheckRecord> out;
    const std::string anchor = "descends to α₀ = α|_{{0}×M}";
    auto idx = nonzero(ctx.xis);
    if (first_only && idx.size() > 1) idx.resize(1);
    if (idx.empty()) {
      out.push_back(CheckAccumulator::not_applicable(id, anchor, tol, "no nonzero ξ requested", std::nullopt, cmp));
      return out;
    }
    for (std::size_t i : idx) {
      const double xi = ctx.xis[i];
      CheckAccumulator acc(id, anchor, tol, cmp, xi);
      if (!horizontal) acc.set_note("A ∧ dx3 is ℝ-invariant but not horizontal; expected violation");
      Rng rng = Rng::substream(ctx.seed, id, i);
      for (int s = 0; s < ctx.samples; ++s) {
        const double t = rng.uniform(-2.5, 2.5);
        const auto q = sample_s3(rng);
        const double sign = q[0] >= 0.0 ? 1.0 : -1.0;
        const auto& src = charts[sign > 0 ? 0 : 1];
        std::vector<double> x{t};
        const auto u = to_chart_values(q, sign);
        x.insert(x.end(), u.begin(), u.end());
        const auto img = rxm_quotient_point(t, q, xi);
        const double tsign = img[0] >= 0.0 ? 1.0 : -1.0;
        const auto& tgt = charts[tsign > 0 ? 0 : 1];
        try {
          const KFormField lhs = pullback(quotient_map(src.chart, sign, tgt.target, tsign, xi),
                                          restricted_form(tgt.target, tsign, horizontal));
          const KFormField rhs = test_form(src.chart, sign, xi, horizontal);
          acc.add(residual(lhs.at(x), rhs.at(x)), cp(src.chart, x));
        } catch (const Error& e) {
          acc.add_failure(e.what(), cp(src.chart, x));
        }
      }
      out.push_back(acc.finish());
    }
    return out;
  };
  b.extra_checks.push_back({"rxm.descent", "descends to α₀ = α|_{{0}×M}", 1e-8, Comparison::below, [descent_check](const ExtraCheckContext& ctx) {
                              return descent_check(ctx, "rxm.descent", true, 1e-8, Comparison::below, false);
                            }});
  b.extra_checks.push_back(
      {"rxm.form_invariance", "descends to α₀ = α|_{{0}×M}", 1e-9, Comparison::below, [charts, test_form, nonzero](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         for (std::size_t i : nonzero(ctx.xis)) {
           const double xi = ctx.xis[i];
           CheckAccumulator acc("rxm.form_invariance", "descends to α₀ = α|_{{0}×M}", 1e-9, Comparison::below, xi);
           acc.set_note("L_Y α and i_Y α for the generator Y = ξ∂_t + X of the ℝ action");
           Rng rng = Rng::substream(ctx.seed, "rxm.form_invariance", i);
           for (int s = 0; s < ctx.samples; ++s) {
             const double t = rng.uniform(-2.5, 2.5);
             const auto q = sample_s3(rng);
             const double sign = q[0] >= 0.0 ? 1.0 : -1.0;
             const auto& src = charts[sign > 0 ? 0 : 1];
             std::vector<double> x{t};
             const auto u = to_chart_values(q, sign);
             x.insert(x.end(), u.begin(), u.end());
             const VectorField y = xi * VectorField::coordinate(src.chart, 0) + hopf_field(src.chart, sign, 1);
             const KFormField a = test_form(src.chart, sign, xi, true);
             const double r = std::max(lie_derivative(y, a).at(x).max_abs(), interior_product(y, a).at(x).max_abs());
             acc.add(r, cp(src.chart, x));
           }
           out.push_back(acc.finish());
         }
         return out;
       }});
  b.extra_controls.push_back({"control.rxm_non_horizontal", "descends to α₀ = α|_{{0}×M}", 1e-4, Comparison::max_above, [descent_check](const ExtraCheckContext& ctx) {
                                return descent_check(ctx, "control.rxm_non_horizontal", false, 1e-4,
                                                     Comparison::max_above, true);
                              }});
  return b;
}

ScenarioBundle scenario_flat_baseline() {
  ScenarioBundle b;
  b.name = "flat-baseline";
  b.summary = "Q = ℝ² with the translation action along q1 and θ = 0 (classical cotangent reduction)";
  b.algebra = circle_algebra();
  const Chart chart = Chart::box("R2", {-2.0, -2.0}, {2.0, 2.0});
  Patch p{BaseChart{chart, {}},
          CotangentChart(chart),
          ClosedOneForm::zero(chart),
          ActionSpec{b.algebra, chart, {VectorField::coordinate(chart, 0)}, nullptr},
          {},
          std::nullopt,
          std::nullopt};
  p.action.group_element = [chart](std::span<const double> a) {
    const double s = a[0];
    auto make = [](double sh) {
      return JetMap([sh](std::span<const Jet2> x) { return std::vector<Jet2>{x[0] + sh, x[1]}; });
    };
    return SmoothMap(chart, chart, make(s), make(-s), true);
  };
  p.alpha = [chart](std::span<const double> xi) -> std::optional<KFormField> {
    return (-xi[0]) * KFormField::coordinate_differential(chart, 0);
  };
  const Chart qc = Chart::box("R", {-2.0}, {2.0});
  SmoothMap proj(chart, qc, [](std::span<const Jet2> x) { return std::vector<Jet2>{x[1]}; }, std::nullopt, true);
  SmoothMap sec(qc, chart, [](std::span<const Jet2> y) { return std::vector<Jet2>{zero_like(y), y[0]}; },
                std::nullopt, true);
  p.quotient = QuotientData{qc, proj, sec, ClosedOneForm::zero(qc)};
  p.quotient_cotangent = CotangentChart(qc);
  b.patches.push_back(std::move(p));
  b.sample_base = [](Rng& rng) {
    return BasePoint{0, {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)}};
  };
  b.default_xis = {0.0, 0.3, -0.3, 0.7, -0.7, 1.0};
  b.expected = ExpectedFacts{1, 1, 3, 2};
  b.alpha_regime = "α_ξ = −ξ dq1 (ξ times a flat connection form) for every ξ";
  return b;
}

ScenarioBundle scenario_translation_lcs() {
  ScenarioBundle b;
  b.name = "translation-lcs";
  b.summary = "Q = ℝ × (ℝ² \\ 0), ℝ translating the first factor, Lee form the angle form of the plane";
  b.algebra = circle_algebra();
  const Chart chart = Chart::box("RxP", {-2.0, 0.3, -2.0}, {2.0, 2.0, 2.0});
  const Chart qc = Chart::box("P", {0.3, -2.0}, {2.0, 2.0});
  auto angle_form = [](const Chart& c, int lead) {
    return KFormField::one_form(c, [lead](std::span<const Jet2> x) {
      const Jet2& px = x[static_cast<std::size_t>(lead)];
      const Jet2& py = x[static_cast<std::size_t>(lead + 1)];
      const Jet2 r2 = px * px + py * py;
      std::vector<Jet2> out(static_cast<std::size_t>(lead), zero_like(x));
      out.push_back(-1.0 * py / r2);
      out.push_back(px / r2);
      return out;
    });
  };
  const auto theta = ClosedOneForm::verified(angle_form(chart, 1), grid_samples(chart, 4));
  const auto theta_bar = ClosedOneForm::verified(angle_form(qc, 0), grid_samples(qc, 5));
  Patch p{BaseChart{chart, {}},
          CotangentChart(chart),
          theta,
          ActionSpec{b.algebra, chart, {VectorField::coordinate(chart, 0)}, nullptr},
          {},
          std::nullopt,
          std::nullopt};
  p.action.group_element = [chart](std::span<const double> a) {
    auto make = [](double sh) {
      return JetMap([sh](std::span<const Jet2> x) { return std::vector<Jet2>{x[0] + sh, x[1], x[2]}; });
    };
    return SmoothMap(chart, chart, make(a[0]), make(-a[0]), true);
  };
  const ActionSpec action = p.action;
  const auto samples = grid_samples(chart, 3);
  p.alpha = [chart, theta, action, samples](std::span<const double> xi) -> std::optional<KFormField> {
    const double x0 = xi[0];
    const KFormField beta = KFormField::one_form(chart, [x0](std::span<const Jet2> x) {
      return std::vector<Jet2>{zero_like(x) - x0, x[1] * x[2], sin(x[1])};
    });
    const KFormField f = KFormField::function(chart, [x0](std::span<const Jet2> x) { return x0 * x[0]; });
    return alpha_xi_from_f(beta, f, theta, action, xi, samples);
  };
  SmoothMap proj(chart, qc, [](std::span<const Jet2> x) { return std::vector<Jet2>{x[1], x[2]}; }, std::nullopt,
                 true);
  SmoothMap sec(qc, chart, [](std::span<const Jet2> y) { return std::vector<Jet2>{zero_like(y), y[0], y[1]}; },
                std::nullopt, true);
  p.quotient = QuotientData{qc, proj, sec, theta_bar};
  p.quotient_cotangent = CotangentChart(qc);
  b.patches.push_back(std::move(p));
  b.sample_base = [](Rng& rng) {
    return BasePoint{0, {rng.uniform(-1.5, 1.5), rng.uniform(0.4, 1.9), rng.uniform(-1.9, 1.9)}};
  };
  b.default_xis = {0.0, 0.3, -0.3, 0.7, -0.7, 1.0};
  b.expected = ExpectedFacts{1, 1, 5, 4};
  b.alpha_regime = "α_ξ = β_ξ + fθ with β_ξ = −ξ dt + xy dx + sin(x) dy and f = ξt, for every ξ";

  const Patch patch = b.patches.front();
  const auto sampler = b.sample_base;
  b.extra_checks.push_back(
      {"alpha.beta_plus_f_theta", "taking α_ξ = β_ξ + fθ", 1e-9, Comparison::below, [patch, sampler](const ExtraCheckContext& ctx) {
         std::vector<CheckRecord> out;
         for (std::size_t xi_i = 0; xi_i < ctx.xis.size(); ++xi_i) {
           const double xi = ctx.xis[xi_i];
           CheckAccumulator acc("alpha.beta_plus_f_theta", "taking α_ξ = β_ξ + fθ", 1e-9, Comparison::below, xi);
           acc.set_note("|X(f) − ξ|, |β(X) + ξ|, |L_X β| and |α_ξ − β − fθ|");
           Rng rng = Rng::substream(ctx.seed, "alpha.beta_plus_f_theta", xi_i);
           const Chart& chart = patch.base.chart;
           const KFormField beta = KFormField::one_form(chart, [xi](std::span<const Jet2> x) {
             return std::vector<Jet2>{zero_like(x) - xi, x[1] * x[2], sin(x[1])};
           });
           const KFormField f = KFormField::function(chart, [xi](std::span<const Jet2> x) { return xi * x[0]; });
           const std::vector<double> xiv{xi};
           const auto alpha = patch.alpha(xiv);
           const VectorField x = patch.action.fields.front();
           for (int s = 0; s < ctx.samples; ++s) {
             const auto q = sampler(rng).q;
             const auto xv = x.at(q);
             double r = std::abs(dot(exterior_derivative(f).at(q).coeffs(), xv) - xi);
             r = std::max(r, std::abs(dot(beta.at(q).coeffs(), xv) + xi));
             r = std::max(r, lie_derivative(x, beta).at(q).max_abs());
             r = std::max(r, residual(alpha->at(q), beta.at(q) + f.scalar_at(q) * patch.theta.form().at(q)));
             acc.add(r, cp(chart, q));
           }
           out.push_back(acc.finish());
         }
         return out;
       }});
  return b;
}

std::vector<std::string> scenario_names() {
  return {"hopf-s3", "s1xs3", "rxm-quotient", "flat-baseline", "translation-lcs"};
}

ScenarioBundle make_scenario(const std::string& name) {
  if (name == "hopf-s3") return scenario_hopf_s3();
  if (name == "s1xs3") return scenario_s1_times_s3();
  if (name == "rxm-quotient") return scenario_rxm_quotient();
  if (name == "flat-baseline") return scenario_flat_baseline();
  if (name == "translation-lcs") return scenario_translation_lcs();
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace lcsr
