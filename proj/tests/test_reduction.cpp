#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcsr/catalog.hpp"
#include "lcsr/errors.hpp"
#include "oracles.hpp"

using namespace lcsr;

namespace {

struct Drawn {
  const Patch* patch;
  std::vector<double> q;
  std::vector<double> x;
};

std::vector<double> normal_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& e : v) e = rng.normal();
  return v;
}

Drawn on_level(const ScenarioBundle& b, Rng& rng, double xi) {
  const BasePoint bp = b.sample_base(rng);
  const Patch& p = b.patches[static_cast<std::size_t>(bp.patch)];
  const std::vector<double> xiv(static_cast<std::size_t>(b.algebra.dim), xi);
  const auto x = level_set_point(p.cotangent, p.action, xiv, bp.q, normal_vector(rng, bp.q.size()));
  return {&p, bp.q, x};
}

bool projects_inside(const Patch& p, std::span<const double> q) {
  try {
    return p.quotient && p.quotient->chart.contains(p.quotient->projection.apply(q));
  } catch (const DomainError&) {
    return false;
  }
}

double hopf_chart_sign(const Patch& p) { return p.base.chart.id.back() == '+' ? 1.0 : -1.0; }

const std::vector<double> kXis{0.0, 0.3, -0.3, 0.7, -0.7};

}  // namespace

TEST_CASE("momentum map basics") {
  const auto b = make_scenario("hopf-s3");
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const BasePoint bp = b.sample_base(rng);
    const Patch& p = b.patches[static_cast<std::size_t>(bp.patch)];
    const auto a = normal_vector(rng, 3);
    const auto c = normal_vector(rng, 3);
    std::vector<double> sum(3);
    for (std::size_t k = 0; k < 3; ++k) sum[k] = a[k] + 2.5 * c[k];
    const auto mu_a = momentum_map(p.cotangent, p.action, p.cotangent.point(bp.q, a));
    const auto mu_c = momentum_map(p.cotangent, p.action, p.cotangent.point(bp.q, c));
    const auto mu_sum = momentum_map(p.cotangent, p.action, p.cotangent.point(bp.q, sum));
    CHECK(std::abs(mu_sum[0] - (mu_a[0] + 2.5 * mu_c[0])) < 1e-13);
    CHECK(momentum_map(p.cotangent, p.action, p.cotangent.point(bp.q, std::vector<double>(3, 0.0)))[0] == 0.0);
    const auto x = p.cotangent.point(bp.q, a);
    const KFormField rho = momentum_component(p.cotangent, p.action, 0);
    const KFormField eta = tautological_form(p.cotangent);
    const auto lifted = lift_fundamental_field(p.cotangent, p.action.fields[0]).lifted.at(x);
    CHECK(std::abs(mu_a[0] - rho.scalar_at(x)) < 1e-12);
    CHECK(std::abs(mu_a[0] + dot(eta.at(x).coeffs(), lifted)) < 1e-12);
  }
}

TEST_CASE("Hopf momentum is the designated frame coefficient") {
  const auto b = make_scenario("hopf-s3");
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const BasePoint bp = b.sample_base(rng);
    const Patch& p = b.patches[static_cast<std::size_t>(bp.patch)];
    const auto x = p.cotangent.point(bp.q, normal_vector(rng, 3));
    const auto coeffs = oracle::hopf_frame_coefficients(x, hopf_chart_sign(p));
    const double mu = momentum_map(p.cotangent, p.action, x)[0];
    CHECK(std::abs(mu - kHopfFrame.sign * coeffs[static_cast<std::size_t>(kHopfFrame.index)]) < 1e-8);
  }
  for (int i = 0; i < 50; ++i) {
    const Drawn d = on_level(b, rng, 0.7);
    const auto coeffs = oracle::hopf_frame_coefficients(d.x, hopf_chart_sign(*d.patch));
    CHECK(std::abs(kHopfFrame.sign * coeffs[static_cast<std::size_t>(kHopfFrame.index)] - 0.7) < 1e-8);
  }
}

TEST_CASE("twisted Hamiltonian action") {
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    Rng rng = Rng::substream(3, name);
    for (int i = 0; i < 100; ++i) {
      const BasePoint bp = b.sample_base(rng);
      const Patch& p = b.patches[static_cast<std::size_t>(bp.patch)];
      const auto x = p.cotangent.point(bp.q, normal_vector(rng, bp.q.size()));
      const LCSStructure lcs = lcs_form(p.cotangent, p.theta);
      const ClosedOneForm lifted = lifted_lee_form(p.cotangent, p.theta);
      for (int k = 0; k < b.algebra.dim; ++k) {
        const auto xk = lift_fundamental_field(p.cotangent, p.action.fields[static_cast<std::size_t>(k)]).lifted;
        const KFormField rho = momentum_component(p.cotangent, p.action, k);
        CHECK(residual(interior_product(xk, lcs.omega()).at(x), twisted_derivative(lifted, rho).at(x)) < 1e-8);
        CHECK(std::abs(dot(p.theta.form().at(bp.q).coeffs(), p.action.fields[static_cast<std::size_t>(k)].at(bp.q))) <
              1e-10);
        // Invariant η: L^θ̃_X̃ η = L_X̃ η since θ̃(X̃) = 0, and both vanish.
        CHECK(twisted_lie_derivative(xk, lifted, tautological_form(p.cotangent)).at(x).max_abs() < 1e-8);
      }
    }
  }
}

TEST_CASE("regularity on level sets") {
  for (const std::string name : {"hopf-s3", "s1xs3"}) {
    const auto b = make_scenario(name);
    for (double xi : kXis) {
      Rng rng = Rng::substream(4, name, static_cast<std::uint64_t>(std::llround(10 * xi + 10)));
      for (int i = 0; i < 100; ++i) {
        const Drawn d = on_level(b, rng, xi);
        const std::vector<double> xiv{xi};
        CHECK(level_set_defect(d.patch->cotangent, d.patch->action, xiv, d.x) < 1e-12);
        CHECK(regularity_check(d.patch->cotangent, d.patch->action, d.x).regular());
      }
    }
  }
  const auto b = make_scenario("hopf-s3");
  ActionSpec degenerate = b.patches[0].action;
  degenerate.fields = {VectorField::zero(b.patches[0].base.chart)};
  const std::vector<double> x{0.1, 0.2, 0.3, 1.0, 1.0, 1.0};
  const RankReport r = regularity_check(b.patches[0].cotangent, degenerate, x);
  CHECK(r.rank == 0);
  CHECK_FALSE(r.regular());
}

TEST_CASE("level set point") {
  const auto b = make_scenario("hopf-s3");
  const Patch& p = b.patches[0];
  const std::vector<double> q{0.1, -0.2, 0.3};
  const auto field = p.action.fields[0].at(q);
  // A covector annihilating X at q is already on the zero level.
  const std::vector<double> seed_c{field[1], -field[0], 0.0};
  const auto x = level_set_point(p.cotangent, p.action, std::vector<double>{0.0}, q, seed_c);
  CHECK(CotangentChart::fiber_part(x) == seed_c);
  ActionSpec degenerate = p.action;
  degenerate.fields = {VectorField::zero(p.base.chart)};
  CHECK_THROWS_AS(level_set_point(p.cotangent, degenerate, std::vector<double>{0.3}, q, seed_c), PreconditionFailed);
}

TEST_CASE("foliation frame and annihilator") {
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    for (double xi : kXis) {
      Rng rng = Rng::substream(5, name, static_cast<std::uint64_t>(std::llround(10 * xi + 10)));
      const std::vector<double> xiv{xi};
      for (int i = 0; i < 30; ++i) {
        const Drawn d = on_level(b, rng, xi);
        const Patch& p = *d.patch;
        const LCSStructure lcs = lcs_form(p.cotangent, p.theta);
        const auto frame = foliation_frame(p.cotangent, p.action, p.theta, xiv, d.x);
        REQUIRE(frame.size() == 1);
        const auto dmu = momentum_jacobian(p.cotangent, p.action, d.x);
        CHECK(max_abs(dmu * std::span<const double>(frame[0])) < 1e-9);
        const SubspaceBasis fb(2 * p.cotangent.n(), frame);
        CHECK(principal_angle_distance(fb, foliation_brute_force(p.cotangent, p.action, lcs, d.x)) < 1e-6);
        const auto ann = omega_annihilator_of_level_set(p.cotangent, p.action, p.theta, lcs, xiv, d.x);
        CHECK(ann.numerical.dim() == 1);
        CHECK(ann.angle < 1e-6);
        if (xi == 0.0) {
          const auto lifted = lift_fundamental_field(p.cotangent, p.action.fields[0]).lifted.at(d.x);
          for (std::size_t k = 0; k < lifted.size(); ++k) CHECK(std::abs(frame[0][k] - lifted[k]) < 1e-15);
        }
      }
    }
  }
}

TEST_CASE("shift map") {
  const auto b = make_scenario("translation-lcs");
  const Patch& p = b.patches[0];
  const std::vector<double> x{0.3, 1.0, 0.5, 0.2, -0.4, 1.1};
  const SmoothMap id = shift_map(p.cotangent, KFormField::zero(p.base.chart, 1));
  CHECK(id.apply(x) == x);
  for (double xi : {0.3, -0.7, 1.0}) {
    const auto alpha = p.alpha(std::vector<double>{xi});
    REQUIRE(alpha.has_value());
    const SmoothMap s = shift_map(p.cotangent, *alpha);
    const auto back = s.apply_inverse(s.apply(x));
    CHECK(max_abs(std::vector<double>{back[0] - x[0], back[3] - x[3], back[4] - x[4], back[5] - x[5]}) < 1e-15);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
      const Drawn d = on_level(b, rng, xi);
      CHECK(max_abs(momentum_map(p.cotangent, p.action, s.apply(d.x))) < 1e-10);
    }
  }
}

TEST_CASE("shift identities with theta = 0 reduce to the classical ones") {
  const auto b = make_scenario("flat-baseline");
  const Patch& p = b.patches[0];
  const KFormField eta = tautological_form(p.cotangent);
  const LCSStructure lcs = lcs_form(p.cotangent, p.theta);
  for (double xi : {0.3, -0.7}) {
    const auto alpha = *p.alpha(std::vector<double>{xi});
    const SmoothMap s = shift_map(p.cotangent, alpha);
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const Drawn d = on_level(b, rng, xi);
      const FormValue expected_eta = eta.at(d.x) - pullback(p.cotangent.projection(), alpha).at(d.x);
      CHECK(residual(pullback(s, eta).at(d.x), expected_eta) < 1e-9);
      const FormValue expected_omega =
          lcs.omega().at(d.x) - pullback(p.cotangent.projection(), exterior_derivative(alpha)).at(d.x);
      CHECK(residual(pullback(s, lcs.omega()).at(d.x), expected_omega) < 1e-9);
    }
  }
}

TEST_CASE("alpha hypothesis checks") {
  SUBCASE("beta plus f theta on translation-lcs") {
    const auto b = make_scenario("translation-lcs");
    const Patch& p = b.patches[0];
    Rng rng(8);
    for (double xi : {0.0, 0.3, -0.7, 1.0}) {
      const auto alpha = *p.alpha(std::vector<double>{xi});
      for (int i = 0; i < 50; ++i) {
        const BasePoint bp = b.sample_base(rng);
        const auto r = alpha_xi_residuals(alpha, p.action, p.theta, std::vector<double>{xi}, bp.q);
        CHECK(r.membership < 1e-9);
        CHECK(r.lie < 1e-9);
      }
    }
  }
  SUBCASE("xi = 0 with alpha = 0") {
    for (const std::string name : {"hopf-s3", "s1xs3", "rxm-quotient"}) {
      const auto b = make_scenario(name);
      const Patch& p = b.patches[0];
      const auto alpha = p.alpha(std::vector<double>{0.0});
      REQUIRE(alpha.has_value());
      Rng rng(9);
      const BasePoint bp = b.sample_base(rng);
      const Patch& q = b.patches[static_cast<std::size_t>(bp.patch)];
      const auto r = alpha_xi_residuals(*q.alpha(std::vector<double>{0.0}), q.action, q.theta, std::vector<double>{0.0}, bp.q);
      CHECK(r.membership == 0.0);
      CHECK(r.lie == 0.0);
    }
  }
  SUBCASE("xi dt on the circle factor is not a valid alpha") {
    const auto b = make_scenario("s1xs3");
    const Patch& p = b.patches[0];
    const KFormField candidate = 0.3 * KFormField::coordinate_differential(p.base.chart, 0);
    Rng rng(10);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const BasePoint bp = b.sample_base(rng);
      if (bp.patch != 0) continue;
      worst = std::max(worst, alpha_xi_residuals(candidate, p.action, p.theta, std::vector<double>{0.3}, bp.q).membership);
    }
    CHECK(worst > 0.29);
  }
}

TEST_CASE("beta descends to the quotient") {
  const auto b = make_scenario("translation-lcs");
  const Patch& p = b.patches[0];
  Rng rng(11);
  for (double xi : {0.3, -0.7}) {
    const auto alpha = *p.alpha(std::vector<double>{xi});
    const KFormField dta = twisted_derivative(p.theta, alpha);
    const KFormField beta = beta_xi_descend(alpha, p.theta, *p.quotient);
    for (int i = 0; i < 50; ++i) {
      const BasePoint bp = b.sample_base(rng);
      CHECK(std::abs(dot(interior_product(p.action.fields[0], dta).at(bp.q).coeffs(), std::vector<double>{1, 1, 1})) < 1e-9);
      CHECK(interior_product(p.action.fields[0], dta).at(bp.q).max_abs() < 1e-9);
      CHECK(residual(pullback(p.quotient->projection, beta).at(bp.q), dta.at(bp.q)) < 1e-8);
    }
  }
  // θ = 0, ξ = 0, closed α: β vanishes.
  const auto flat = make_scenario("flat-baseline");
  const Patch& f = flat.patches[0];
  const KFormField closed = KFormField::coordinate_differential(f.base.chart, 1);
  const std::vector<double> q{0.2, 0.3};
  CHECK(twisted_derivative(f.theta, closed).at(q).max_abs() == 0.0);
}

TEST_CASE("phi zero") {
  for (const std::string name : {"hopf-s3", "s1xs3", "rxm-quotient", "translation-lcs"}) {
    const auto b = make_scenario(name);
    Rng rng = Rng::substream(12, name);
    int checked = 0;
    for (int i = 0; i < 100 && checked < 50; ++i) {
      const Drawn d = on_level(b, rng, 0.0);
      const Patch& p = *d.patch;
      if (!projects_inside(p, d.q)) continue;
      ++checked;
      const auto first = phi_zero(p.cotangent, p.action, *p.quotient, d.x);
      const auto second = phi_zero_second_lift(p.cotangent, p.action, *p.quotient, d.x, std::vector<double>{1.0});
      for (std::size_t k = 0; k < first.size(); ++k) CHECK(std::abs(first[k] - second[k]) < 1e-12);

      const auto gamma = normal_vector(rng, first.size());
      const auto c = p.quotient->projection.jacobian(d.q).transpose() * std::span<const double>(gamma);
      const auto pulled_back = p.cotangent.point(d.q, c);
      const auto recovered = phi_zero(p.cotangent, p.action, *p.quotient, pulled_back);
      for (std::size_t k = 0; k < gamma.size(); ++k) CHECK(std::abs(recovered[k] - gamma[k]) < 1e-10);

      const SmoothMap z = zero_level_quotient_map(p.cotangent, *p.quotient_cotangent, *p.quotient);
      const auto tangent = level_set_tangent(p.cotangent, p.action, d.x);
      const KFormField eta_q = tautological_form(*p.quotient_cotangent);
      CHECK(residual(pullback(z, eta_q).at(d.x).restrict_to(tangent),
                     tautological_form(p.cotangent).at(d.x).restrict_to(tangent)) < 1e-8);
      const ClosedOneForm lee_q = lifted_lee_form(*p.quotient_cotangent, p.quotient->theta_bar);
      CHECK(residual(pullback(z, lee_q.form()).at(d.x).restrict_to(tangent),
                     lifted_lee_form(p.cotangent, p.theta).form().at(d.x).restrict_to(tangent)) < 1e-8);
    }
    CHECK(checked >= 40);
  }
  const auto b = make_scenario("hopf-s3");
  Rng rng(13);
  Drawn d = on_level(b, rng, 0.3);
  while (!projects_inside(*d.patch, d.q)) d = on_level(b, rng, 0.3);
  CHECK_THROWS_AS(phi_zero(d.patch->cotangent, d.patch->action, *d.patch->quotient, d.x), PreconditionFailed);
}

TEST_CASE("embedding witness and annihilator") {
  const auto b = make_scenario("translation-lcs");
  const Patch& p = b.patches[0];
  Rng rng(14);
  for (double xi : {0.3, -0.7, 1.0}) {
    const std::vector<double> xiv{xi};
    const auto alpha = *p.alpha(xiv);
    const SmoothMap psi =
        compose(zero_level_quotient_map(p.cotangent, *p.quotient_cotangent, *p.quotient), shift_map(p.cotangent, alpha));
    for (int i = 0; i < 50; ++i) {
      const BasePoint bp = b.sample_base(rng);
      const auto gamma = normal_vector(rng, 2);
      auto c = p.quotient->projection.jacobian(bp.q).transpose() * std::span<const double>(gamma);
      const auto a = alpha.at(bp.q).coeffs();
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += a[k];
      const auto x = p.cotangent.point(bp.q, c);
      CHECK(level_set_defect(p.cotangent, p.action, xiv, x) < 1e-10);
      const auto img = CotangentChart::fiber_part(psi.apply(std::span<const double>(x)));
      CHECK(max_abs(std::vector<double>{img[0] - gamma[0], img[1] - gamma[1]}) < 1e-10);
      const auto pushed = p.quotient->projection.push(bp.q, p.action.fields[0].at(bp.q));
      CHECK(std::abs(dot(img, pushed)) < 1e-9);
    }
  }
}
