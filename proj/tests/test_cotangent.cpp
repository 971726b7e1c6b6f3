#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcsr/catalog.hpp"
#include "lcsr/cotangent.hpp"
#include "lcsr/errors.hpp"
#include "oracles.hpp"

using namespace lcsr;

namespace {

const Chart kR2 = Chart::box("R2", {-3, -3}, {3, 3});

SmoothMap rotation(double s) {
  const double c = std::cos(s);
  const double n = std::sin(s);
  return SmoothMap(
      kR2, kR2, [c, n](std::span<const Jet2> q) { return std::vector<Jet2>{c * q[0] - n * q[1], n * q[0] + c * q[1]}; },
      JetMap([c, n](std::span<const Jet2> q) { return std::vector<Jet2>{c * q[0] + n * q[1], -n * q[0] + c * q[1]}; }));
}

ActionSpec rotation_action() {
  ActionSpec a;
  a.base = kR2;
  a.fields = {VectorField(kR2, [](std::span<const Jet2> q) { return std::vector<Jet2>{-q[1], q[0]}; })};
  a.group_element = [](std::span<const double> s) { return rotation(s[0]); };
  return a;
}

std::vector<double> sample(Rng& rng, int n, double box) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(rng.uniform(-box, box));
  for (int i = 0; i < n; ++i) x.push_back(rng.normal());
  return x;
}

}  // namespace

TEST_CASE("tautological form") {
  const CotangentChart t(kR2);
  const KFormField eta = tautological_form(t);
  CHECK(eta.at(std::vector<double>{0.3, 0.4, 0.0, 0.0}).max_abs() == 0.0);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto x = sample(rng, 2, 2.0);
    const FormValue e = eta.at(x);
    CHECK(e.evaluate({{0, 0, 1, 0}}) == 0.0);
    CHECK(e.evaluate({{0, 0, 0, 1}}) == 0.0);
    const std::vector<double> v{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    CHECK(std::abs(e.evaluate({v}) - (x[2] * v[0] + x[3] * v[1])) < 1e-14);
    CHECK(std::abs(e.evaluate({v}) - oracle::intrinsic_eta(t, x, v)) < 1e-9);
  }
}

TEST_CASE("lcs form on the cotangent chart") {
  const CotangentChart t(kR2);
  const LCSStructure flat = lcs_form(t, ClosedOneForm::zero(kR2));
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const FormValue w = flat.omega().at(x);
  // Σ dc_i∧dq_i: the (q_i, c_i) coefficient is −1.
  CHECK(w.coefficient(0b0101) == -1.0);
  CHECK(w.coefficient(0b1010) == -1.0);
  CHECK(w.coefficient(0b0011) == 0.0);
  CHECK(w.coefficient(0b1100) == 0.0);
  CHECK(w.coefficient(0b0110) == 0.0);
  CHECK(w.coefficient(0b1001) == 0.0);

  const Chart circle = Chart::box("S1", {-3}, {3});
  const CotangentChart t1(circle);
  const LCSStructure s = lcs_form(t1, ClosedOneForm::exact_by_construction(KFormField::coordinate_differential(circle, 0)));
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto p = sample(rng, 1, 2.5);
    CHECK(s.structure_residual(p) < 1e-9);
    CHECK(std::abs(s.determinant_at(p)) > 1e-8);
  }
  const KFormField open = KFormField::one_form(kR2, [](std::span<const Jet2> q) {
    return std::vector<Jet2>{q[1], Jet2::constant(q[0].dim(), 0.0)};
  });
  CHECK_THROWS_AS(ClosedOneForm::verified(open, {{0.0, 0.0}, {1.0, 1.0}}), PreconditionFailed);
}

TEST_CASE("lifted fields") {
  const CotangentChart t(kR2);
  const LiftedField trans = lift_fundamental_field(t, VectorField::coordinate(kR2, 0));
  const std::vector<double> x{0.5, -0.5, 1.2, 0.7};
  const auto v = trans.lifted.at(x);
  CHECK(v == std::vector<double>{1, 0, 0, 0});

  const ActionSpec rot = rotation_action();
  const LiftedField lift = lift_fundamental_field(t, rot.fields[0]);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto p = sample(rng, 2, 2.0);
    const auto w = lift.lifted.at(p);
    CHECK(std::abs(w[2] - -p[3]) < 1e-14);
    CHECK(std::abs(w[3] - p[2]) < 1e-14);
    const auto flow = oracle::group_flow_lift(t, rot, 0, p);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(w[k] - flow[k]) < 1e-6);
    const auto pushed = t.projection().push(p, w);
    const auto base = rot.fields[0].at(std::vector<double>{p[0], p[1]});
    CHECK(max_abs(std::vector<double>{pushed[0] - base[0], pushed[1] - base[1]}) < 1e-10);
  }
}

TEST_CASE("cotangent lifts of diffeomorphisms") {
  const CotangentChart t(kR2);
  const SmoothMap id = cotangent_lift_map(t, t, SmoothMap(kR2, kR2, [](std::span<const Jet2> q) {
                                            return std::vector<Jet2>(q.begin(), q.end());
                                          }, JetMap([](std::span<const Jet2> q) { return std::vector<Jet2>(q.begin(), q.end()); })));
  const std::vector<double> x{0.2, 0.3, -1.0, 2.0};
  CHECK(id.apply(x) == x);

  const Chart line = Chart::box("R", {-4}, {4});
  const CotangentChart t1(line);
  const SmoothMap doubling(line, line, [](std::span<const Jet2> q) { return std::vector<Jet2>{2.0 * q[0]}; },
                           JetMap([](std::span<const Jet2> q) { return std::vector<Jet2>{0.5 * q[0]}; }));
  const SmoothMap lifted = cotangent_lift_map(t1, t1, doubling);
  const auto y = lifted.apply(std::vector<double>{1.5, 3.0});
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(1.5));
  const KFormField eta1 = tautological_form(t1);
  const std::vector<double> p1{1.5, 3.0};
  CHECK(residual(pullback(lifted, eta1).at(p1), eta1.at(p1)) < 1e-12);

  const KFormField eta = tautological_form(t);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto p = sample(rng, 2, 1.5);
    const SmoothMap g = cotangent_lift_map(t, t, rotation(rng.uniform(-3, 3)));
    CHECK(residual(pullback(g, eta).at(p), eta.at(p)) < 1e-9);
  }

  const SmoothMap no_inverse(kR2, kR2, [](std::span<const Jet2> q) { return std::vector<Jet2>(q.begin(), q.end()); });
  CHECK_THROWS_AS(cotangent_lift_map(t, t, no_inverse).apply(x), PreconditionFailed);
}

TEST_CASE("theta omega dual") {
  const CotangentChart t(kR2);
  const std::vector<double> x{0.2, 0.1, 0.5, -0.5};
  CHECK(max_abs(theta_omega_dual(t, ClosedOneForm::zero(kR2)).at(x)) == 0.0);
  const ClosedOneForm dq1 = ClosedOneForm::exact_by_construction(KFormField::coordinate_differential(kR2, 0));
  CHECK(theta_omega_dual(t, dq1).at(x) == std::vector<double>{0, 0, 1, 0});
}

TEST_CASE("catalog invariants of the cotangent construction") {
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    Rng rng = Rng::substream(42, name);
    for (int s = 0; s < 200; ++s) {
      const BasePoint bp = b.sample_base(rng);
      const Patch& patch = b.patches[static_cast<std::size_t>(bp.patch)];
      std::vector<double> c;
      for (std::size_t i = 0; i < bp.q.size(); ++i) c.push_back(rng.normal());
      const auto x = patch.cotangent.point(bp.q, c);
      const LCSStructure lcs = lcs_form(patch.cotangent, patch.theta);
      const ClosedOneForm lifted = lifted_lee_form(patch.cotangent, patch.theta);
      CHECK(lcs.structure_residual(x) < 1e-9);
      CHECK(closedness_residual(lifted.form(), x) < 1e-9);
      CHECK(std::abs(lcs.determinant_at(x)) > 1e-8);
      CHECK(residual(lcs.omega().at(x), lcs_form_coordinate_expansion(patch.cotangent, patch.theta).at(x)) < 1e-10);

      const VectorField dual = theta_omega_dual(patch.cotangent, patch.theta);
      const auto closed_form = dual.at(x);
      const auto solved = omega_dual_vector(lcs.omega().at(x), lifted.form().at(x));
      for (std::size_t i = 0; i < closed_form.size(); ++i) CHECK(std::abs(closed_form[i] - solved[i]) < 1e-10);
      const auto vertical = patch.cotangent.projection().push(x, closed_form);
      CHECK(max_abs(vertical) == 0.0);

      for (const auto& f : patch.action.fields) {
        const LiftedField l = lift_fundamental_field(patch.cotangent, f);
        const auto pushed = patch.cotangent.projection().push(x, l.lifted.at(x));
        const auto base = f.at(bp.q);
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(pushed[i] - base[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("lifted Hopf field matches differentiation of the lifted group action") {
  const auto b = make_scenario("hopf-s3");
  Rng rng(5);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const BasePoint bp = b.sample_base(rng);
    const Patch& patch = b.patches[static_cast<std::size_t>(bp.patch)];
    const auto x = patch.cotangent.point(bp.q, std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
    std::vector<double> flow;
    try {
      flow = oracle::group_flow_lift(patch.cotangent, patch.action, 0, x);
    } catch (const DomainError&) {
      continue;
    }
    const auto v = lift_fundamental_field(patch.cotangent, patch.action.fields[0]).lifted.at(x);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(v[k] - flow[k]) < 1e-6 * std::max(1.0, std::abs(v[k])));
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("chart transitions are mutually inverse") {
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    Rng rng = Rng::substream(7, name);
    for (int s = 0; s < 100; ++s) {
      const BasePoint bp = b.sample_base(rng);
      const Patch& patch = b.patches[static_cast<std::size_t>(bp.patch)];
      if (patch.base.transitions.empty()) continue;
      CHECK(patch.base.transition_residual({bp.q}) < 1e-9);
    }
  }
}
