#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcsr/catalog.hpp"
#include "lcsr/errors.hpp"
#include "lcsr/forms.hpp"
#include "oracles.hpp"

using namespace lcsr;

namespace {

const Chart kR2 = Chart::box("R2", {-2, -2}, {2, 2});
const Chart kR3 = Chart::box("R3", {-2, -2, -2}, {2, 2, 2});

KFormField dq(const Chart& c, int i) { return KFormField::coordinate_differential(c, i); }

std::vector<double> random_point(Rng& rng, const Chart& c, double margin = 0.5) {
  std::vector<double> p;
  for (int i = 0; i < c.dim; ++i) {
    const double lo = std::isfinite(c.lower[static_cast<std::size_t>(i)]) ? c.lower[static_cast<std::size_t>(i)] + margin : -2;
    const double hi = std::isfinite(c.upper[static_cast<std::size_t>(i)]) ? c.upper[static_cast<std::size_t>(i)] - margin : 2;
    p.push_back(rng.uniform(lo, hi));
  }
  return p;
}

/// A generic 2-form on R3 with non-constant coefficients.
KFormField generic_two_form() {
  return KFormField(kR3, 2, [](std::span<const Jet2> x) {
    return std::vector<Jet2>{sin(x[0] * x[1]), x[2] * x[2] + cos(x[0]), exp(0.3 * x[1]) * x[2]};
  });
}

KFormField generic_one_form(const Chart& c) {
  return KFormField::one_form(c, [n = c.dim](std::span<const Jet2> x) {
    std::vector<Jet2> out;
    for (int i = 0; i < n; ++i) out.push_back(sin(1.1 * x[static_cast<std::size_t>((i + 1) % n)] + i) * x[static_cast<std::size_t>(i)]);
    return out;
  });
}

VectorField generic_field(const Chart& c) {
  return VectorField(c, [n = c.dim](std::span<const Jet2> x) {
    std::vector<Jet2> out;
    for (int i = 0; i < n; ++i) out.push_back(0.5 * cos(x[static_cast<std::size_t>((i + 2) % n)]) + 0.2 * x[static_cast<std::size_t>(i)]);
    return out;
  });
}

ClosedOneForm exact_theta(const Chart& c) {
  return ClosedOneForm::exact_by_construction(exterior_derivative(KFormField::function(c, [](std::span<const Jet2> x) {
    Jet2 acc = 0.3 * sin(x[0]);
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.2 * x[0] * x[i];
    return acc;
  })));
}

}  // namespace

TEST_CASE("wedge examples") {
  const std::vector<double> p{0.1, 0.2};
  CHECK(wedge(dq(kR2, 0), dq(kR2, 0)).at(p).max_abs() == 0.0);
  const FormValue w = wedge(dq(kR2, 0), dq(kR2, 1)).at(p);
  CHECK(w.evaluate({{1, 0}, {0, 1}}) == 1.0);
  CHECK(w.evaluate({{0, 1}, {1, 0}}) == -1.0);
  CHECK_THROWS_AS(wedge(generic_two_form(), generic_two_form()), DimensionMismatch);
  CHECK_THROWS_AS(wedge(dq(kR2, 0), dq(kR3, 0)), DimensionMismatch);
}

TEST_CASE("form values are alternating") {
  Rng rng(1);
  const KFormField a = generic_two_form();
  for (int i = 0; i < 20; ++i) {
    const auto p = random_point(rng, kR3);
    const std::vector<double> u{rng.normal(), rng.normal(), rng.normal()};
    const std::vector<double> v{rng.normal(), rng.normal(), rng.normal()};
    const FormValue ap = a.at(p);
    CHECK(std::abs(ap.evaluate({u, v}) + ap.evaluate({v, u})) < 1e-12);
    CHECK(std::abs(ap.evaluate({u, u})) < 1e-12);
  }
}

TEST_CASE("exterior derivative examples") {
  const KFormField a = KFormField::one_form(kR2, [](std::span<const Jet2> x) {
    return std::vector<Jet2>{Jet2::constant(x[0].dim(), 0.0), x[0] * x[0]};
  });
  const std::vector<double> p{0.7, -0.4};
  CHECK(exterior_derivative(a).at(p).coefficient(0b11) == doctest::Approx(1.4));
  const KFormField f = KFormField::function(kR2, [](std::span<const Jet2> x) { return sin(x[0]) * x[1]; });
  CHECK(exterior_derivative(exterior_derivative(f)).at(p).max_abs() < 1e-12);
  CHECK_THROWS_AS(exterior_derivative(exterior_derivative(exterior_derivative(f))), DimensionMismatch);
}

TEST_CASE("exterior derivative agrees with finite differences of coefficients") {
  Rng rng(2);
  const KFormField a = generic_one_form(kR3);
  const KFormField da = exterior_derivative(a);
  for (int s = 0; s < 30; ++s) {
    const auto p = random_point(rng, kR3);
    std::vector<std::vector<double>> grads;
    for (int i = 0; i < 3; ++i) {
      grads.push_back(fd_oracle([&a, i](std::span<const double> y) { return a.at(y).coeffs()[static_cast<std::size_t>(i)]; },
                                p, 1e-4)
                          .grad);
    }
    // (da)_{ij} = ∂_i a_j − ∂_j a_i for i < j.
    const FormValue v = da.at(p);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double fd = grads[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -
                          grads[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        CHECK(std::abs(v.coefficient((1u << i) | (1u << j)) - fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("interior product examples") {
  const std::vector<double> p{0.3, 0.3};
  const KFormField c = interior_product(VectorField::coordinate(kR2, 0), wedge(dq(kR2, 0), dq(kR2, 1)));
  CHECK(residual(c.at(p), dq(kR2, 1).at(p)) == 0.0);
  CHECK_THROWS_AS(interior_product(VectorField::coordinate(kR2, 0), KFormField::function(kR2, [](std::span<const Jet2> x) {
                    return x[0];
                  })),
                  DimensionMismatch);
}

TEST_CASE("pullback examples") {
  const std::vector<double> p{0.4, -0.2};
  CHECK(residual(pullback(SmoothMap::identity(kR2), dq(kR2, 0)).at(p), dq(kR2, 0).at(p)) == 0.0);

  const CotangentChart t(Chart::box("R", {-2}, {2}));
  const SmoothMap scale(t.chart(), t.chart(), [](std::span<const Jet2> x) { return std::vector<Jet2>{x[0], 2.0 * x[1]}; });
  const KFormField eta = tautological_form(t);
  const std::vector<double> x{0.5, 1.5};
  const FormValue pulled = pullback(scale, eta).at(x);
  CHECK(pulled.coeffs()[0] == doctest::Approx(3.0));
  CHECK(pulled.coeffs()[1] == 0.0);

  const ClosedOneForm theta = exact_theta(kR2);
  const CotangentChart t2(kR2);
  const FormValue lifted = lifted_lee_form(t2, theta).form().at(std::vector<double>{0.1, 0.2, 3.0, -1.0});
  CHECK(lifted.evaluate({{0, 0, 1, 0}}) == 0.0);
  CHECK(lifted.evaluate({{0, 0, 0, 1}}) == 0.0);

  const SmoothMap escape(kR2, kR2, [](std::span<const Jet2> x) { return std::vector<Jet2>{x[0] + 3.0, x[1]}; });
  CHECK_THROWS_AS(pullback(escape, dq(kR2, 0)).at(p), DomainError);
}

TEST_CASE("pullback functoriality on composable catalog maps") {
  const auto b = make_scenario("hopf-s3");
  const Patch& patch = b.patches[0];
  const SmoothMap pi = patch.cotangent.projection();
  const SmoothMap p = patch.quotient->projection;
  const SmoothMap g = compose(p, pi);
  const KFormField a = KFormField(patch.quotient->chart, 2, [](std::span<const Jet2> y) {
    return std::vector<Jet2>{1.0 / (1.0 + y[0] * y[0] + y[1] * y[1])};
  });
  const KFormField theta_bar = patch.quotient->theta_bar.form();
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const BasePoint bp = b.sample_base(rng);
    if (bp.patch != 0) continue;
    const auto y = p.apply(std::span<const double>(bp.q));
    if (!patch.quotient->chart.contains(y)) continue;
    const auto x = patch.cotangent.point(bp.q, std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
    CHECK(residual(pullback(g, a).at(x), pullback(pi, pullback(p, a)).at(x)) < 1e-9);
    CHECK(residual(pullback(g, theta_bar).at(x), pullback(pi, pullback(p, theta_bar)).at(x)) < 1e-9);
  }
}

TEST_CASE("Lie derivative examples") {
  const std::vector<double> p{0.6, -0.3};
  const KFormField a = KFormField::one_form(kR2, [](std::span<const Jet2> x) {
    return std::vector<Jet2>{Jet2::constant(x[0].dim(), 0.0), x[0]};
  });
  CHECK(residual(lie_derivative(VectorField::coordinate(kR2, 0), a).at(p), dq(kR2, 1).at(p)) < 1e-15);
  const KFormField f = KFormField::function(kR2, [](std::span<const Jet2> x) { return x[0] * x[1]; });
  CHECK(lie_derivative(VectorField::coordinate(kR2, 0), f).scalar_at(p) == doctest::Approx(-0.3));
}

TEST_CASE("Lie derivative agrees with the flow oracle") {
  Rng rng(6);
  const VectorField x = generic_field(kR3);
  const std::vector<KFormField> forms = {generic_one_form(kR3), generic_two_form(),
                                         KFormField::function(kR3, [](std::span<const Jet2> y) { return sin(y[0]) * y[2]; })};
  const ClosedOneForm theta = exact_theta(kR3);
  for (int s = 0; s < 20; ++s) {
    const auto p = random_point(rng, kR3);
    for (const auto& a : forms) {
      CHECK(residual(lie_derivative(x, a).at(p), oracle::flow_lie_derivative(x, a, p)) < 1e-5);
      CHECK(residual(twisted_lie_derivative(x, theta, a).at(p), oracle::flow_twisted_lie_derivative(x, theta, a, p)) <
            1e-5);
    }
  }
}

TEST_CASE("twisted operators") {
  Rng rng(8);
  const KFormField a = generic_one_form(kR3);
  const VectorField x = generic_field(kR3);
  const ClosedOneForm zero = ClosedOneForm::zero(kR3);
  const ClosedOneForm theta = exact_theta(kR3);
  for (int s = 0; s < 30; ++s) {
    const auto p = random_point(rng, kR3);
    CHECK(residual(twisted_derivative(zero, a).at(p), exterior_derivative(a).at(p)) == 0.0);
    CHECK(residual(twisted_lie_derivative(x, zero, a).at(p), lie_derivative(x, a).at(p)) == 0.0);
    CHECK(twisted_derivative(theta, twisted_derivative(theta, a)).at(p).max_abs() < 1e-9);
    const FormValue cartan =
        twisted_derivative(theta, interior_product(x, a)).at(p) + interior_product(x, twisted_derivative(theta, a)).at(p);
    CHECK(residual(twisted_lie_derivative(x, theta, a).at(p), cartan) < 1e-8);
  }
  const KFormField not_closed = KFormField::one_form(kR2, [](std::span<const Jet2> y) {
    return std::vector<Jet2>{y[1], Jet2::constant(y[0].dim(), 0.0)};
  });
  CHECK_THROWS_AS(ClosedOneForm::verified(not_closed, {{0.1, 0.2}}), PreconditionFailed);
}

TEST_CASE("d_theta squared vanishes on catalog forms") {
  for (const auto& name : scenario_names()) {
    const auto b = make_scenario(name);
    Rng rng = Rng::substream(42, name);
    for (int s = 0; s < 200; ++s) {
      const BasePoint bp = b.sample_base(rng);
      const Patch& patch = b.patches[static_cast<std::size_t>(bp.patch)];
      const auto x = patch.cotangent.point(bp.q, std::vector<double>(bp.q.size(), 0.7));
      const ClosedOneForm lifted = lifted_lee_form(patch.cotangent, patch.theta);
      const KFormField eta = tautological_form(patch.cotangent);
      CHECK(twisted_derivative(lifted, twisted_derivative(lifted, eta)).at(x).max_abs() < 1e-9);
      CHECK(twisted_derivative(lifted, lcs_form(patch.cotangent, patch.theta).omega()).at(x).max_abs() < 1e-9);
      if (bp.q.size() >= 3) {
        CHECK(twisted_derivative(patch.theta, twisted_derivative(patch.theta, patch.theta.form())).at(bp.q).max_abs() <
              1e-9);
      }
    }
  }
}

TEST_CASE("omega duals") {
  const CotangentChart t(kR2);
  const LCSStructure flat = lcs_form(t, ClosedOneForm::zero(kR2));
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const FormValue omega = flat.omega().at(x);
  const auto v = omega_dual_vector(omega, FormValue::covector(std::vector<double>{1, 0, 0, 0}));
  CHECK(omega.evaluate({v, {1, 0, 0, 0}}) == doctest::Approx(1.0));
  CHECK(std::abs(v[0]) + std::abs(v[1]) + std::abs(v[3]) == 0.0);
  CHECK(std::abs(v[2]) == doctest::Approx(1.0));
  const auto zero = omega_dual_vector(omega, FormValue::covector(std::vector<double>{0, 0, 0, 0}));
  CHECK(max_abs(zero) == 0.0);

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> c(6);
    for (double& e : c) e = rng.normal();
    const FormValue w(4, 2, c);
    if (std::abs(nondegeneracy(w)) < 1e-3) continue;
    std::vector<double> th(4);
    for (double& e : th) e = rng.normal();
    const auto dual = omega_dual_vector(w, FormValue::covector(th));
    for (int i = 0; i < 4; ++i) {
      std::vector<double> e(4, 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      CHECK(std::abs(w.evaluate({dual, e}) - th[static_cast<std::size_t>(i)]) < 1e-10);
    }
    for (int k = 0; k <= 4; ++k) {
      std::vector<std::vector<double>> vs;
      for (int j = 0; j < k; ++j) vs.push_back({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
      const SubspaceBasis sub(4, vs);
      CHECK(sub.dim() + omega_dual_subspace(w, sub).dim() == 4);
    }
  }
  CHECK(omega_dual_subspace(omega, SubspaceBasis::whole_space(4)).dim() == 0);
  CHECK(omega_dual_subspace(omega, SubspaceBasis(4)).dim() == 4);
  CHECK_THROWS_AS(omega_dual_vector(FormValue::zero(4, 2), FormValue::covector(std::vector<double>{1, 0, 0, 0})),
                  DegenerateForm);
}

TEST_CASE("LCS structure checks") {
  Rng rng(13);
  for (int n = 1; n <= 3; ++n) {
    std::vector<double> lo(static_cast<std::size_t>(n), -1.0);
    std::vector<double> hi(static_cast<std::size_t>(n), 1.0);
    const Chart base = Chart::box("U" + std::to_string(n), lo, hi);
    const CotangentChart t(base);
    const ClosedOneForm theta = exact_theta(base);
    const LCSStructure s = lcs_form(t, theta);
    const KFormField expanded = lcs_form_coordinate_expansion(t, theta);
    const ClosedOneForm lifted = lifted_lee_form(t, theta);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x = random_point(rng, base, 0.1);
      for (int k = 0; k < n; ++k) x.push_back(rng.normal());
      CHECK(s.structure_residual(x) < 1e-9);
      if (n >= 2) CHECK(residual(exterior_derivative(s.omega()).at(x), wedge(lifted.form(), s.omega()).at(x)) < 1e-9);
      CHECK(std::abs(s.determinant_at(x)) > 1e-8);
      CHECK(residual(s.omega().at(x), expanded.at(x)) < 1e-10);
    }
  }
}

TEST_CASE("conformal rescaling") {
  const Chart base = Chart::box("U1", {-1}, {1});
  const CotangentChart t(base);
  const LCSStructure s = lcs_form(t, exact_theta(base));
  const KFormField f = KFormField::function(t.chart(), [](std::span<const Jet2> x) { return x[0]; });
  const KFormField minus_f = -1.0 * f;
  const KFormField zero = KFormField::zero(t.chart(), 0);
  const LCSStructure r = conformal_rescale(s, f);
  const LCSStructure back = conformal_rescale(r, minus_f);
  const LCSStructure same = conformal_rescale(s, zero);
  Rng rng(14);
  for (int i = 0; i < 30; ++i) {
    const std::vector<double> x{rng.uniform(-0.9, 0.9), rng.normal()};
    CHECK(r.structure_residual(x) < 1e-9);
    const FormValue expected_theta = s.theta().form().at(x) + exterior_derivative(f).at(x);
    CHECK(residual(r.theta().form().at(x), expected_theta) < 1e-14);
    CHECK(residual(back.omega().at(x), s.omega().at(x)) < 1e-10);
    CHECK(residual(back.theta().form().at(x), s.theta().form().at(x)) < 1e-10);
    CHECK(residual(same.omega().at(x), s.omega().at(x)) == 0.0);
  }
}

TEST_CASE("verified LCS structure rejects a degenerate form") {
  const CotangentChart t(kR2);
  const ClosedOneForm zero = ClosedOneForm::zero(t.chart());
  CHECK_THROWS_AS(LCSStructure::verified(KFormField::zero(t.chart(), 2), zero, {{0, 0, 0, 0}}), DegenerateForm);
}
