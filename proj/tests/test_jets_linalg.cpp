#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lcsr/catalog.hpp"
#include "lcsr/errors.hpp"
#include "lcsr/jet.hpp"
#include "lcsr/linalg.hpp"
#include "lcsr/report.hpp"

using namespace lcsr;

namespace {

double hess_asymmetry(const Jet2& j) {
  double worst = 0.0;
  for (int i = 0; i < j.dim(); ++i) {
    for (int k = 0; k < j.dim(); ++k) worst = std::max(worst, std::abs(j.hess(i, k) - j.hess(k, i)));
  }
  return worst;
}

double ad_vs_fd(const std::function<Jet2(std::span<const Jet2>)>& f, std::span<const double> p) {
  const auto z = seed(p);
  const Jet2 j = f(std::span<const Jet2>(z));
  const auto fd = fd_oracle(
      [&f](std::span<const double> y) {
        const auto zy = seed(y);
        return f(std::span<const Jet2>(zy)).value();
      },
      p, 1e-4);
  const int n = static_cast<int>(p.size());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(j.grad(i) - fd.grad[static_cast<std::size_t>(i)]));
    for (int k = 0; k < n; ++k) {
      worst = std::max(worst, std::abs(j.hess(i, k) - fd.hess[static_cast<std::size_t>(i * n + k)]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("product of coordinate jets") {
  const std::vector<double> p{1.0, 2.0};
  const auto z = seed(p);
  const Jet2 f = z[0] * z[1];
  CHECK(f.value() == 2.0);
  CHECK(f.grad(0) == 2.0);
  CHECK(f.grad(1) == 1.0);
  CHECK(f.hess(0, 1) == 1.0);
  CHECK(f.hess(1, 0) == 1.0);
  CHECK(f.hess(0, 0) == 0.0);
  CHECK(f.hess(1, 1) == 0.0);
}

TEST_CASE("exp of a constant zero") {
  const Jet2 e = exp(Jet2::constant(3, 0.0));
  CHECK(e.value() == 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(e.grad(i) == 0.0);
    for (int k = 0; k < 3; ++k) CHECK(e.hess(i, k) == 0.0);
  }
}

TEST_CASE("sin(q1^2) at 0.7 agrees with finite differences") {
  const std::vector<double> p{0.7};
  const auto z = seed(p);
  const Jet2 s = sin(z[0] * z[0]);
  const auto fd = fd_oracle([](std::span<const double> y) { return std::sin(y[0] * y[0]); }, p, 1e-4);
  CHECK(std::abs(s.grad(0) - fd.grad[0]) < 1e-6);
  CHECK(std::abs(s.hess(0, 0) - fd.hess[0]) < 1e-6);
  CHECK(s.grad(0) == doctest::Approx(2 * 0.7 * std::cos(0.49)).epsilon(1e-14));
}

TEST_CASE("elementary functions against finite differences") {
  Rng rng(7);
  const std::vector<std::function<Jet2(std::span<const Jet2>)>> fns = {
      [](std::span<const Jet2> x) { return cos(x[0] * x[1]) + exp(x[2] / 3.0); },
      [](std::span<const Jet2> x) { return inv(2.0 + sin(x[0])) * x[1]; },
      [](std::span<const Jet2> x) { return pow(1.5 + x[0] * x[0], 1.5) - sqrt(4.0 + x[1] * x[2]); },
      [](std::span<const Jet2> x) { return log(3.0 + x[0]) * square(x[1] - x[2]); },
      [](std::span<const Jet2> x) { return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); },
  };
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (const auto& f : fns) CHECK(ad_vs_fd(f, p) < 1e-6);
  }
}

TEST_CASE("Hessians stay symmetric through composition chains") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto z = seed(p);
    Jet2 acc = z[0];
    for (int depth = 0; depth < 10; ++depth) {
      const Jet2& other = z[static_cast<std::size_t>(depth % 4)];
      switch (depth % 4) {
        case 0: acc = sin(acc * other + 0.3); break;
        case 1: acc = exp(0.5 * acc) - other * other; break;
        case 2: acc = acc / (2.0 + cos(other)); break;
        default: acc = sqrt(1.0 + square(acc + other)); break;
      }
      CHECK(hess_asymmetry(acc) < 1e-12);
    }
  }
}

TEST_CASE("compose follows the chain rule") {
  const std::vector<double> p{0.4, -0.3};
  const auto z = seed(p);
  const std::vector<Jet2> inner{z[0] * z[1], sin(z[0]) + z[1]};
  const std::vector<double> at{inner[0].value(), inner[1].value()};
  const auto w = seed(at);
  const Jet2 outer = exp(w[0]) * w[1] * w[1];
  const Jet2 direct = exp(inner[0]) * inner[1] * inner[1];
  const Jet2 composed = compose(outer, inner);
  CHECK(composed.value() == doctest::Approx(direct.value()));
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(composed.grad(i) - direct.grad(i)) < 1e-13);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(composed.hess(i, k) - direct.hess(i, k)) < 1e-12);
  }
}

TEST_CASE("jet errors") {
  const std::vector<double> p{0.0, 1.0};
  const auto z = seed(p);
  CHECK_THROWS_AS(inv(z[0]), SingularError);
  CHECK_THROWS_AS(z[0] + Jet2::variable(3, 0, 1.0), DimensionMismatch);
  const Jet2 d = (z[1] * z[1]).partial(1);
  CHECK(d.order() == 1);
  CHECK(d.grad(1) == 2.0);
  CHECK_THROWS_AS(d.hess(1, 1), OrderExhausted);
  CHECK_THROWS_AS(d.partial(0).partial(0), OrderExhausted);
  CHECK_THROWS_AS(log(z[0] - 1.0), SingularError);
}

TEST_CASE("fd_oracle basics") {
  const std::vector<double> p{1.0, 2.0};
  const auto fd = fd_oracle([](std::span<const double> x) { return x[0] * x[1]; }, p, 1e-4);
  CHECK(std::abs(fd.grad[0] - 2.0) < 1e-7);
  CHECK(std::abs(fd.grad[1] - 1.0) < 1e-7);
  const auto c = fd_oracle([](std::span<const double>) { return 5.0; }, p, 1e-4);
  for (double v : c.grad) CHECK(v == 0.0);
  for (double v : c.hess) CHECK(v == 0.0);
  const std::vector<double> lo{0.0, 0.0};
  const std::vector<double> hi{1.00005, 3.0};
  CHECK_THROWS_AS(fd_oracle([](std::span<const double> x) { return x[0]; }, p, 1e-4, lo, hi), DomainError);
  CHECK_THROWS_AS(fd_oracle([](std::span<const double> x) { return x[0]; }, p, 0.0), PreconditionFailed);
}

TEST_CASE("Hopf momentum coefficient: AD matches finite differences") {
  const auto b = make_scenario("hopf-s3");
  const Patch& patch = b.patches[0];
  const KFormField rho = momentum_component(patch.cotangent, patch.action, 0);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const BasePoint bp = b.sample_base(rng);
    if (bp.patch != 0) continue;
    const std::vector<double> c{rng.normal(), rng.normal(), rng.normal()};
    const auto x = patch.cotangent.point(bp.q, c);
    const auto f = [&rho](std::span<const Jet2> y) { return rho.coefficients(y)[0]; };
    CHECK(ad_vs_fd(f, x) < 1e-6);
  }
}

TEST_CASE("null_space examples") {
  CHECK(null_space(DenseMatrix::identity(2)).dim() == 0);
  CHECK(null_space(DenseMatrix(2, 2)).dim() == 2);
  const auto ns = null_space(DenseMatrix::from_rows({{1, 2}, {2, 4}}));
  REQUIRE(ns.dim() == 1);
  const auto& v = ns.vectors()[0];
  CHECK(std::abs(v[0] * -1.0 - v[1] * 2.0) < 1e-12);
  CHECK(std::abs(norm2(v) - 1.0) < 1e-12);
}

TEST_CASE("null_space and rank properties on random matrices") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = 1 + static_cast<int>(rng.uniform() * 6);
    const int cols = 1 + static_cast<int>(rng.uniform() * 8);
    const int r = 1 + static_cast<int>(rng.uniform() * std::min(rows, cols));
    // Product of random rows x r and r x cols factors has rank r.
    DenseMatrix a(rows, r);
    DenseMatrix b(r, cols);
    for (int i = 0; i < rows; ++i) {
      for (int k = 0; k < r; ++k) a(i, k) = rng.normal();
    }
    for (int i = 0; i < r; ++i) {
      for (int k = 0; k < cols; ++k) b(i, k) = rng.normal();
    }
    const DenseMatrix m = a * b;
    const auto ns = null_space(m);
    CHECK(ns.dim() + rank(m) == cols);
    CHECK(rank(m) == r);
    for (const auto& v : ns.vectors()) CHECK(max_abs(m * std::span<const double>(v)) < 10 * kPivotTolerance * m.max_abs());
  }
}

TEST_CASE("solve_linear") {
  const std::vector<double> b{3, 4};
  const auto x = solve_linear(DenseMatrix::identity(2), b);
  CHECK(x[0] == 3.0);
  CHECK(x[1] == 4.0);
  const std::vector<double> b2{2, 5};
  const auto y = solve_linear(DenseMatrix::from_rows({{2, 0}, {0, 5}}), b2);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix a = DenseMatrix::identity(6);
    std::vector<double> rhs(6);
    for (int i = 0; i < 6; ++i) {
      rhs[static_cast<std::size_t>(i)] = rng.normal();
      for (int k = 0; k < 6; ++k) a(i, k) += 0.3 * rng.normal();
    }
    const auto sol = solve_linear(a, rhs);
    const auto ax = a * std::span<const double>(sol);
    double err = 0.0;
    for (int i = 0; i < 6; ++i) err += std::pow(ax[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)], 2);
    CHECK(std::sqrt(err) / norm2(rhs) < 1e-10);
  }

  try {
    const std::vector<double> rhs{1, 1};
    solve_linear(DenseMatrix::from_rows({{1, 2}, {2, 4}}), rhs);
    FAIL("singular system solved");
  } catch (const SingularError& e) {
    CHECK(e.residual().has_value());
  }
}

TEST_CASE("principal angles") {
  const SubspaceBasis e1(2, {{1, 0}});
  const SubspaceBasis e2(2, {{0, 1}});
  CHECK(principal_angle_distance(e1, e1) < 1e-15);
  CHECK(principal_angle_distance(e1, e2) == doctest::Approx(std::numbers::pi / 2));
  const double eps = 1e-3;
  const SubspaceBasis tilted(2, {{1, eps}});
  const double angle = principal_angle_distance(e1, tilted);
  CHECK(std::abs(angle - std::atan(eps)) < 0.1 * eps);
  const SubspaceBasis plane(3, {{1, 0, 0}, {0, 1, 0}});
  CHECK_THROWS_AS(principal_angle_distance(plane, SubspaceBasis(2, {{1, 0}})), DimensionMismatch);
}

TEST_CASE("dependent vectors are rejected as a basis") {
  CHECK_THROWS_AS(SubspaceBasis(2, {{1, 2}, {2, 4}}), PreconditionFailed);
}

TEST_CASE("non-finite matrix entries are rejected") {
  CHECK_THROWS_AS(DenseMatrix(1, 1, {std::nan("")}), NonFiniteValue);
}
