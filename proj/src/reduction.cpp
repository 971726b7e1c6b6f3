#include "lcsr/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lcsr/errors.hpp"

namespace lcsr {

namespace {

std::vector<Jet2> head(std::span<const Jet2> x, int n) { return {x.begin(), x.begin() + n}; }
std::vector<Jet2> tail(std::span<const Jet2> x, int n) { return {x.begin() + n, x.begin() + 2 * n}; }

void require_action_on(const CotangentChart& c, const ActionSpec& action) {
  if (!action.base.same_as(c.base())) throw DimensionMismatch("action lives on another base chart");
  if (static_cast<int>(action.fields.size()) != action.algebra.dim) {
    throw DimensionMismatch("action needs one fundamental field per algebra basis element");
  }
}

DenseMatrix field_matrix(const ActionSpec& action, std::span<const double> q) {
  DenseMatrix m(action.algebra.dim, action.base.dim);
  for (int k = 0; k < action.algebra.dim; ++k) {
    const auto xk = action.fields[static_cast<std::size_t>(k)].at(q);
    for (int i = 0; i < action.base.dim; ++i) m(k, i) = xk[static_cast<std::size_t>(i)];
  }
  return m;
}

}  // namespace

std::vector<std::vector<double>> LieAlgebraSpec::stabilizer_basis(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != dim) throw DimensionMismatch("ξ has the wrong number of components");
  if (stabilizer) return stabilizer(xi);
  std::vector<std::vector<double>> e;
  for (int k = 0; k < dim; ++k) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(k)] = 1.0;
    e.push_back(std::move(v));
  }
  return e;
}

VectorField ActionSpec::field(std::span<const double> a) const {
  if (static_cast<int>(a.size()) != algebra.dim) throw DimensionMismatch("algebra vector length");
  VectorField out = VectorField::zero(base);
  for (int k = 0; k < algebra.dim; ++k) {
    const double ak = a[static_cast<std::size_t>(k)];
    if (ak != 0.0) out = out + ak * fields[static_cast<std::size_t>(k)];
  }
  return out;
}

MomentumValue momentum_map(const CotangentChart& c, const ActionSpec& action, std::span<const double> x) {
  require_action_on(c, action);
  c.chart().require_contains(x, "momentum map");
  const auto q = CotangentChart::base_part(x);
  const auto cv = CotangentChart::fiber_part(x);
  MomentumValue mu(static_cast<std::size_t>(action.algebra.dim), 0.0);
  for (int k = 0; k < action.algebra.dim; ++k) {
    const auto xk = action.fields[static_cast<std::size_t>(k)].at(q);
    mu[static_cast<std::size_t>(k)] = -dot(cv, xk);
  }
  return mu;
}

KFormField momentum_component(const CotangentChart& c, const ActionSpec& action, int k) {
  require_action_on(c, action);
  if (k < 0 || k >= action.algebra.dim) throw DimensionMismatch("momentum component index");
  const VectorField xk = action.fields[static_cast<std::size_t>(k)];
  const int n = c.n();
  return KFormField::function(c.chart(), [xk, n](std::span<const Jet2> z) {
    const auto q = head(z, n);
    const auto cc = tail(z, n);
    const auto v = xk.components(std::span<const Jet2>(q));
    Jet2 acc = Jet2::constant(z.front().dim(), 0.0);
    for (int i = 0; i < n; ++i) acc -= cc[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    return acc;
  });
}

DenseMatrix momentum_jacobian(const CotangentChart& c, const ActionSpec& action, std::span<const double> x) {
  require_action_on(c, action);
  DenseMatrix j(action.algebra.dim, 2 * c.n());
  for (int k = 0; k < action.algebra.dim; ++k) {
    const auto g = momentum_component(c, action, k).coefficients(x).front().gradient();
    for (int i = 0; i < 2 * c.n(); ++i) j(k, i) = g[static_cast<std::size_t>(i)];
  }
  return j;
}

RankReport regularity_check(const CotangentChart& c, const ActionSpec& action, std::span<const double> x) {
  const auto e = row_reduce(momentum_jacobian(c, action, x));
  RankReport r;
  r.rank = static_cast<int>(e.pivot_cols.size());
  r.expected = action.algebra.dim;
  r.smallest_pivot = e.smallest_pivot;
  return r;
}

std::vector<double> level_set_point(const CotangentChart& c, const ActionSpec& action, std::span<const double> xi,
                                    std::span<const double> q, std::span<const double> seed) {
  require_action_on(c, action);
  const int d = action.algebra.dim;
  const int n = c.n();
  if (static_cast<int>(xi.size()) != d) throw DimensionMismatch("ξ has the wrong number of components");
  if (static_cast<int>(seed.size()) != n) throw DimensionMismatch("seed covector length");
  const DenseMatrix m = field_matrix(action, q);
  const DenseMatrix mmt = m * m.transpose();
  std::vector<double> rhs = m * seed;
  for (int k = 0; k < d; ++k) rhs[static_cast<std::size_t>(k)] += xi[static_cast<std::size_t>(k)];
  std::vector<double> y;
  try {
    y = solve_linear(mmt, rhs);
  } catch (const SingularError& e) {
    throw PreconditionFailed("fundamental fields are dependent at the base point", e.residual());
  }
  std::vector<double> cv(seed.begin(), seed.end());
  const auto corr = m.transpose() * std::span<const double>(y);
  for (int i = 0; i < n; ++i) cv[static_cast<std::size_t>(i)] -= corr[static_cast<std::size_t>(i)];
  return c.point(q, cv);
}

double level_set_defect(const CotangentChart& c, const ActionSpec& action, std::span<const double> xi,
                        std::span<const double> x) {
  const auto mu = momentum_map(c, action, x);
  double worst = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) worst = std::max(worst, std::abs(mu[k] - xi[k]));
  return worst;
}

SubspaceBasis level_set_tangent(const CotangentChart& c, const ActionSpec& action, std::span<const double> x) {
  return null_space(momentum_jacobian(c, action, x));
}

std::vector<std::vector<double>> shifted_orbit_vectors(const CotangentChart& c, const ActionSpec& action,
                                                       const ClosedOneForm& theta, std::span<const double> xi,
                                                       const std::vector<std::vector<double>>& algebra_vectors,
                                                       std::span<const double> x) {
  require_action_on(c, action);
  const auto dual = theta_omega_dual(c, theta).at(x);
  std::vector<std::vector<double>> out;
  for (const auto& a : algebra_vectors) {
    const auto lifted = lift_fundamental_field(c, action.field(a)).lifted.at(x);
    const double xa = dot(xi, a);
    std::vector<double> v(lifted.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = lifted[i] + xa * dual[i];
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<double>> foliation_frame(const CotangentChart& c, const ActionSpec& action,
                                                 const ClosedOneForm& theta, std::span<const double> xi,
                                                 std::span<const double> x) {
  const auto r = regularity_check(c, action, x);
  if (!r.regular()) throw PreconditionFailed("momentum map not regular at the point", r.smallest_pivot);
  return shifted_orbit_vectors(c, action, theta, xi, action.algebra.stabilizer_basis(xi), x);
}

SubspaceBasis foliation_brute_force(const CotangentChart& c, const ActionSpec& action, const LCSStructure& lcs,
                                    std::span<const double> x) {
  const DenseMatrix dmu = momentum_jacobian(c, action, x);
  const SubspaceBasis t = null_space(dmu);
  const DenseMatrix om = lcs.omega().at(x).as_matrix();
  const DenseMatrix bto = t.as_columns().transpose() * om;
  const int cols = 2 * c.n();
  DenseMatrix stacked(dmu.rows() + bto.rows(), cols);
  for (int r = 0; r < dmu.rows(); ++r) {
    for (int k = 0; k < cols; ++k) stacked(r, k) = dmu(r, k);
  }
  for (int r = 0; r < bto.rows(); ++r) {
    for (int k = 0; k < cols; ++k) stacked(dmu.rows() + r, k) = bto(r, k);
  }
  return null_space(stacked);
}

AnnihilatorComparison omega_annihilator_of_level_set(const CotangentChart& c, const ActionSpec& action,
                                                     const ClosedOneForm& theta, const LCSStructure& lcs,
                                                     std::span<const double> xi,
                                                     std::span<const double> x) {
  std::vector<std::vector<double>> basis;
  for (int k = 0; k < action.algebra.dim; ++k) {
    std::vector<double> e(static_cast<std::size_t>(action.algebra.dim), 0.0);
    e[static_cast<std::size_t>(k)] = 1.0;
    basis.push_back(std::move(e));
  }
  AnnihilatorComparison out;
  out.closed_form = SubspaceBasis(2 * c.n(), shifted_orbit_vectors(c, action, theta, xi, basis, x));
  out.numerical = omega_dual_subspace(lcs.omega().at(x), level_set_tangent(c, action, x));
  // Mismatched dimensions are reported as the largest possible angle.
  out.angle = out.closed_form.dim() == out.numerical.dim()
                  ? principal_angle_distance(out.closed_form, out.numerical)
                  : std::numbers::pi / 2.0;
  return out;
}

SmoothMap shift_map(const CotangentChart& c, const KFormField& alpha) {
  if (!alpha.chart().same_as(c.base()) || alpha.degree() != 1) {
    throw DimensionMismatch("shift needs a 1-form on the base chart");
  }
  const int n = c.n();
  auto make = [alpha, n](double sign) {
    return JetMap([alpha, n, sign](std::span<const Jet2> x) {
      const auto q = head(x, n);
      const auto a = alpha.coefficients(std::span<const Jet2>(q));
      std::vector<Jet2> out(x.begin(), x.end());
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(n + i)] += sign * a[static_cast<std::size_t>(i)];
      return out;
    });
  };
  return SmoothMap(c.chart(), c.chart(), make(-1.0), make(1.0));
}

AlphaResiduals alpha_xi_residuals(const KFormField& alpha, const ActionSpec& action, const ClosedOneForm& theta,
                                  std::span<const double> xi, std::span<const double> q) {
  AlphaResiduals r;
  const auto av = alpha.at(q);
  const auto th = theta.form().at(q);
  for (const auto& a : action.algebra.stabilizer_basis(xi)) {
    const VectorField x = action.field(a);
    const double xa = dot(xi, a);
    const auto xv = x.at(q);
    r.membership = std::max(r.membership, std::abs(dot(av.coeffs(), xv) + xa));
    r.lie = std::max(r.lie, residual(lie_derivative(x, alpha).at(q), xa * th));
  }
  return r;
}

KFormField beta_xi_descend(const KFormField& alpha, const ClosedOneForm& theta, const QuotientData& quotient) {
  return pullback(quotient.section, twisted_derivative(theta, alpha));
}

std::vector<double> phi_zero(const CotangentChart& c, const ActionSpec& action, const QuotientData& quotient,
                             std::span<const double> x, double tol) {
  const auto mu = momentum_map(c, action, x);
  const double defect = max_abs(mu);
  if (defect > tol) throw PreconditionFailed("φ₀ is only defined on the zero level set", defect);
  const auto q = CotangentChart::base_part(x);
  const auto cv = CotangentChart::fiber_part(x);
  const DenseMatrix dp = quotient.projection.jacobian(q);
  try {
    return solve_linear(dp * dp.transpose(), dp * std::span<const double>(cv));
  } catch (const SingularError& e) {
    throw PreconditionFailed("quotient projection is not a submersion at the point", e.residual());
  }
}

std::vector<double> phi_zero_second_lift(const CotangentChart& c, const ActionSpec& action,
                                         const QuotientData& quotient, std::span<const double> x,
                                         std::span<const double> a, double tol) {
  auto gamma = phi_zero(c, action, quotient, x, tol);
  const auto q = CotangentChart::base_part(x);
  const auto cv = CotangentChart::fiber_part(x);
  const double shift = dot(cv, action.field(a).at(q));
  for (double& g : gamma) g += shift;
  return gamma;
}

SmoothMap zero_level_quotient_map(const CotangentChart& c, const CotangentChart& quotient_cotangent,
                                  const QuotientData& quotient) {
  if (!quotient_cotangent.base().same_as(quotient.chart)) {
    throw DimensionMismatch("quotient cotangent chart over another base");
  }
  const int n = c.n();
  const int m = quotient.chart.dim;
  const SmoothMap p = quotient.projection;
  return SmoothMap(c.chart(), quotient_cotangent.chart(), [p, n, m](std::span<const Jet2> x) {
    const auto q = head(x, n);
    const auto cv = tail(x, n);
    std::vector<Jet2> out = p.apply(std::span<const Jet2>(q));
    const auto qs = reseed(q);
    const auto ps = p.apply(std::span<const Jet2>(qs));
    std::vector<Jet2> dps;
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < n; ++k) dps.push_back(ps[static_cast<std::size_t>(r)].partial(k));
    }
    const auto dp = compose_all(dps, q);
    const Jet2 zero = Jet2::constant(x.front().dim(), 0.0);
    std::vector<Jet2> mm(static_cast<std::size_t>(m * m), zero);
    std::vector<Jet2> rhs(static_cast<std::size_t>(m), zero);
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < m; ++s) {
        for (int k = 0; k < n; ++k) {
          mm[static_cast<std::size_t>(r * m + s)] +=
              dp[static_cast<std::size_t>(r * n + k)] * dp[static_cast<std::size_t>(s * n + k)];
        }
      }
      for (int k = 0; k < n; ++k) rhs[static_cast<std::size_t>(r)] += dp[static_cast<std::size_t>(r * n + k)] * cv[static_cast<std::size_t>(k)];
    }
    const auto gamma = jet_solve(mm, rhs, m, 1);
    out.insert(out.end(), gamma.begin(), gamma.end());
    return out;
  });
}

}  // namespace lcsr
