#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcsr/cotangent.hpp"

namespace lcsr {

struct LieAlgebraSpec {
  int dim = 1;
  std::vector<std::string> labels;
  /// Basis of 𝔤_ξ in algebra coordinates. Unset means 𝔤_ξ = 𝔤 (abelian).
  std::function<std::vector<std::vector<double>>(std::span<const double>)> stabilizer;

  std::vector<std::vector<double>> stabilizer_basis(std::span<const double> xi) const;
};

/// A Lie algebra action on a base chart through its fundamental fields.
struct ActionSpec {
  LieAlgebraSpec algebra;
  Chart base;
  std::vector<VectorField> fields;  // X_{e_k}, one per algebra basis element
  /// Group element exp(a) as a diffeomorphism of the base chart (optional).
  std::function<SmoothMap(std::span<const double>)> group_element;

  VectorField field(std::span<const double> a) const;
};

using MomentumValue = std::vector<double>;

/// μ(q, c)(e_k) = −Σ_i c_i X_k^i(q).
MomentumValue momentum_map(const CotangentChart& c, const ActionSpec& action, std::span<const double> x);
/// ρ_k = −η(X̃_k) as a 0-form on the cotangent chart.
KFormField momentum_component(const CotangentChart& c, const ActionSpec& action, int k);
/// d x 2n Jacobian of μ.
DenseMatrix momentum_jacobian(const CotangentChart& c, const ActionSpec& action, std::span<const double> x);

struct RankReport {
  int rank = 0;
  int expected = 0;
  double smallest_pivot = 0.0;
  bool regular() const noexcept { return rank == expected; }
};
RankReport regularity_check(const CotangentChart& c, const ActionSpec& action, std::span<const double> x);

/// Covector at q with μ = ξ, the minimal-norm correction of `seed`.
std::vector<double> level_set_point(const CotangentChart& c, const ActionSpec& action, std::span<const double> xi,
                                    std::span<const double> q, std::span<const double> seed);
/// max_k |μ_k(x) − ξ_k|.
double level_set_defect(const CotangentChart& c, const ActionSpec& action, std::span<const double> xi,
                        std::span<const double> x);
/// T_x μ^{-1}(ξ) = ker dμ.
SubspaceBasis level_set_tangent(const CotangentChart& c, const ActionSpec& action, std::span<const double> x);

/// {X̃_a + ξ(a) θ̃^ω} for a in `algebra_vectors` at x.
std::vector<std::vector<double>> shifted_orbit_vectors(const CotangentChart& c, const ActionSpec& action,
                                                       const ClosedOneForm& theta, std::span<const double> xi,
                                                       const std::vector<std::vector<double>>& algebra_vectors,
                                                       std::span<const double> x);
/// Frame over 𝔤_ξ; requires regularity at x.
std::vector<std::vector<double>> foliation_frame(const CotangentChart& c, const ActionSpec& action,
                                                 const ClosedOneForm& theta, std::span<const double> xi,
                                                 std::span<const double> x);
/// T ∩ T^ω computed as null_space([dμ; BᵀΩ]) with B a basis of T = ker dμ.
SubspaceBasis foliation_brute_force(const CotangentChart& c, const ActionSpec& action, const LCSStructure& lcs,
                                    std::span<const double> x);

struct AnnihilatorComparison {
  SubspaceBasis closed_form;  // {X̃_a + ξ(a)θ̃^ω : a ∈ 𝔤}
  SubspaceBasis numerical;    // omega_dual_subspace(ω, ker dμ)
  double angle = 0.0;
};
AnnihilatorComparison omega_annihilator_of_level_set(const CotangentChart& c, const ActionSpec& action,
                                                     const ClosedOneForm& theta, const LCSStructure& lcs,
                                                     std::span<const double> xi,
                                                     std::span<const double> x);

/// S̄(q, c) = (q, c − α(q)), with inverse (q, c + α(q)).
SmoothMap shift_map(const CotangentChart& c, const KFormField& alpha);

/// |α(X_a)(q) + ξ(a)| and |L_{X_a}α − ξ(a)θ| over a in 𝔤_ξ at q.
struct AlphaResiduals {
  double membership = 0.0;
  double lie = 0.0;
};
AlphaResiduals alpha_xi_residuals(const KFormField& alpha, const ActionSpec& action, const ClosedOneForm& theta,
                                  std::span<const double> xi, std::span<const double> q);

/// Explicit quotient chart Q̂ with projection p: U → Q̂, section s: Q̂ → U and
/// the descended Lee form θ̄ (θ = p*θ̄).
struct QuotientData {
  Chart chart;
  SmoothMap projection;
  SmoothMap section;
  ClosedOneForm theta_bar;
};

/// β_ξ = s*(d_θ α_ξ).
KFormField beta_xi_descend(const KFormField& alpha, const ClosedOneForm& theta, const QuotientData& quotient);

/// φ̄₀(α_q)(v̂) = α_q(v) with p_* v = v̂, through the right inverse
/// R = Dpᵀ(Dp Dpᵀ)^{-1}. Throws PreconditionFailed when |μ(α)| > tol.
std::vector<double> phi_zero(const CotangentChart& c, const ActionSpec& action, const QuotientData& quotient,
                             std::span<const double> x, double tol = 1e-9);
/// Same covector computed from the lift R e_j + X_a for algebra vector a.
std::vector<double> phi_zero_second_lift(const CotangentChart& c, const ActionSpec& action,
                                         const QuotientData& quotient, std::span<const double> x,
                                         std::span<const double> a, double tol = 1e-9);
/// (q, c) ↦ (p(q), Rᵀ(q) c) as a map of cotangent charts; equals φ̄₀ on μ^{-1}(0).
SmoothMap zero_level_quotient_map(const CotangentChart& c, const CotangentChart& quotient_cotangent,
                                  const QuotientData& quotient);

}  // namespace lcsr
