#pragma once

#include <span>
#include <vector>

#include "lcsr/forms.hpp"

namespace lcsr {

/// A base chart together with its transition maps to other base charts.
struct BaseChart {
  Chart chart;
  std::vector<SmoothMap> transitions;

  /// max |T(T^{-1}(y)) − y| and |T^{-1}(T(x)) − x| over the given overlap points
  /// (points in this chart lying in the overlap with each transition target).
  double transition_residual(const std::vector<std::vector<double>>& overlap_points) const;
};

/// T*U over a base chart U, coordinates (q_1..q_n, c_1..c_n). Fiber
/// coordinates are unbounded.
class CotangentChart {
 public:
  CotangentChart() = default;
  explicit CotangentChart(Chart base);

  const Chart& base() const noexcept { return base_; }
  const Chart& chart() const noexcept { return chart_; }
  int n() const noexcept { return base_.dim; }

  /// π(q, c) = q.
  SmoothMap projection() const;
  std::vector<double> point(std::span<const double> q, std::span<const double> c) const;
  static std::vector<double> base_part(std::span<const double> x);
  static std::vector<double> fiber_part(std::span<const double> x);

 private:
  Chart base_;
  Chart chart_;
};

/// η = Σ c_i dq_i.
KFormField tautological_form(const CotangentChart& c);
/// θ̃ = π*θ.
ClosedOneForm lifted_lee_form(const CotangentChart& c, const ClosedOneForm& theta);
/// (d_{π*θ} η, π*θ), built directly from the operators.
LCSStructure lcs_form(const CotangentChart& c, const ClosedOneForm& theta);
/// Σ dc_i∧dq_i − Σ_{i<j}(θ_i c_j − θ_j c_i) dq_i∧dq_j, written out in coordinates.
KFormField lcs_form_coordinate_expansion(const CotangentChart& c, const ClosedOneForm& theta);

struct LiftedField {
  VectorField base;
  VectorField lifted;
};

/// X̃ = Σ X^i ∂/∂q_i − Σ_i (Σ_j c_j ∂X^j/∂q_i) ∂/∂c_i.
LiftedField lift_fundamental_field(const CotangentChart& c, const VectorField& x);

/// (q, c) ↦ (φ(q), (Dφ^{-1})ᵀ c); φ must carry a registered inverse.
SmoothMap cotangent_lift_map(const CotangentChart& source, const CotangentChart& target, const SmoothMap& phi);

/// θ̃^ω = Σ θ_i ∂/∂c_i.
VectorField theta_omega_dual(const CotangentChart& c, const ClosedOneForm& theta);

}  // namespace lcsr
