#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lcsr/chart.hpp"
#include "lcsr/jet.hpp"
#include "lcsr/linalg.hpp"

namespace lcsr {

/// |det Ω| must exceed this for a 2-form to count as nondegenerate.
inline constexpr double kNondegeneracyTolerance = 1e-8;

/// Increasing multi-indices of length k in {0..n-1}, as bitmasks, in
/// lexicographic order of the index tuples.
const std::vector<unsigned>& multi_indices(int n, int k);
int binomial(int n, int k);
/// Position of `mask` in multi_indices(n, popcount(mask)).
int multi_index_position(int n, unsigned mask);

/// A k-form at a single point: coefficients over multi_indices(dim, degree).
class FormValue {
 public:
  FormValue() = default;
  FormValue(int dim, int degree, std::vector<double> coeffs);
  static FormValue zero(int dim, int degree);
  static FormValue covector(std::span<const double> c);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double coefficient(unsigned mask) const;

  /// a(v_1, ..., v_k) = Σ_I a_I det[v_j^{i_l}].
  double evaluate(const std::vector<std::vector<double>>& vectors) const;
  /// Ω_ij = ω(e_i, e_j); 2-forms only.
  DenseMatrix as_matrix() const;
  /// Pullback by a linear map with matrix `jac` (dim x source_dim).
  FormValue pullback(const DenseMatrix& jac) const;
  /// Restriction to a subspace, expressed in the subspace basis.
  FormValue restrict_to(const SubspaceBasis& basis) const;
  FormValue interior(std::span<const double> v) const;

  FormValue& operator+=(const FormValue& o);
  FormValue& operator-=(const FormValue& o);
  FormValue& operator*=(double s);
  friend FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
  friend FormValue operator-(FormValue a, const FormValue& b) { return a -= b; }
  friend FormValue operator*(double s, FormValue a) { return a *= s; }
  friend FormValue wedge(const FormValue& a, const FormValue& b);

  double max_abs() const;

 private:
  void require_compatible(const FormValue& o) const;

  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_;
};

/// Max-abs coefficient difference; the residual norm used by every check.
double residual(const FormValue& a, const FormValue& b);

/// A degree-k differential form on a chart, given by coefficient jets.
class KFormField {
 public:
  KFormField() = default;
  KFormField(Chart chart, int degree, JetMap coefficients);

  static KFormField zero(const Chart& chart, int degree);
  /// The 0-form f.
  static KFormField function(const Chart& chart, std::function<Jet2(std::span<const Jet2>)> f);
  /// Σ_i a_i(x) dx_i.
  static KFormField one_form(const Chart& chart, JetMap a);
  /// dx_i.
  static KFormField coordinate_differential(const Chart& chart, int i);

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim; }
  int degree() const noexcept { return degree_; }

  /// Coefficient jets at coordinate jets x (in any auxiliary coordinates).
  std::vector<Jet2> coefficients(std::span<const Jet2> x) const;
  std::vector<Jet2> coefficients(std::span<const double> p) const;
  FormValue at(std::span<const double> p) const;
  /// Value of a 0-form.
  double scalar_at(std::span<const double> p) const;

  friend KFormField operator+(const KFormField& a, const KFormField& b);
  friend KFormField operator-(const KFormField& a, const KFormField& b);
  friend KFormField operator*(double s, const KFormField& a);
  /// f·a for a 0-form f.
  friend KFormField operator*(const KFormField& f, const KFormField& a);

 private:
  Chart chart_;
  int degree_ = 0;
  JetMap coefficients_;
};

class VectorField {
 public:
  VectorField() = default;
  VectorField(Chart chart, JetMap components);
  static VectorField zero(const Chart& chart);
  static VectorField coordinate(const Chart& chart, int i);

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim; }
  std::vector<Jet2> components(std::span<const Jet2> x) const;
  std::vector<double> at(std::span<const double> p) const;

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator*(double s, const VectorField& a);

 private:
  Chart chart_;
  JetMap components_;
};

/// Smooth map between charts. `affine` declares a constant Jacobian, which
/// lets pullbacks keep full derivative order.
class SmoothMap {
 public:
  SmoothMap() = default;
  SmoothMap(Chart source, Chart target, JetMap f, std::optional<JetMap> inverse = std::nullopt,
            bool affine = false);
  static SmoothMap identity(const Chart& chart);

  const Chart& source() const noexcept { return source_; }
  const Chart& target() const noexcept { return target_; }
  bool affine() const noexcept { return affine_; }
  bool has_inverse() const noexcept { return inverse_.has_value(); }

  std::vector<Jet2> apply(std::span<const Jet2> x) const;
  std::vector<double> apply(std::span<const double> p) const;
  std::vector<Jet2> apply_inverse(std::span<const Jet2> y) const;
  std::vector<double> apply_inverse(std::span<const double> p) const;
  /// target_dim x source_dim Jacobian at p.
  DenseMatrix jacobian(std::span<const double> p) const;
  /// Pushforward of a tangent vector.
  std::vector<double> push(std::span<const double> p, std::span<const double> v) const;
  /// The inverse as a map (requires a registered inverse).
  SmoothMap inverse() const;
  /// max |F(F^{-1}(y)) - y| over the given target points.
  double inverse_residual(const std::vector<std::vector<double>>& target_points) const;

 private:
  Chart source_;
  Chart target_;
  JetMap f_;
  std::optional<JetMap> inverse_;
  bool affine_ = false;
};

/// outer ∘ inner.
SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner);

KFormField wedge(const KFormField& a, const KFormField& b);
KFormField exterior_derivative(const KFormField& a);
KFormField interior_product(const VectorField& x, const KFormField& a);
KFormField pullback(const SmoothMap& f, const KFormField& a);
/// Coordinate formula (X·∂)a_I dx^I + Σ a_I d(X^{i_l}) in slot l.
KFormField lie_derivative(const VectorField& x, const KFormField& a);

/// A 1-form whose closedness has been checked (or follows by construction).
class ClosedOneForm {
 public:
  /// Samples dθ at the points; throws PreconditionFailed with the worst residual.
  static ClosedOneForm verified(const KFormField& theta, const std::vector<std::vector<double>>& samples,
                                double tol = 1e-9);
  /// Closed by construction (d of a function, constant coefficients, zero).
  static ClosedOneForm exact_by_construction(const KFormField& theta);
  static ClosedOneForm zero(const Chart& chart);

  const KFormField& form() const noexcept { return form_; }
  const Chart& chart() const noexcept { return form_.chart(); }

  friend ClosedOneForm pullback(const SmoothMap& f, const ClosedOneForm& theta);
  friend ClosedOneForm operator+(const ClosedOneForm& a, const ClosedOneForm& b);

 private:
  explicit ClosedOneForm(KFormField f) : form_(std::move(f)) {}
  KFormField form_;
};

/// max |dθ| coefficient at p.
double closedness_residual(const KFormField& theta, std::span<const double> p);

/// d_θ a = da − θ∧a.
KFormField twisted_derivative(const ClosedOneForm& theta, const KFormField& a);
/// L^θ_X a = L_X a − θ(X) a.
KFormField twisted_lie_derivative(const VectorField& x, const ClosedOneForm& theta, const KFormField& a);

/// The unique v with ω_p(v, ·) = θ_p, from Ωᵀ v = θ.
std::vector<double> omega_dual_vector(const FormValue& omega_p, const FormValue& theta_p);
/// W^ω = {v : ω(w, v) = 0 ∀ w ∈ W}.
SubspaceBasis omega_dual_subspace(const FormValue& omega_p, const SubspaceBasis& w);
double nondegeneracy(const FormValue& omega_p);

/// An LCS pair (ω, θ).
class LCSStructure {
 public:
  /// Checks dθ = 0, dω = θ∧ω and |det Ω| at every sample; throws on failure.
  static LCSStructure verified(const KFormField& omega, const ClosedOneForm& theta,
                               const std::vector<std::vector<double>>& samples, double tol = 1e-9);
  /// Structure known to be LCS by construction; invariants are still checkable.
  static LCSStructure by_construction(const KFormField& omega, const ClosedOneForm& theta);

  const KFormField& omega() const noexcept { return omega_; }
  const ClosedOneForm& theta() const noexcept { return theta_; }
  const Chart& chart() const noexcept { return omega_.chart(); }

  /// |dω − θ∧ω| at p.
  double structure_residual(std::span<const double> p) const;
  double determinant_at(std::span<const double> p) const;

 private:
  LCSStructure(KFormField omega, ClosedOneForm theta) : omega_(std::move(omega)), theta_(std::move(theta)) {}
  KFormField omega_;
  ClosedOneForm theta_;
};

/// (e^f ω, θ + df).
LCSStructure conformal_rescale(const LCSStructure& s, const KFormField& f);

}  // namespace lcsr
