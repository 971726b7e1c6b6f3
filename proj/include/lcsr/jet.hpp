#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace lcsr {

/// Largest chart dimension supported by the fixed-size jet storage.
inline constexpr int kMaxDim = 8;

/// Second-order truncated Taylor datum of a scalar function at a chart point:
/// value, gradient and Hessian with respect to the chart coordinates.
///
/// A jet also records how many derivative levels are valid (`order()`):
/// seeded variables and anything built from them by arithmetic carry order 2;
/// taking a partial derivative drops one level. Binary operations keep the
/// smaller order, so a derived quantity never claims derivatives it does not
/// have. Reading a derivative beyond the valid order throws `OrderExhausted`.
class Jet2 {
 public:
  Jet2() = default;

  static Jet2 constant(int dim, double value);
  static Jet2 variable(int dim, int index, double value);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  double value() const noexcept { return value_; }
  double grad(int i) const;
  double hess(int i, int j) const;
  std::vector<double> gradient() const;

  /// d/dx_i as a jet of one lower order.
  Jet2 partial(int i) const;
  Jet2 truncated(int order) const;
  /// Re-expresses the jet in a larger coordinate system; coordinate k of this
  /// jet becomes coordinate index_map[k] of the result.
  Jet2 embedded(int new_dim, std::span<const int> index_map) const;

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(const Jet2& o);
  Jet2& operator/=(const Jet2& o);
  Jet2& operator+=(double c);
  Jet2& operator-=(double c);
  Jet2& operator*=(double c);
  Jet2& operator/=(double c);

  friend Jet2 operator-(Jet2 a);
  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
  friend Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
  friend Jet2 operator+(Jet2 a, double c) { return a += c; }
  friend Jet2 operator+(double c, Jet2 a) { return a += c; }
  friend Jet2 operator-(Jet2 a, double c) { return a -= c; }
  friend Jet2 operator-(double c, const Jet2& a) { return (-a) += c; }
  friend Jet2 operator*(Jet2 a, double c) { return a *= c; }
  friend Jet2 operator*(double c, Jet2 a) { return a *= c; }
  friend Jet2 operator/(Jet2 a, double c) { return a /= c; }
  friend Jet2 operator/(double c, const Jet2& a);

  /// Chain rule through an elementary function with derivatives f0, f1, f2 at value().
  Jet2 chain(double f0, double f1, double f2) const;

 private:
  friend Jet2 compose(const Jet2& outer, std::span<const Jet2> inner);

  void require_same_dim(const Jet2& o) const;
  void require_finite() const;
  void drop_to(int order);
  double& h(int i, int j) { return hess_[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double h(int i, int j) const { return hess_[static_cast<std::size_t>(i * kMaxDim + j)]; }

  int dim_ = 0;
  int order_ = 2;
  double value_ = 0.0;
  std::array<double, kMaxDim> grad_{};
  std::array<double, kMaxDim * kMaxDim> hess_{};
};

Jet2 inv(const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);
Jet2 exp(const Jet2& a);
Jet2 log(const Jet2& a);
Jet2 sqrt(const Jet2& a);
Jet2 pow(const Jet2& a, double p);
Jet2 square(const Jet2& a);

/// Jet of outer(inner(x)) in the coordinates x of the inner jets. `outer` is a
/// jet in as many coordinates as there are inner jets.
Jet2 compose(const Jet2& outer, std::span<const Jet2> inner);

/// Independent coordinate variables of dimension point.size().
std::vector<Jet2> seed(std::span<const double> point);

using ScalarFunction = std::function<double(std::span<const double>)>;

struct FiniteDifferenceDerivatives {
  std::vector<double> grad;
  std::vector<double> hess;  // row-major n x n
};

/// Central-difference gradient and Hessian of f at p with step h (error O(h^2)).
/// When a box is given, a stencil point outside it raises DomainError.
FiniteDifferenceDerivatives fd_oracle(const ScalarFunction& f, std::span<const double> p, double h,
                                      std::span<const double> lower = {},
                                      std::span<const double> upper = {});

}  // namespace lcsr
