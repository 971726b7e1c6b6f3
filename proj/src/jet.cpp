#include "lcsr/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcsr/errors.hpp"

namespace lcsr {

namespace {

void check_dim(int dim) {
  if (dim < 0 || dim > kMaxDim) {
    throw DimensionMismatch("jet dimension " + std::to_string(dim) + " outside [0, " +
                            std::to_string(kMaxDim) + "]");
  }
}

}  // namespace

Jet2 Jet2::constant(int dim, double value) {
  check_dim(dim);
  Jet2 j;
  j.dim_ = dim;
  j.value_ = value;
  j.require_finite();
  return j;
}

Jet2 Jet2::variable(int dim, int index, double value) {
  Jet2 j = constant(dim, value);
  if (index < 0 || index >= dim) {
    throw DimensionMismatch("variable index " + std::to_string(index) + " outside dimension " +
                            std::to_string(dim));
  }
  j.grad_[static_cast<std::size_t>(index)] = 1.0;
  return j;
}

double Jet2::grad(int i) const {
  if (order_ < 1) throw OrderExhausted("jet gradient requested at order 0");
  if (i < 0 || i >= dim_) throw DimensionMismatch("gradient index out of range");
  return grad_[static_cast<std::size_t>(i)];
}

double Jet2::hess(int i, int j) const {
  if (order_ < 2) throw OrderExhausted("jet Hessian requested below order 2");
  if (i < 0 || i >= dim_ || j < 0 || j >= dim_) throw DimensionMismatch("Hessian index out of range");
  return h(i, j);
}

std::vector<double> Jet2::gradient() const {
  if (order_ < 1) throw OrderExhausted("jet gradient requested at order 0");
  return {grad_.begin(), grad_.begin() + dim_};
}

Jet2 Jet2::partial(int i) const {
  if (order_ < 1) throw OrderExhausted("partial derivative of an order-0 jet");
  if (i < 0 || i >= dim_) throw DimensionMismatch("partial index out of range");
  Jet2 r;
  r.dim_ = dim_;
  r.order_ = order_ - 1;
  r.value_ = grad_[static_cast<std::size_t>(i)];
  if (r.order_ >= 1) {
    for (int j = 0; j < dim_; ++j) r.grad_[static_cast<std::size_t>(j)] = h(i, j);
  }
  return r;
}

Jet2 Jet2::truncated(int order) const {
  Jet2 r = *this;
  r.drop_to(std::max(order, 0));
  return r;
}

Jet2 Jet2::embedded(int new_dim, std::span<const int> index_map) const {
  check_dim(new_dim);
  if (static_cast<int>(index_map.size()) != dim_) {
    throw DimensionMismatch("embedding map size does not match jet dimension");
  }
  Jet2 r;
  r.dim_ = new_dim;
  r.order_ = order_;
  r.value_ = value_;
  for (int a = 0; a < dim_; ++a) {
    const int ia = index_map[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= new_dim) throw DimensionMismatch("embedding index out of range");
    r.grad_[static_cast<std::size_t>(ia)] = grad_[static_cast<std::size_t>(a)];
    for (int b = 0; b < dim_; ++b) {
      r.h(ia, index_map[static_cast<std::size_t>(b)]) = h(a, b);
    }
  }
  return r;
}

void Jet2::require_same_dim(const Jet2& o) const {
  if (dim_ != o.dim_) {
    throw DimensionMismatch("jets of dimension " + std::to_string(dim_) + " and " +
                            std::to_string(o.dim_) + " mixed");
  }
}

void Jet2::require_finite() const {
  bool ok = std::isfinite(value_);
  for (int i = 0; ok && i < dim_; ++i) ok = std::isfinite(grad_[static_cast<std::size_t>(i)]);
  for (int i = 0; ok && i < dim_; ++i) {
    for (int j = 0; ok && j < dim_; ++j) ok = std::isfinite(h(i, j));
  }
  if (!ok) throw NonFiniteValue("non-finite jet produced");
}

Jet2& Jet2::operator+=(const Jet2& o) {
  require_same_dim(o);
  value_ += o.value_;
  for (int i = 0; i < dim_; ++i) grad_[static_cast<std::size_t>(i)] += o.grad_[static_cast<std::size_t>(i)];
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) h(i, j) += o.h(i, j);
  }
  drop_to(o.order_);
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  require_same_dim(o);
  value_ -= o.value_;
  for (int i = 0; i < dim_; ++i) grad_[static_cast<std::size_t>(i)] -= o.grad_[static_cast<std::size_t>(i)];
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) h(i, j) -= o.h(i, j);
  }
  drop_to(o.order_);
  return *this;
}

void Jet2::drop_to(int order) {
  order_ = std::min(order_, order);
  if (order_ < 2) hess_.fill(0.0);
  if (order_ < 1) grad_.fill(0.0);
}

Jet2& Jet2::operator*=(const Jet2& o) {
  require_same_dim(o);
  const int order = std::min(order_, o.order_);
  // Upper triangle first, then mirror: keeps the Hessian bitwise symmetric.
  for (int i = 0; i < dim_; ++i) {
    const double fi = grad_[static_cast<std::size_t>(i)];
    const double gi = o.grad_[static_cast<std::size_t>(i)];
    for (int j = i; j < dim_; ++j) {
      const double fj = grad_[static_cast<std::size_t>(j)];
      const double gj = o.grad_[static_cast<std::size_t>(j)];
      const double v = h(i, j) * o.value_ + value_ * o.h(i, j) + fi * gj + fj * gi;
      h(i, j) = v;
    }
  }
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < i; ++j) h(i, j) = h(j, i);
  }
  for (int i = 0; i < dim_; ++i) {
    auto& g = grad_[static_cast<std::size_t>(i)];
    g = g * o.value_ + value_ * o.grad_[static_cast<std::size_t>(i)];
  }
  value_ *= o.value_;
  drop_to(order);
  return *this;
}

Jet2& Jet2::operator/=(const Jet2& o) { return *this *= inv(o); }

Jet2& Jet2::operator+=(double c) {
  value_ += c;
  require_finite();
  return *this;
}

Jet2& Jet2::operator-=(double c) {
  value_ -= c;
  require_finite();
  return *this;
}

Jet2& Jet2::operator*=(double c) {
  value_ *= c;
  for (int i = 0; i < dim_; ++i) grad_[static_cast<std::size_t>(i)] *= c;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) h(i, j) *= c;
  }
  require_finite();
  return *this;
}

Jet2& Jet2::operator/=(double c) {
  if (c == 0.0) throw SingularError("jet divided by zero scalar");
  return *this *= (1.0 / c);
}

Jet2 operator-(Jet2 a) {
  a.value_ = -a.value_;
  for (int i = 0; i < a.dim_; ++i) a.grad_[static_cast<std::size_t>(i)] = -a.grad_[static_cast<std::size_t>(i)];
  for (int i = 0; i < a.dim_; ++i) {
    for (int j = 0; j < a.dim_; ++j) a.h(i, j) = -a.h(i, j);
  }
  return a;
}

Jet2 operator/(double c, const Jet2& a) { return inv(a) * c; }

Jet2 Jet2::chain(double f0, double f1, double f2) const {
  Jet2 r;
  r.dim_ = dim_;
  r.order_ = order_;
  r.value_ = f0;
  if (order_ >= 1) {
    for (int i = 0; i < dim_; ++i) r.grad_[static_cast<std::size_t>(i)] = f1 * grad_[static_cast<std::size_t>(i)];
  }
  if (order_ >= 2) {
    for (int i = 0; i < dim_; ++i) {
      for (int j = i; j < dim_; ++j) {
        r.h(i, j) = f2 * grad_[static_cast<std::size_t>(i)] * grad_[static_cast<std::size_t>(j)] + f1 * h(i, j);
        r.h(j, i) = r.h(i, j);
      }
    }
  }
  r.require_finite();
  return r;
}

Jet2 inv(const Jet2& a) {
  const double v = a.value();
  if (v == 0.0) throw SingularError("inverse of a jet with zero value", 0.0);
  return a.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.chain(s, c, -s);
}

Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.chain(c, -s, -c);
}

Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value());
  return a.chain(e, e, e);
}

Jet2 log(const Jet2& a) {
  const double v = a.value();
  if (v <= 0.0) throw SingularError("log of a non-positive jet value", v);
  return a.chain(std::log(v), 1.0 / v, -1.0 / (v * v));
}

Jet2 sqrt(const Jet2& a) {
  const double v = a.value();
  if (v <= 0.0) throw SingularError("sqrt of a non-positive jet value", v);
  const double s = std::sqrt(v);
  return a.chain(s, 0.5 / s, -0.25 / (s * v));
}

Jet2 pow(const Jet2& a, double p) {
  const double v = a.value();
  if (v == 0.0 && p < 2.0) throw SingularError("pow of a zero jet value with exponent < 2", v);
  if (v < 0.0 && p != std::floor(p)) throw SingularError("non-integer pow of a negative jet value", v);
  return a.chain(std::pow(v, p), p * std::pow(v, p - 1.0), p * (p - 1.0) * std::pow(v, p - 2.0));
}

Jet2 square(const Jet2& a) { return a * a; }

Jet2 compose(const Jet2& outer, std::span<const Jet2> inner) {
  if (static_cast<int>(inner.size()) != outer.dim()) {
    throw DimensionMismatch("composition: outer jet dimension " + std::to_string(outer.dim()) +
                            " vs " + std::to_string(inner.size()) + " inner jets");
  }
  if (inner.empty()) return outer;
  const int n = inner.front().dim();
  int order = outer.order();
  for (const auto& y : inner) {
    if (y.dim() != n) throw DimensionMismatch("composition: inner jets of mixed dimension");
    order = std::min(order, y.order());
  }
  Jet2 r;
  r.dim_ = n;
  r.order_ = order;
  r.value_ = outer.value_;
  const int m = outer.dim();
  if (order >= 1) {
    for (int a = 0; a < m; ++a) {
      const double ga = outer.grad_[static_cast<std::size_t>(a)];
      for (int i = 0; i < n; ++i) {
        r.grad_[static_cast<std::size_t>(i)] += ga * inner[static_cast<std::size_t>(a)].grad_[static_cast<std::size_t>(i)];
      }
    }
  }
  if (order >= 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int a = 0; a < m; ++a) {
          const auto& ya = inner[static_cast<std::size_t>(a)];
          acc += outer.grad_[static_cast<std::size_t>(a)] * ya.h(i, j);
          for (int b = 0; b < m; ++b) {
            acc += outer.h(a, b) * ya.grad_[static_cast<std::size_t>(i)] *
                   inner[static_cast<std::size_t>(b)].grad_[static_cast<std::size_t>(j)];
          }
        }
        r.h(i, j) = acc;
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) r.h(i, j) = r.h(j, i);
    }
  }
  r.require_finite();
  return r;
}

std::vector<Jet2> seed(std::span<const double> point) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet2> x;
  x.reserve(point.size());
  for (int i = 0; i < n; ++i) x.push_back(Jet2::variable(n, i, point[static_cast<std::size_t>(i)]));
  return x;
}

FiniteDifferenceDerivatives fd_oracle(const ScalarFunction& f, std::span<const double> p, double h,
                                      std::span<const double> lower, std::span<const double> upper) {
  if (!(h > 0.0)) throw PreconditionFailed("finite-difference step must be positive", h);
  const std::size_t n = p.size();
  const bool boxed = !lower.empty() || !upper.empty();
  if (boxed && (lower.size() != n || upper.size() != n)) {
    throw DimensionMismatch("finite-difference box does not match point dimension");
  }
  std::vector<double> x(p.begin(), p.end());
  auto eval = [&](std::size_t i, double di, std::size_t j, double dj) {
    x[i] += di;
    x[j] += dj;
    if (boxed) {
      for (std::size_t k = 0; k < n; ++k) {
        if (x[k] < lower[k] || x[k] > upper[k]) {
          throw DomainError("finite-difference stencil leaves the chart domain at coordinate " +
                            std::to_string(k));
        }
      }
    }
    const double v = f(x);
    x[i] -= di;
    x[j] -= dj;
    if (!std::isfinite(v)) throw NonFiniteValue("non-finite function value on stencil");
    return v;
  };

  FiniteDifferenceDerivatives out;
  out.grad.assign(n, 0.0);
  out.hess.assign(n * n, 0.0);
  const double f0 = n > 0 ? eval(0, 0.0, 0, 0.0) : f(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double fp = eval(i, h, i, 0.0);
    const double fm = eval(i, -h, i, 0.0);
    out.grad[i] = (fp - fm) / (2.0 * h);
    out.hess[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (eval(i, h, j, h) - eval(i, h, j, -h) - eval(i, -h, j, h) + eval(i, -h, j, -h)) /
                       (4.0 * h * h);
      out.hess[i * n + j] = v;
      out.hess[j * n + i] = v;
    }
  }
  return out;
}

}  // namespace lcsr
