#include "lcsr/forms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "lcsr/errors.hpp"

namespace lcsr {

namespace {

int below(unsigned mask, int i) { return std::popcount(mask & ((1u << i) - 1u)); }

double parity(int count) { return (count & 1) ? -1.0 : 1.0; }

// Sign of dx^I ∧ dx^J = sign · dx^{I∪J} for disjoint I, J.
double shuffle_sign(unsigned i_mask, unsigned j_mask) {
  int inversions = 0;
  for (unsigned j = j_mask; j != 0; j &= j - 1) {
    const int jj = std::countr_zero(j);
    inversions += std::popcount(i_mask >> (jj + 1));
  }
  return parity(inversions);
}

std::vector<int> indices_of(unsigned mask) {
  std::vector<int> out;
  for (unsigned m = mask; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

void build_indices(int n, int k, int start, unsigned mask, std::vector<unsigned>& out) {
  if (k == 0) {
    out.push_back(mask);
    return;
  }
  for (int i = start; i <= n - k; ++i) build_indices(n, k - 1, i + 1, mask | (1u << i), out);
}

template <class T>
T det_impl(const std::vector<T>& m, int k, const T& zero) {
  if (k == 0) return zero + 1.0;
  if (k == 1) return m[0];
  if (k == 2) return m[0] * m[3] - m[1] * m[2];
  T acc = zero;
  std::vector<T> minor(static_cast<std::size_t>((k - 1) * (k - 1)), zero);
  for (int c = 0; c < k; ++c) {
    for (int r = 1; r < k; ++r) {
      int cc = 0;
      for (int c2 = 0; c2 < k; ++c2) {
        if (c2 == c) continue;
        minor[static_cast<std::size_t>((r - 1) * (k - 1) + cc)] = m[static_cast<std::size_t>(r * k + c2)];
        ++cc;
      }
    }
    const T term = m[static_cast<std::size_t>(c)] * det_impl(minor, k - 1, zero);
    if (c % 2 == 0) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  return acc;
}

template <class T>
std::vector<T> wedge_impl(int n, int k, const std::vector<T>& a, int l, const std::vector<T>& b, const T& zero) {
  if (k + l > n) throw DimensionMismatch("wedge: degree " + std::to_string(k + l) + " exceeds dimension");
  const auto& ia = multi_indices(n, k);
  const auto& ib = multi_indices(n, l);
  std::vector<T> out(static_cast<std::size_t>(binomial(n, k + l)), zero);
  for (std::size_t x = 0; x < ia.size(); ++x) {
    for (std::size_t y = 0; y < ib.size(); ++y) {
      if (ia[x] & ib[y]) continue;
      const double s = shuffle_sign(ia[x], ib[y]);
      out[static_cast<std::size_t>(multi_index_position(n, ia[x] | ib[y]))] += s * (a[x] * b[y]);
    }
  }
  return out;
}

template <class T>
std::vector<T> interior_impl(int n, int k, const std::vector<T>& v, const std::vector<T>& a, const T& zero) {
  if (k < 1) throw DimensionMismatch("interior product of a 0-form");
  const auto& ik = multi_indices(n, k - 1);
  std::vector<T> out(ik.size(), zero);
  for (std::size_t x = 0; x < ik.size(); ++x) {
    const unsigned kmask = ik[x];
    for (int m = 0; m < n; ++m) {
      if (kmask & (1u << m)) continue;
      const double s = parity(below(kmask, m));
      out[x] += s * (v[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(multi_index_position(n, kmask | (1u << m)))]);
    }
  }
  return out;
}

// jac is n x m row-major; result over multi_indices(m, k).
template <class T>
std::vector<T> pullback_impl(int n, int m, int k, const std::vector<T>& a, const std::vector<T>& jac, const T& zero) {
  const auto& src = multi_indices(m, k);
  const auto& tgt = multi_indices(n, k);
  std::vector<T> out(src.size(), zero);
  std::vector<T> block(static_cast<std::size_t>(k * k), zero);
  for (std::size_t s = 0; s < src.size(); ++s) {
    const auto cols = indices_of(src[s]);
    for (std::size_t t = 0; t < tgt.size(); ++t) {
      const auto rows = indices_of(tgt[t]);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
          block[static_cast<std::size_t>(r * k + c)] =
              jac[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)] * m + cols[static_cast<std::size_t>(c)])];
        }
      }
      out[s] += a[t] * det_impl(block, k, zero);
    }
  }
  return out;
}

Jet2 zero_jet(std::span<const Jet2> x) { return Jet2::constant(x.empty() ? 0 : x.front().dim(), 0.0); }

void require_same_chart(const Chart& a, const Chart& b, const std::string& what) {
  if (!a.same_as(b)) throw DimensionMismatch(what + ": charts " + a.id + " and " + b.id + " differ");
}

}  // namespace

const std::vector<unsigned>& multi_indices(int n, int k) {
  if (n < 0 || n > kMaxDim || k < 0 || k > n) {
    throw DimensionMismatch("multi-index of degree " + std::to_string(k) + " in dimension " + std::to_string(n));
  }
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<unsigned>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({n, k});
  if (it == cache.end()) {
    std::vector<unsigned> out;
    build_indices(n, k, 0, 0u, out);
    it = cache.emplace(std::make_pair(n, k), std::move(out)).first;
  }
  return it->second;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int multi_index_position(int n, unsigned mask) {
  // Rank of a k-combination in lexicographic order.
  const auto idx = indices_of(mask);
  const int k = static_cast<int>(idx.size());
  int pos = 0;
  int prev = -1;
  for (int l = 0; l < k; ++l) {
    for (int j = prev + 1; j < idx[static_cast<std::size_t>(l)]; ++j) pos += binomial(n - j - 1, k - l - 1);
    prev = idx[static_cast<std::size_t>(l)];
  }
  return pos;
}

// ---------------------------------------------------------------- FormValue

FormValue::FormValue(int dim, int degree, std::vector<double> coeffs)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)) {
  if (static_cast<int>(coeffs_.size()) != binomial(dim, degree)) {
    throw DimensionMismatch("form value needs C(" + std::to_string(dim) + "," + std::to_string(degree) +
                            ") coefficients, got " + std::to_string(coeffs_.size()));
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw NonFiniteValue("non-finite form coefficient");
  }
}

FormValue FormValue::zero(int dim, int degree) {
  return FormValue(dim, degree, std::vector<double>(static_cast<std::size_t>(binomial(dim, degree)), 0.0));
}

FormValue FormValue::covector(std::span<const double> c) {
  return FormValue(static_cast<int>(c.size()), 1, std::vector<double>(c.begin(), c.end()));
}

double FormValue::coefficient(unsigned mask) const {
  if (std::popcount(mask) != degree_) throw DimensionMismatch("multi-index degree mismatch");
  return coeffs_[static_cast<std::size_t>(multi_index_position(dim_, mask))];
}

double FormValue::evaluate(const std::vector<std::vector<double>>& vectors) const {
  if (static_cast<int>(vectors.size()) != degree_) throw DimensionMismatch("form evaluated on wrong number of vectors");
  std::vector<double> jac(static_cast<std::size_t>(dim_ * degree_));
  for (int c = 0; c < degree_; ++c) {
    const auto& v = vectors[static_cast<std::size_t>(c)];
    if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch("vector length mismatch");
    for (int r = 0; r < dim_; ++r) jac[static_cast<std::size_t>(r * degree_ + c)] = v[static_cast<std::size_t>(r)];
  }
  const auto out = pullback_impl(dim_, degree_, degree_, coeffs_, jac, 0.0);
  return out.front();
}

DenseMatrix FormValue::as_matrix() const {
  if (degree_ != 2) throw DimensionMismatch("as_matrix needs a 2-form");
  DenseMatrix m(dim_, dim_);
  const auto& idx = multi_indices(dim_, 2);
  for (std::size_t x = 0; x < idx.size(); ++x) {
    const auto ij = indices_of(idx[x]);
    m(ij[0], ij[1]) = coeffs_[x];
    m(ij[1], ij[0]) = -coeffs_[x];
  }
  return m;
}

FormValue FormValue::pullback(const DenseMatrix& jac) const {
  if (jac.rows() != dim_) throw DimensionMismatch("pullback Jacobian has wrong row count");
  if (degree_ > jac.cols()) throw DimensionMismatch("pullback degree exceeds source dimension");
  std::vector<double> j(jac.data().begin(), jac.data().end());
  return FormValue(jac.cols(), degree_, pullback_impl(dim_, jac.cols(), degree_, coeffs_, j, 0.0));
}

FormValue FormValue::restrict_to(const SubspaceBasis& basis) const {
  if (basis.ambient_dim() != dim_) throw DimensionMismatch("restriction to a subspace of another space");
  if (degree_ > basis.dim()) return FormValue(basis.dim(), degree_, {});
  return pullback(basis.as_columns());
}

FormValue FormValue::interior(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch("interior product vector length");
  std::vector<double> vv(v.begin(), v.end());
  return FormValue(dim_, degree_ - 1, interior_impl(dim_, degree_, vv, coeffs_, 0.0));
}

void FormValue::require_compatible(const FormValue& o) const {
  if (dim_ != o.dim_ || degree_ != o.degree_) throw DimensionMismatch("form values of different shape combined");
}

FormValue& FormValue::operator+=(const FormValue& o) {
  require_compatible(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

FormValue& FormValue::operator-=(const FormValue& o) {
  require_compatible(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

FormValue& FormValue::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

FormValue wedge(const FormValue& a, const FormValue& b) {
  if (a.dim_ != b.dim_) throw DimensionMismatch("wedge of form values in different dimensions");
  return FormValue(a.dim_, a.degree_ + b.degree_, wedge_impl(a.dim_, a.degree_, a.coeffs_, b.degree_, b.coeffs_, 0.0));
}

double FormValue::max_abs() const { return lcsr::max_abs(coeffs_); }

double residual(const FormValue& a, const FormValue& b) { return (a - b).max_abs(); }

// --------------------------------------------------------------- KFormField

KFormField::KFormField(Chart chart, int degree, JetMap coefficients)
    : chart_(std::move(chart)), degree_(degree), coefficients_(std::move(coefficients)) {
  if (degree_ < 0 || degree_ > chart_.dim) {
    throw DimensionMismatch("form degree " + std::to_string(degree_) + " on chart of dimension " +
                            std::to_string(chart_.dim));
  }
}

KFormField KFormField::zero(const Chart& chart, int degree) {
  const int count = binomial(chart.dim, degree);
  return KFormField(chart, degree, [count](std::span<const Jet2> x) {
    return std::vector<Jet2>(static_cast<std::size_t>(count), zero_jet(x));
  });
}

KFormField KFormField::function(const Chart& chart, std::function<Jet2(std::span<const Jet2>)> f) {
  return KFormField(chart, 0, [f = std::move(f)](std::span<const Jet2> x) { return std::vector<Jet2>{f(x)}; });
}

KFormField KFormField::one_form(const Chart& chart, JetMap a) { return KFormField(chart, 1, std::move(a)); }

KFormField KFormField::coordinate_differential(const Chart& chart, int i) {
  if (i < 0 || i >= chart.dim) throw DimensionMismatch("coordinate differential index out of range");
  const int n = chart.dim;
  return one_form(chart, [i, n](std::span<const Jet2> x) {
    std::vector<Jet2> out(static_cast<std::size_t>(n), zero_jet(x));
    out[static_cast<std::size_t>(i)] += 1.0;
    return out;
  });
}

std::vector<Jet2> KFormField::coefficients(std::span<const Jet2> x) const {
  chart_.require_contains(x, "form evaluation");
  auto out = coefficients_(x);
  if (static_cast<int>(out.size()) != binomial(chart_.dim, degree_)) {
    throw DimensionMismatch("form on chart " + chart_.id + " returned " + std::to_string(out.size()) +
                            " coefficients");
  }
  const int d = x.empty() ? 0 : x.front().dim();
  for (const auto& c : out) {
    if (c.dim() != d) throw DimensionMismatch("form coefficient jets in the wrong coordinates");
  }
  return out;
}

std::vector<Jet2> KFormField::coefficients(std::span<const double> p) const {
  const auto x = seed(p);
  return coefficients(std::span<const Jet2>(x));
}

FormValue KFormField::at(std::span<const double> p) const {
  const auto c = coefficients(p);
  return FormValue(chart_.dim, degree_, values_of(c));
}

double KFormField::scalar_at(std::span<const double> p) const {
  if (degree_ != 0) throw DimensionMismatch("scalar_at needs a 0-form");
  return coefficients(p).front().value();
}

KFormField operator+(const KFormField& a, const KFormField& b) {
  require_same_chart(a.chart_, b.chart_, "form sum");
  if (a.degree_ != b.degree_) throw DimensionMismatch("sum of forms of different degree");
  return KFormField(a.chart_, a.degree_, [a, b](std::span<const Jet2> x) {
    auto ca = a.coefficients(x);
    const auto cb = b.coefficients(x);
    for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
    return ca;
  });
}

KFormField operator-(const KFormField& a, const KFormField& b) { return a + (-1.0) * b; }

KFormField operator*(double s, const KFormField& a) {
  return KFormField(a.chart_, a.degree_, [s, a](std::span<const Jet2> x) {
    auto c = a.coefficients(x);
    for (auto& j : c) j *= s;
    return c;
  });
}

KFormField operator*(const KFormField& f, const KFormField& a) {
  require_same_chart(f.chart_, a.chart_, "function times form");
  if (f.degree_ != 0) throw DimensionMismatch("left factor must be a 0-form");
  return KFormField(a.chart_, a.degree_, [f, a](std::span<const Jet2> x) {
    const Jet2 fx = f.coefficients(x).front();
    auto c = a.coefficients(x);
    for (auto& j : c) j *= fx;
    return c;
  });
}

// -------------------------------------------------------------- VectorField

VectorField::VectorField(Chart chart, JetMap components)
    : chart_(std::move(chart)), components_(std::move(components)) {}

VectorField VectorField::zero(const Chart& chart) {
  const int n = chart.dim;
  return VectorField(chart, [n](std::span<const Jet2> x) {
    return std::vector<Jet2>(static_cast<std::size_t>(n), zero_jet(x));
  });
}

VectorField VectorField::coordinate(const Chart& chart, int i) {
  if (i < 0 || i >= chart.dim) throw DimensionMismatch("coordinate field index out of range");
  const int n = chart.dim;
  return VectorField(chart, [i, n](std::span<const Jet2> x) {
    std::vector<Jet2> out(static_cast<std::size_t>(n), zero_jet(x));
    out[static_cast<std::size_t>(i)] += 1.0;
    return out;
  });
}

std::vector<Jet2> VectorField::components(std::span<const Jet2> x) const {
  chart_.require_contains(x, "vector field evaluation");
  auto out = components_(x);
  if (static_cast<int>(out.size()) != chart_.dim) throw DimensionMismatch("vector field component count");
  for (const auto& c : out) {
    if (!std::isfinite(c.value())) throw NonFiniteValue("non-finite vector field component");
  }
  return out;
}

std::vector<double> VectorField::at(std::span<const double> p) const {
  const auto x = seed(p);
  return values_of(components(std::span<const Jet2>(x)));
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(a.chart_, b.chart_, "vector field sum");
  return VectorField(a.chart_, [a, b](std::span<const Jet2> x) {
    auto ca = a.components(x);
    const auto cb = b.components(x);
    for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
    return ca;
  });
}

VectorField operator*(double s, const VectorField& a) {
  return VectorField(a.chart_, [s, a](std::span<const Jet2> x) {
    auto c = a.components(x);
    for (auto& j : c) j *= s;
    return c;
  });
}

// ---------------------------------------------------------------- SmoothMap

SmoothMap::SmoothMap(Chart source, Chart target, JetMap f, std::optional<JetMap> inverse, bool affine)
    : source_(std::move(source)), target_(std::move(target)), f_(std::move(f)), inverse_(std::move(inverse)),
      affine_(affine) {}

SmoothMap SmoothMap::identity(const Chart& chart) {
  JetMap id = [](std::span<const Jet2> x) { return std::vector<Jet2>(x.begin(), x.end()); };
  return SmoothMap(chart, chart, id, id, true);
}

std::vector<Jet2> SmoothMap::apply(std::span<const Jet2> x) const {
  source_.require_contains(x, "map " + source_.id + "->" + target_.id + " source");
  auto y = f_(x);
  if (static_cast<int>(y.size()) != target_.dim) throw DimensionMismatch("map returned wrong component count");
  target_.require_contains(std::span<const Jet2>(y), "map " + source_.id + "->" + target_.id + " image");
  return y;
}

std::vector<double> SmoothMap::apply(std::span<const double> p) const {
  const auto x = seed(p);
  return values_of(apply(std::span<const Jet2>(x)));
}

std::vector<Jet2> SmoothMap::apply_inverse(std::span<const Jet2> y) const {
  if (!inverse_) throw PreconditionFailed("map " + source_.id + "->" + target_.id + " has no registered inverse");
  target_.require_contains(y, "inverse map source");
  auto x = (*inverse_)(y);
  if (static_cast<int>(x.size()) != source_.dim) throw DimensionMismatch("inverse returned wrong component count");
  source_.require_contains(std::span<const Jet2>(x), "inverse map image");
  return x;
}

std::vector<double> SmoothMap::apply_inverse(std::span<const double> p) const {
  const auto y = seed(p);
  return values_of(apply_inverse(std::span<const Jet2>(y)));
}

DenseMatrix SmoothMap::jacobian(std::span<const double> p) const {
  const auto x = seed(p);
  const auto y = apply(std::span<const Jet2>(x));
  DenseMatrix j(target_.dim, source_.dim);
  for (int r = 0; r < target_.dim; ++r) {
    for (int c = 0; c < source_.dim; ++c) j(r, c) = y[static_cast<std::size_t>(r)].grad(c);
  }
  return j;
}

std::vector<double> SmoothMap::push(std::span<const double> p, std::span<const double> v) const {
  return jacobian(p) * v;
}

SmoothMap SmoothMap::inverse() const {
  if (!inverse_) throw PreconditionFailed("map " + source_.id + "->" + target_.id + " has no registered inverse");
  return SmoothMap(target_, source_, *inverse_, f_, affine_);
}

double SmoothMap::inverse_residual(const std::vector<std::vector<double>>& target_points) const {
  double worst = 0.0;
  for (const auto& y : target_points) {
    const auto x = apply_inverse(std::span<const double>(y));
    const auto back = apply(std::span<const double>(x));
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(back[i] - y[i]));
  }
  return worst;
}

SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  require_same_chart(inner.target(), outer.source(), "map composition");
  JetMap f = [outer, inner](std::span<const Jet2> x) {
    const auto y = inner.apply(x);
    return outer.apply(std::span<const Jet2>(y));
  };
  std::optional<JetMap> inv;
  if (outer.has_inverse() && inner.has_inverse()) {
    inv = [outer, inner](std::span<const Jet2> z) {
      const auto y = outer.apply_inverse(z);
      return inner.apply_inverse(std::span<const Jet2>(y));
    };
  }
  return SmoothMap(inner.source(), outer.target(), f, inv, outer.affine() && inner.affine());
}

// --------------------------------------------------------------- operations

KFormField wedge(const KFormField& a, const KFormField& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  const int n = a.dim();
  const int k = a.degree();
  const int l = b.degree();
  if (k + l > n) throw DimensionMismatch("wedge: degree " + std::to_string(k + l) + " exceeds dimension");
  return KFormField(a.chart(), k + l, [a, b, n, k, l](std::span<const Jet2> x) {
    return wedge_impl(n, k, a.coefficients(x), l, b.coefficients(x), zero_jet(x));
  });
}

KFormField exterior_derivative(const KFormField& a) {
  const int n = a.dim();
  const int k = a.degree();
  if (k >= n) throw DimensionMismatch("exterior derivative of a top-degree form");
  return KFormField(a.chart(), k + 1, [a, n, k](std::span<const Jet2> x) {
    const auto y = reseed(x);
    const auto c = a.coefficients(std::span<const Jet2>(y));
    const auto& idx = multi_indices(n, k + 1);
    std::vector<Jet2> out(idx.size(), Jet2::constant(n, 0.0));
    for (std::size_t s = 0; s < idx.size(); ++s) {
      for (unsigned m = idx[s]; m != 0; m &= m - 1) {
        const int i = std::countr_zero(m);
        const unsigned rest = idx[s] & ~(1u << i);
        const Jet2 term = c[static_cast<std::size_t>(multi_index_position(n, rest))].partial(i);
        out[s] += parity(below(idx[s], i)) * term;
      }
    }
    return compose_all(out, x);
  });
}

KFormField interior_product(const VectorField& x, const KFormField& a) {
  require_same_chart(x.chart(), a.chart(), "interior product");
  const int n = a.dim();
  const int k = a.degree();
  if (k < 1) throw DimensionMismatch("interior product of a 0-form");
  return KFormField(a.chart(), k - 1, [x, a, n, k](std::span<const Jet2> z) {
    return interior_impl(n, k, x.components(z), a.coefficients(z), zero_jet(z));
  });
}

KFormField pullback(const SmoothMap& f, const KFormField& a) {
  require_same_chart(f.target(), a.chart(), "pullback");
  const int n = f.target().dim;
  const int m = f.source().dim;
  const int k = a.degree();
  if (k > m) throw DimensionMismatch("pullback degree exceeds source dimension");
  return KFormField(f.source(), k, [f, a, n, m, k](std::span<const Jet2> x) {
    const auto y = reseed(x);
    const auto fy = f.apply(std::span<const Jet2>(y));
    std::vector<Jet2> jac;
    jac.reserve(static_cast<std::size_t>(n * m));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < m; ++c) {
        const Jet2& comp = fy[static_cast<std::size_t>(r)];
        jac.push_back(f.affine() ? Jet2::constant(m, comp.grad(c)) : comp.partial(c));
      }
    }
    const auto coeffs = a.coefficients(std::span<const Jet2>(fy));
    const auto out = pullback_impl(n, m, k, coeffs, jac, Jet2::constant(m, 0.0));
    return compose_all(out, x);
  });
}

KFormField lie_derivative(const VectorField& x, const KFormField& a) {
  require_same_chart(x.chart(), a.chart(), "Lie derivative");
  const int n = a.dim();
  const int k = a.degree();
  return KFormField(a.chart(), k, [x, a, n, k](std::span<const Jet2> z) {
    const auto y = reseed(z);
    const auto c = a.coefficients(std::span<const Jet2>(y));
    const auto v = x.components(std::span<const Jet2>(y));
    const auto& idx = multi_indices(n, k);
    std::vector<Jet2> out(idx.size(), Jet2::constant(n, 0.0));
    for (std::size_t s = 0; s < idx.size(); ++s) {
      for (int j = 0; j < n; ++j) out[s] += v[static_cast<std::size_t>(j)] * c[s].partial(j);
    }
    // d(X^j) replacing the slot of dx^j in each basis element.
    for (std::size_t s = 0; s < idx.size(); ++s) {
      const unsigned jmask = idx[s];
      for (unsigned mm = jmask; mm != 0; mm &= mm - 1) {
        const int j = std::countr_zero(mm);
        const unsigned rest = jmask & ~(1u << j);
        const Jet2 xj = v[static_cast<std::size_t>(j)];
        for (int m = 0; m < n; ++m) {
          if (rest & (1u << m)) continue;
          const double sign = parity(below(rest, m) - below(rest, j));
          const auto target = static_cast<std::size_t>(multi_index_position(n, rest | (1u << m)));
          out[target] += sign * (c[s] * xj.partial(m));
        }
      }
    }
    return compose_all(out, z);
  });
}

// ------------------------------------------------------------ twisted calculus

double closedness_residual(const KFormField& theta, std::span<const double> p) {
  if (theta.degree() != 1) throw DimensionMismatch("closedness is checked for 1-forms");
  if (theta.dim() < 2) return 0.0;
  return exterior_derivative(theta).at(p).max_abs();
}

ClosedOneForm ClosedOneForm::verified(const KFormField& theta, const std::vector<std::vector<double>>& samples,
                                      double tol) {
  if (theta.degree() != 1) throw DimensionMismatch("Lee form must have degree 1");
  double worst = 0.0;
  for (const auto& p : samples) worst = std::max(worst, closedness_residual(theta, p));
  if (worst > tol) throw PreconditionFailed("1-form is not closed at tolerance", worst);
  return ClosedOneForm(theta);
}

ClosedOneForm ClosedOneForm::exact_by_construction(const KFormField& theta) {
  if (theta.degree() != 1) throw DimensionMismatch("Lee form must have degree 1");
  return ClosedOneForm(theta);
}

ClosedOneForm ClosedOneForm::zero(const Chart& chart) { return ClosedOneForm(KFormField::zero(chart, 1)); }

ClosedOneForm pullback(const SmoothMap& f, const ClosedOneForm& theta) {
  return ClosedOneForm(pullback(f, theta.form_));
}

ClosedOneForm operator+(const ClosedOneForm& a, const ClosedOneForm& b) { return ClosedOneForm(a.form_ + b.form_); }

KFormField twisted_derivative(const ClosedOneForm& theta, const KFormField& a) {
  require_same_chart(theta.chart(), a.chart(), "twisted derivative");
  return exterior_derivative(a) - wedge(theta.form(), a);
}

KFormField twisted_lie_derivative(const VectorField& x, const ClosedOneForm& theta, const KFormField& a) {
  return lie_derivative(x, a) - interior_product(x, theta.form()) * a;
}

double nondegeneracy(const FormValue& omega_p) { return determinant(omega_p.as_matrix()); }

std::vector<double> omega_dual_vector(const FormValue& omega_p, const FormValue& theta_p) {
  if (theta_p.degree() != 1 || theta_p.dim() != omega_p.dim()) throw DimensionMismatch("ω-dual of a non-covector");
  const DenseMatrix om = omega_p.as_matrix();
  const double det = determinant(om);
  if (std::abs(det) <= kNondegeneracyTolerance) throw DegenerateForm("ω is degenerate at the point", det);
  return solve_linear(om.transpose(), theta_p.coeffs());
}

SubspaceBasis omega_dual_subspace(const FormValue& omega_p, const SubspaceBasis& w) {
  if (w.ambient_dim() != omega_p.dim()) throw DimensionMismatch("ω-dual of a subspace of another space");
  const DenseMatrix om = omega_p.as_matrix();
  const double det = determinant(om);
  if (std::abs(det) <= kNondegeneracyTolerance) throw DegenerateForm("ω is degenerate at the point", det);
  if (w.dim() == 0) return SubspaceBasis::whole_space(omega_p.dim());
  return null_space(w.as_columns().transpose() * om);
}

// ---------------------------------------------------------------- LCSStructure

LCSStructure LCSStructure::verified(const KFormField& omega, const ClosedOneForm& theta,
                                    const std::vector<std::vector<double>>& samples, double tol) {
  if (omega.degree() != 2) throw DimensionMismatch("LCS form must have degree 2");
  require_same_chart(omega.chart(), theta.chart(), "LCS structure");
  LCSStructure s(omega, theta);
  double worst = 0.0;
  for (const auto& p : samples) {
    worst = std::max(worst, closedness_residual(theta.form(), p));
    worst = std::max(worst, s.structure_residual(p));
  }
  if (worst > tol) throw PreconditionFailed("dω = θ∧ω fails at tolerance", worst);
  for (const auto& p : samples) {
    const double det = s.determinant_at(p);
    if (std::abs(det) <= kNondegeneracyTolerance) throw DegenerateForm("LCS form degenerate at a sample", det);
  }
  return s;
}

LCSStructure LCSStructure::by_construction(const KFormField& omega, const ClosedOneForm& theta) {
  if (omega.degree() != 2) throw DimensionMismatch("LCS form must have degree 2");
  require_same_chart(omega.chart(), theta.chart(), "LCS structure");
  return LCSStructure(omega, theta);
}

double LCSStructure::structure_residual(std::span<const double> p) const {
  if (omega_.dim() < 3) return 0.0;
  return residual(exterior_derivative(omega_).at(p), wedge(theta_.form(), omega_).at(p));
}

double LCSStructure::determinant_at(std::span<const double> p) const { return nondegeneracy(omega_.at(p)); }

LCSStructure conformal_rescale(const LCSStructure& s, const KFormField& f) {
  if (f.degree() != 0) throw DimensionMismatch("conformal factor must be a 0-form");
  const KFormField ef = KFormField(f.chart(), 0, [f](std::span<const Jet2> x) {
    return std::vector<Jet2>{exp(f.coefficients(x).front())};
  });
  const ClosedOneForm theta = s.theta() + ClosedOneForm::exact_by_construction(exterior_derivative(f));
  return LCSStructure::by_construction(ef * s.omega(), theta);
}

}  // namespace lcsr
