#include "lcsr/cotangent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcsr/errors.hpp"

namespace lcsr {

namespace {

std::vector<Jet2> head(std::span<const Jet2> x, int n) { return {x.begin(), x.begin() + n}; }
std::vector<Jet2> tail(std::span<const Jet2> x, int n) { return {x.begin() + n, x.begin() + 2 * n}; }

// Evaluator of the cotangent lift of phi: (q, c) ↦ (φ(q), (Dφ^{-1}(φ(q)))ᵀ c).
JetMap lift_evaluator(const SmoothMap& phi) {
  const int n = phi.source().dim;
  return [phi, n](std::span<const Jet2> x) {
    const auto q = head(x, n);
    const auto c = tail(x, n);
    const auto y = phi.apply(std::span<const Jet2>(q));
    const auto ys = reseed(y);
    const auto back = phi.apply_inverse(std::span<const Jet2>(ys));
    std::vector<Jet2> out = y;
    for (int i = 0; i < n; ++i) {
      std::vector<Jet2> col;
      for (int j = 0; j < n; ++j) col.push_back(back[static_cast<std::size_t>(j)].partial(i));
      const auto colz = compose_all(col, y);
      Jet2 acc = Jet2::constant(x.front().dim(), 0.0);
      for (int j = 0; j < n; ++j) acc += colz[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(j)];
      out.push_back(acc);
    }
    return out;
  };
}

}  // namespace

double BaseChart::transition_residual(const std::vector<std::vector<double>>& overlap_points) const {
  double worst = 0.0;
  for (const auto& t : transitions) {
    for (const auto& p : overlap_points) {
      std::vector<double> y;
      try {
        y = t.apply(std::span<const double>(p));
      } catch (const DomainError&) {
        continue;  // not in the overlap
      }
      const auto back = t.apply_inverse(std::span<const double>(y));
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(back[i] - p[i]));
      const auto again = t.apply(std::span<const double>(back));
      for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(again[i] - y[i]));
    }
  }
  return worst;
}

CotangentChart::CotangentChart(Chart base) : base_(std::move(base)) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo = base_.lower;
  std::vector<double> hi = base_.upper;
  lo.insert(lo.end(), static_cast<std::size_t>(base_.dim), -inf);
  hi.insert(hi.end(), static_cast<std::size_t>(base_.dim), inf);
  chart_ = Chart::box("T*" + base_.id, std::move(lo), std::move(hi));
  if (2 * base_.dim > kMaxDim) throw DimensionMismatch("cotangent chart exceeds the jet dimension limit");
}

SmoothMap CotangentChart::projection() const {
  const int n = base_.dim;
  return SmoothMap(chart_, base_, [n](std::span<const Jet2> x) { return head(x, n); }, std::nullopt, true);
}

std::vector<double> CotangentChart::point(std::span<const double> q, std::span<const double> c) const {
  if (static_cast<int>(q.size()) != n() || static_cast<int>(c.size()) != n()) {
    throw DimensionMismatch("cotangent point needs base and fiber parts of length n");
  }
  std::vector<double> x(q.begin(), q.end());
  x.insert(x.end(), c.begin(), c.end());
  return x;
}

std::vector<double> CotangentChart::base_part(std::span<const double> x) {
  return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2)};
}

std::vector<double> CotangentChart::fiber_part(std::span<const double> x) {
  return {x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2), x.end()};
}

KFormField tautological_form(const CotangentChart& c) {
  const int n = c.n();
  return KFormField::one_form(c.chart(), [n](std::span<const Jet2> x) {
    std::vector<Jet2> out = tail(x, n);
    for (int i = 0; i < n; ++i) out.push_back(Jet2::constant(x.front().dim(), 0.0));
    return out;
  });
}

ClosedOneForm lifted_lee_form(const CotangentChart& c, const ClosedOneForm& theta) {
  if (!theta.chart().same_as(c.base())) throw DimensionMismatch("Lee form lives on another base chart");
  return pullback(c.projection(), theta);
}

LCSStructure lcs_form(const CotangentChart& c, const ClosedOneForm& theta) {
  const ClosedOneForm lifted = lifted_lee_form(c, theta);
  return LCSStructure::by_construction(twisted_derivative(lifted, tautological_form(c)), lifted);
}

KFormField lcs_form_coordinate_expansion(const CotangentChart& c, const ClosedOneForm& theta) {
  if (!theta.chart().same_as(c.base())) throw DimensionMismatch("Lee form lives on another base chart");
  const int n = c.n();
  const int dim = 2 * n;
  return KFormField(c.chart(), 2, [theta, n, dim](std::span<const Jet2> x) {
    const auto q = head(x, n);
    const auto a = tail(x, n);
    const auto th = theta.form().coefficients(std::span<const Jet2>(q));
    std::vector<Jet2> out(static_cast<std::size_t>(binomial(dim, 2)), Jet2::constant(x.front().dim(), 0.0));
    for (int i = 0; i < n; ++i) {
      // dc_i ∧ dq_i = −dq_i ∧ dc_i
      out[static_cast<std::size_t>(multi_index_position(dim, (1u << i) | (1u << (n + i))))] -= 1.0;
      for (int j = i + 1; j < n; ++j) {
        const auto si = static_cast<std::size_t>(i);
        const auto sj = static_cast<std::size_t>(j);
        out[static_cast<std::size_t>(multi_index_position(dim, (1u << i) | (1u << j)))] -=
            th[si] * a[sj] - th[sj] * a[si];
      }
    }
    return out;
  });
}

LiftedField lift_fundamental_field(const CotangentChart& c, const VectorField& x) {
  if (!x.chart().same_as(c.base())) throw DimensionMismatch("field lives on another base chart");
  const int n = c.n();
  VectorField lifted(c.chart(), [x, n](std::span<const Jet2> z) {
    const auto q = head(z, n);
    const auto cc = tail(z, n);
    std::vector<Jet2> out = x.components(std::span<const Jet2>(q));
    const auto qs = reseed(q);
    const auto xs = x.components(std::span<const Jet2>(qs));
    for (int i = 0; i < n; ++i) {
      std::vector<Jet2> col;
      for (int j = 0; j < n; ++j) col.push_back(xs[static_cast<std::size_t>(j)].partial(i));
      const auto colz = compose_all(col, q);
      Jet2 acc = Jet2::constant(z.front().dim(), 0.0);
      for (int j = 0; j < n; ++j) acc -= cc[static_cast<std::size_t>(j)] * colz[static_cast<std::size_t>(j)];
      out.push_back(acc);
    }
    return out;
  });
  return {x, lifted};
}

SmoothMap cotangent_lift_map(const CotangentChart& source, const CotangentChart& target, const SmoothMap& phi) {
  if (!phi.source().same_as(source.base()) || !phi.target().same_as(target.base())) {
    throw DimensionMismatch("cotangent lift: map does not connect the given base charts");
  }
  if (!phi.has_inverse()) throw PreconditionFailed("cotangent lift needs a registered inverse");
  return SmoothMap(source.chart(), target.chart(), lift_evaluator(phi), lift_evaluator(phi.inverse()));
}

VectorField theta_omega_dual(const CotangentChart& c, const ClosedOneForm& theta) {
  if (!theta.chart().same_as(c.base())) throw DimensionMismatch("Lee form lives on another base chart");
  const int n = c.n();
  return VectorField(c.chart(), [theta, n](std::span<const Jet2> z) {
    const auto q = head(z, n);
    std::vector<Jet2> out(static_cast<std::size_t>(n), Jet2::constant(z.front().dim(), 0.0));
    const auto th = theta.form().coefficients(std::span<const Jet2>(q));
    out.insert(out.end(), th.begin(), th.end());
    return out;
  });
}

}  // namespace lcsr
