#include "lcsr/chart.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lcsr/errors.hpp"

namespace lcsr {

Chart Chart::box(std::string id, std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size()) throw DimensionMismatch("chart box bounds differ in length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw PreconditionFailed("empty chart box in " + id);
  }
  Chart c;
  c.id = std::move(id);
  c.dim = static_cast<int>(lower.size());
  c.lower = std::move(lower);
  c.upper = std::move(upper);
  return c;
}

Chart Chart::unbounded(std::string id, int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return box(std::move(id), std::vector<double>(static_cast<std::size_t>(dim), -inf),
             std::vector<double>(static_cast<std::size_t>(dim), inf));
}

bool Chart::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim) return false;
  for (int i = 0; i < dim; ++i) {
    const double v = p[static_cast<std::size_t>(i)];
    if (!std::isfinite(v)) return false;
    if (v < lower[static_cast<std::size_t>(i)] || v > upper[static_cast<std::size_t>(i)]) return false;
  }
  return true;
}

void Chart::require_contains(std::span<const double> p, const std::string& what) const {
  if (static_cast<int>(p.size()) != dim) {
    throw DimensionMismatch(what + ": point of dimension " + std::to_string(p.size()) + " on chart " + id +
                            " of dimension " + std::to_string(dim));
  }
  if (!contains(p)) {
    std::ostringstream os;
    os << what << ": point (";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ") outside chart " << id;
    throw DomainError(os.str());
  }
}

void Chart::require_contains(std::span<const Jet2> p, const std::string& what) const {
  const auto v = values_of(p);
  require_contains(std::span<const double>(v), what);
}

std::vector<Jet2> reseed(std::span<const Jet2> x) {
  const auto v = values_of(x);
  return seed(v);
}

namespace {

bool is_identity_seed(std::span<const Jet2> x) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const Jet2& j = x[static_cast<std::size_t>(i)];
    if (j.dim() != n || j.order() != 2) return false;
    for (int a = 0; a < n; ++a) {
      if (j.grad(a) != (a == i ? 1.0 : 0.0)) return false;
      for (int b = 0; b < n; ++b) {
        if (j.hess(a, b) != 0.0) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<Jet2> compose_all(std::span<const Jet2> values, std::span<const Jet2> x) {
  if (is_identity_seed(x)) return {values.begin(), values.end()};
  std::vector<Jet2> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(compose(v, x));
  return out;
}

std::vector<double> values_of(std::span<const Jet2> x) {
  std::vector<double> v;
  v.reserve(x.size());
  for (const auto& j : x) v.push_back(j.value());
  return v;
}

}  // namespace lcsr
