#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lcsr/jet.hpp"

namespace lcsr {

/// A coordinate chart: an id, a dimension and an axis-aligned domain box.
/// Infinite bounds are allowed (fiber coordinates are unbounded).
struct Chart {
  std::string id;
  int dim = 0;
  std::vector<double> lower;
  std::vector<double> upper;

  static Chart box(std::string id, std::vector<double> lower, std::vector<double> upper);
  static Chart unbounded(std::string id, int dim);

  bool contains(std::span<const double> p) const;
  /// Throws DomainError (or DimensionMismatch) naming `what`.
  void require_contains(std::span<const double> p, const std::string& what) const;
  void require_contains(std::span<const Jet2> p, const std::string& what) const;
  bool same_as(const Chart& o) const { return id == o.id && dim == o.dim; }
};

struct ChartPoint {
  std::string chart;
  std::vector<double> coords;
};

/// Jet-in, jet-out coordinate expression. Inputs are the chart coordinates as
/// jets in some auxiliary coordinates z; outputs are jets in the same z.
using JetMap = std::function<std::vector<Jet2>(std::span<const Jet2>)>;

/// Fresh independent variables at the values of `x`.
std::vector<Jet2> reseed(std::span<const Jet2> x);
/// Re-expresses jets computed in reseeded coordinates in the coordinates of `x`.
std::vector<Jet2> compose_all(std::span<const Jet2> values, std::span<const Jet2> x);
std::vector<double> values_of(std::span<const Jet2> x);

}  // namespace lcsr
