#pragma once

#include <cstddef>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/coupling.hpp"
#include "mmot/space.hpp"

namespace mmot {

/// Distribution function of a density on a sorted 1D space.
struct QuantileTable {
  std::vector<double> points;
  std::vector<double> masses;
  /// cdf[i] = sum_{j <= i} masses[j]; cdf.back() == 1 within 1e-12.
  std::vector<double> cdf;
  /// Cell boundaries (M + 1 values): midpoints between neighbours, with the
  /// outer cells mirrored. Used for the continuous map.
  std::vector<double> edges;
};

/// Throws std::invalid_argument unless the space is one-dimensional with
/// strictly increasing coordinates.
QuantileTable cdf(const Density& rho);

/// Smallest index with F >= q (left-continuous inverse); q in [0, 1].
Index quantile_index(const QuantileTable& qt, double q);
/// Support point at quantile_index.
double quantile(const QuantileTable& qt, double q);

/// Cyclic quantile map T(x) = G^-1(G(x) + 1/N), wrapping to G(x) + 1/N - 1
/// past (N-1)/N, where G is the piecewise linear distribution function that
/// spreads each atom uniformly over its cell.
double optimal_map(const QuantileTable& qt, double x, std::size_t N);
/// Index of the cell containing optimal_map(points[i]).
Index optimal_map_index(const QuantileTable& qt, Index i, std::size_t N);

/// (id, T, ..., T^(N-1)) pushforward of rho, symmetrized. Cells that straddle
/// a shifted quantile are split proportionally, so the marginals are exact.
Coupling induced_plan(const Density& rho, std::size_t N);

/// cost_C0 of induced_plan under f.
double oracle_cost(const Density& rho, std::size_t N, const CostFunction& f);

}  // namespace mmot
