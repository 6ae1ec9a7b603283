#include "mmot/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmot {

namespace {

constexpr double kQuantileTol = 1e-12;
constexpr double kSnap = 1e-13;

// Piecewise linear distribution function through (edges[k], cdf[k-1]).
double smooth_cdf(const QuantileTable& qt, double x) {
  const auto& e = qt.edges;
  if (x <= e.front()) {
    return 0.0;
  }
  if (x >= e.back()) {
    return 1.0;
  }
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin()) - 1;
  const double lo = k == 0 ? 0.0 : qt.cdf[k - 1];
  const double t = (x - e[k]) / (e[k + 1] - e[k]);
  return lo + t * qt.masses[k];
}

// Smallest x with smooth_cdf(x) >= q.
double smooth_quantile(const QuantileTable& qt, double q) {
  const std::size_t M = qt.masses.size();
  std::size_t k = quantile_index(qt, q);
  while (k + 1 < M && qt.masses[k] == 0.0) {
    ++k;
  }
  const double lo = k == 0 ? 0.0 : qt.cdf[k - 1];
  if (qt.masses[k] == 0.0) {
    return qt.edges[k];
  }
  const double t = std::clamp((q - lo) / qt.masses[k], 0.0, 1.0);
  return qt.edges[k] + t * (qt.edges[k + 1] - qt.edges[k]);
}

// Cell holding quantile level q in [0, 1): F_{k-1} <= q < F_k.
Index cell_at(const QuantileTable& qt, double q) {
  const auto it = std::upper_bound(qt.cdf.begin(), qt.cdf.end(), q);
  const auto k = static_cast<Index>(it - qt.cdf.begin());
  return std::min<Index>(k, qt.cdf.size() - 1);
}

}  // namespace

QuantileTable cdf(const Density& rho) {
  const auto& space = rho.space();
  if (!space.is_euclidean_1d() || !space.is_sorted_1d()) {
    throw std::invalid_argument("the quantile oracle needs a 1D space with increasing points");
  }
  QuantileTable qt;
  const std::size_t M = rho.size();
  qt.masses = rho.masses();
  qt.points.resize(M);
  qt.cdf.resize(M);
  double acc = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    qt.points[i] = space.points()[i][0];
    acc += qt.masses[i];
    qt.cdf[i] = acc;
  }
  qt.cdf.back() = 1.0;
  qt.edges.resize(M + 1);
  for (std::size_t i = 1; i < M; ++i) {
    qt.edges[i] = 0.5 * (qt.points[i - 1] + qt.points[i]);
  }
  if (M == 1) {
    qt.edges[0] = qt.points[0] - 0.5 * space.ref_weight(0);
    qt.edges[1] = qt.points[0] + 0.5 * space.ref_weight(0);
  } else {
    qt.edges[0] = qt.points[0] - (qt.edges[1] - qt.points[0]);
    qt.edges[M] = qt.points[M - 1] + (qt.points[M - 1] - qt.edges[M - 1]);
  }
  return qt;
}

Index quantile_index(const QuantileTable& qt, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  }
  const auto it = std::lower_bound(qt.cdf.begin(), qt.cdf.end(), q - kQuantileTol);
  return std::min<Index>(static_cast<Index>(it - qt.cdf.begin()), qt.cdf.size() - 1);
}

double quantile(const QuantileTable& qt, double q) { return qt.points[quantile_index(qt, q)]; }

double optimal_map(const QuantileTable& qt, double x, std::size_t N) {
  if (N < 2) {
    throw std::invalid_argument("N must be at least 2");
  }
  const double step = 1.0 / static_cast<double>(N);
  const double g = smooth_cdf(qt, x);
  const double target = g <= 1.0 - step ? g + step : g + step - 1.0;
  return smooth_quantile(qt, std::clamp(target, 0.0, 1.0));
}

Index optimal_map_index(const QuantileTable& qt, Index i, std::size_t N) {
  const double y = optimal_map(qt, qt.points.at(i), N);
  const auto& e = qt.edges;
  const auto k = static_cast<Index>(std::upper_bound(e.begin(), e.end(), y) - e.begin());
  return std::clamp<Index>(k == 0 ? 0 : k - 1, 0, qt.points.size() - 1);
}

Coupling induced_plan(const Density& rho, std::size_t N) {
  if (N < 2) {
    throw std::invalid_argument("N must be at least 2");
  }
  const QuantileTable qt = cdf(rho);
  const std::size_t M = qt.points.size();

  // Slot l holds the cell of level (q + l/N) mod 1, so the tuple is constant
  // between consecutive points of {F_j - l/N mod 1}.
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t l = 0; l < N; ++l) {
    const double shift = static_cast<double>(l) / static_cast<double>(N);
    for (double f : qt.cdf) {
      double b = f - shift;
      if (b < 0.0) {
        b += 1.0;
      }
      if (b > 0.0 && b < 1.0) {
        cuts.push_back(b);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> merged{cuts.front()};
  for (double c : cuts) {
    if (c - merged.back() > kSnap) {
      merged.push_back(c);
    }
  }
  merged.back() = 1.0;

  Tensor t(M, N);
  std::vector<Index> idx(N);
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double a = merged[k];
    const double len = merged[k + 1] - a;
    const double mid = a + 0.5 * len;
    for (std::size_t l = 0; l < N; ++l) {
      double q = mid + static_cast<double>(l) / static_cast<double>(N);
      if (q >= 1.0) {
        q -= 1.0;
      }
      idx[l] = cell_at(qt, q);
    }
    t.at(idx) += len;
  }
  return Coupling::from_unnormalized(rho.space_ptr(), symmetrize(t));
}

double oracle_cost(const Density& rho, std::size_t N, const CostFunction& f) {
  const CostTensor ct(rho.space_ptr(), f, N);
  return cost_C0(induced_plan(rho, N), ct);
}

}  // namespace mmot
