#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/coupling.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

/// Parameters of step n of the block construction.
struct BlockSchedule {
  std::size_t n = 0;
  double r = 0.0;  ///< 1/n
  std::vector<Index> x;        ///< anchor tuple
  std::vector<Index> x_prime;  ///< second anchor tuple
  double mass_B = 0.0;         ///< gamma of the symmetrized support around x
  double mass_B_prime = 0.0;
  double eps = 0.0;
  std::vector<Index> K;  ///< retained points, in selection order
  double diam_K = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  /// Partition of the core marginal support; each block lists point indices.
  std::vector<std::vector<Index>> blocks;
  /// A-cell of every point: 0..N-2 for the balls of radius r/2 around
  /// x_0..x_{N-2}, N-1 for the rest of the space.
  std::vector<std::size_t> A;
};

/// Lexicographically smallest pair of support tuples (in row-major order)
/// whose 2N coordinates are pairwise farther than r apart. Empty when none.
std::optional<std::pair<std::vector<Index>, std::vector<Index>>> select_anchors(
    const Coupling& gamma, double r);

/// Schedule for step n. Throws InfeasibleError when some ingredient does not
/// exist at this n (no anchors, no admissible delta, an atom too heavy for a
/// block), and std::invalid_argument for a non-symmetric or infinite-cost input.
BlockSchedule build_schedule(const Coupling& gamma, const CostTensor& ct, std::size_t n);

/// Block-constant product reweighting of core1 (an unnormalized symmetric
/// tensor) over `blocks`, using the core marginal masses rho1.
Tensor core_approximation(const Tensor& core1, std::span<const double> rho1,
                          const std::vector<std::vector<Index>>& blocks);

struct RemainderPieces {
  Tensor coupled;   ///< couples the discarded marginal with the x-reserve
  Tensor spread;    ///< rest of the x-reserve against the x'-reserve
  Tensor balanced;  ///< N >= 3 only: even part of the x-reserve, empty otherwise
  Tensor closing;   ///< remainder of the x'-reserve
};

/// Remainder part for the discarded mass `rest` (symmetric, unnormalized)
/// given the normalized reserve marginals around x and x'.
RemainderPieces remainder_coupling(const BlockSchedule& s, const DiscreteSpace& space,
                                   const Tensor& rest, std::span<const double> reserve_x,
                                   std::span<const double> reserve_x_prime);

struct BlockApproxResult {
  BlockSchedule schedule;
  Coupling coupling;
  double marginal_error = 0.0;
  double symmetry_defect = 0.0;
  double remainder_mass = 0.0;
  double discarded_mass = 0.0;  ///< mass of the part outside the core
  /// Smallest pair distance on the supports of the coupled piece and of the
  /// other remainder pieces (+inf for an empty piece).
  double separation_coupled = 0.0;
  double separation_reserve = 0.0;
  double cost_original = 0.0;
  double cost_approx = 0.0;
  double cost_gap = 0.0;
  double core_truncation = 0.0;  ///< |C0[gamma] - C0[core]|
  double cost_bound = 0.0;
  double entropy = 0.0;
  /// Mixture bound: mixing entropy of the pieces plus their weighted entropies.
  double entropy_bound = 0.0;
  std::size_t pieces = 0;
};

/// gamma'_n: same marginals as gamma, product form on small blocks away from
/// the diagonal, plus remainder pieces of total mass below 3 eps_n.
BlockApproxResult block_approximation(const Coupling& gamma, const CostTensor& ct, std::size_t n);

/// Smallest n in [from, to] at which build_schedule succeeds.
std::optional<std::size_t> smallest_feasible_n(const Coupling& gamma, const CostTensor& ct,
                                               std::size_t from, std::size_t to);

/// k(n) = min(n, max(1, sup{k <= L : sqrt(tau_n) E_j < 1 for all j <= k}))
/// for n = 1..tau.size(), with L = entropies.size() and sup of the empty set 0.
/// Throws std::invalid_argument unless tau is positive and strictly decreasing.
std::vector<std::size_t> slowdown_reindex(std::span<const double> entropies,
                                          std::span<const double> tau);

/// Integrals of ten fixed bounded Lipschitz functions of a tuple, used to
/// watch narrow convergence of the approximations.
std::vector<double> test_function_integrals(const Coupling& gamma);

}  // namespace mmot
