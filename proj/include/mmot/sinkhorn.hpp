#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/coupling.hpp"
#include "mmot/space.hpp"

namespace mmot {

/// Kantorovich potential u on the space; all entries finite.
struct Potential {
  std::shared_ptr<const DiscreteSpace> space;
  std::vector<double> values;
};

struct SinkhornConfig {
  double eps = 1e-2;
  std::size_t max_iter = 100000;
  /// Stop when the L1 marginal error drops below this.
  double tol = 1e-8;
  /// Step size theta in (0, 1]; 1/N when unset.
  std::optional<double> damping;
  /// Initial potential; zero when unset.
  std::optional<std::vector<double>> warm_start;
  /// Solve at scaling_start first and halve eps until the target is reached.
  bool eps_scaling = true;
  double scaling_start = 0.1;
  /// Marginal tolerance of the intermediate scaling stages.
  double scaling_tol = 1e-5;

  double theta(std::size_t N) const { return damping ? *damping : 1.0 / static_cast<double>(N); }
  /// Throws std::invalid_argument on eps <= 0, theta outside (0, 1] or tol <= 0.
  void validate() const;
};

struct SolveReport {
  Coupling coupling;
  Potential potential;
  std::size_t iterations = 0;
  double marginal_error = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  bool converged = false;
  /// |Z - 1| of the kernel mass before renormalization.
  double normalization_defect = 0.0;
  double eps = 0.0;
};

/// Symmetric single-potential Sinkhorn in the log domain.
///
/// Each sweep computes log S(u)_i, the log of the axis-0 marginal density of
/// exp((u (+) ... (+) u - c)/eps) m_N, and moves u_i by
/// theta * eps * (log rho_i - log S(u)_i). The returned potential carries the
/// additive constant that makes the kernel mass exactly 1, so the returned
/// coupling equals primal_from_potential(potential) without rescaling.
///
/// Throws std::invalid_argument when rho vanishes somewhere (the potential
/// would have to be -inf there) and InfeasibleError when a point has no
/// finite-cost partner tuple. Non-convergence is reported, not thrown.
SolveReport solve_symmetric(const Density& rho, const CostTensor& ct, const SinkhornConfig& cfg);

/// N sum u rho m - eps sum exp((u (+) ... (+) u - c)/eps) m_N + eps.
double dual_objective(std::span<const double> u, const Density& rho, const CostTensor& ct,
                      double eps);

/// sum_k sum_i u_k(i) rho_i m_i - eps sum exp((u_1 (+) ... (+) u_N - c)/eps) m_N + eps.
double dual_objective_multi(std::span<const std::vector<double>> us, const Density& rho,
                            const CostTensor& ct, double eps);

/// Unnormalized masses exp((u (+) ... (+) u - c)/eps) m_N.
Tensor primal_from_potential(std::span<const double> u, const CostTensor& ct, double eps);

inline double duality_gap(const SolveReport& r) { return r.primal - r.dual; }

}  // namespace mmot
