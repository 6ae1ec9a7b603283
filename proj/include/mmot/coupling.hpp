#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/space.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

struct SinkhornConfig;

/// Probability measure on X^N stored as a dense tensor of masses.
class Coupling {
 public:
  /// Requires nonnegative finite entries summing to 1 within 1e-12.
  Coupling(std::shared_ptr<const DiscreteSpace> space, Tensor mass);
  /// Divides by the total mass, which must be positive.
  static Coupling from_unnormalized(std::shared_ptr<const DiscreteSpace> space, Tensor mass);

  const DiscreteSpace& space() const { return *space_; }
  const std::shared_ptr<const DiscreteSpace>& space_ptr() const { return space_; }
  const Tensor& mass() const { return mass_; }
  std::size_t order() const { return mass_.order(); }
  std::size_t extent() const { return mass_.extent(); }
  double operator()(std::span<const Index> idx) const { return mass_.at(idx); }

 private:
  std::shared_ptr<const DiscreteSpace> space_;
  Tensor mass_;
};

/// Masses of the projection onto `axis` (0-based).
std::vector<double> marginal_masses(const Coupling& gamma, std::size_t axis);
/// Projection onto `axis` (0-based) as a density against m.
Density marginal(const Coupling& gamma, std::size_t axis);
/// max over axes of sum_i |marginal_i - rho_i m_i|.
double marginal_error(const Coupling& gamma, const Density& rho);

Coupling symmetrize(const Coupling& gamma);

struct CostParts {
  double positive = 0.0;
  double negative = 0.0;  ///< mass-weighted sum over tuples with c < 0
  double total() const { return positive + negative; }
};

/// sum c * mass with +inf * 0 = 0; +inf when mass sits on an infinite cost.
double cost_C0(const Coupling& gamma, const CostTensor& ct);
/// cost_C0 split by sign, used to warn about negative tails of the log cost.
CostParts cost_C0_parts(const Coupling& gamma, const CostTensor& ct);

/// sum mass * log(mass / prod m) with 0 log 0 = 0.
double entropy(const Coupling& gamma);
double cost_Ceps(const Coupling& gamma, const CostTensor& ct, double eps);

/// sum mass * log(mass / ref); +inf when mass > 0 where ref = 0.
double kl(const Coupling& gamma, const Tensor& ref);
/// KL against the Gibbs kernel exp(-c/eps) m_N, evaluated in log space.
double kl_gibbs(const Coupling& gamma, const CostTensor& ct, double eps);

Coupling product_coupling(const Density& rho, std::size_t N);

struct ReferenceChangeResult {
  double value_m = 0.0;    ///< minimal C_eps with reference m
  double value_rho = 0.0;  ///< minimal C_eps with reference rho m
  double correction = 0.0; ///< N eps sum rho log rho m
  double residual = 0.0;
  double tv = 0.0;         ///< total variation between the two minimizers
  bool converged = false;
};

/// Solves with reference m and with reference rho m (density 1) and compares
/// the values against the entropy correction, and the minimizers directly.
/// Requires rho > 0 everywhere.
ReferenceChangeResult reference_change_check(const Density& rho, const CostTensor& ct, double eps,
                                             const SinkhornConfig& base);

}  // namespace mmot
