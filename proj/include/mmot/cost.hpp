#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmot/space.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

class Coupling;

/// Repulsive pair interaction f: (0, inf) -> R with f(0+) = +inf.
class CostFunction {
 public:
  enum class Kind { coulomb, riesz, logarithmic };

  static CostFunction coulomb() { return CostFunction(Kind::coulomb, 1.0); }
  static CostFunction riesz(double s);
  static CostFunction logarithmic() { return CostFunction(Kind::logarithmic, 0.0); }
  /// "coulomb", "riesz:s" or "log".
  static CostFunction parse(std::string_view text);

  Kind kind() const { return kind_; }
  double exponent() const { return s_; }
  std::string name() const;

  /// f(z); +inf for z <= 0.
  double operator()(double z) const;
  /// Left inverse: the z > 0 with f(z) = y.
  double inverse(double y) const;

  /// Set when a Riesz exponent falls outside dim - 2 <= s <= dim.
  std::optional<std::string> riesz_window_warning(std::size_t dim) const;

 private:
  CostFunction(Kind kind, double s) : kind_(kind), s_(s) {}

  Kind kind_;
  double s_;
};

struct ConditionFReport {
  bool finite = true;      ///< finite at every sample
  bool decreasing = true;  ///< strictly decreasing along the samples
  bool blows_up = true;    ///< f(z) -> +inf as z -> 0
  bool ok() const { return finite && decreasing && blows_up; }
};

/// Sampled check of continuity and monotonicity on [lo, hi] (log-spaced).
ConditionFReport check_conditions_F(const CostFunction& f, double lo, double hi,
                                    std::size_t samples = 4096);

/// c(x_1..x_N) = sum_{k<l} f(d(x_k, x_l)) over a fixed space.
///
/// Pair values are always tabulated; the full tensor is materialized when
/// M^N fits kMaterializeBudget. Pairs are summed in the order
/// (0,1), (0,2), (1,2), (0,3), ... everywhere, so every evaluation path
/// produces the same bits.
class CostTensor {
 public:
  CostTensor(std::shared_ptr<const DiscreteSpace> space, CostFunction f, std::size_t N);

  std::size_t order() const { return N_; }
  std::size_t extent() const { return space_->size(); }
  const DiscreteSpace& space() const { return *space_; }
  const std::shared_ptr<const DiscreteSpace>& space_ptr() const { return space_; }
  const CostFunction& function() const { return f_; }

  /// f(d(x_i, x_j)); +inf on the diagonal.
  double pair(Index i, Index j) const { return pair_[i * extent() + j]; }
  std::span<const double> pair_row(Index i) const {
    return std::span<const double>(pair_).subspan(i * extent(), extent());
  }

  double operator()(std::span<const Index> idx) const;
  double at_flat(std::size_t flat) const;

  bool materialized() const { return dense_.size() > 0; }

 private:
  double evaluate(std::span<const Index> idx) const;

  std::shared_ptr<const DiscreteSpace> space_;
  CostFunction f_;
  std::size_t N_;
  std::vector<double> pair_;
  Tensor dense_;
};

inline double eval_cost(const CostTensor& ct, std::span<const Index> idx) { return ct(idx); }

/// exp(-c/eps) * prod_k m_{i_k}; exactly 0 when c = +inf.
double gibbs_kernel_entry(const CostTensor& ct, double eps, std::span<const Index> idx);

/// f^-1(N^2 (N-1) f(beta) / 2): the radius below which optimal plans carry
/// no mass. Empty for the log cost when beta >= 1.
std::optional<double> alpha_bound(const CostFunction& f, double beta, std::size_t N);

/// Mass of tuples with some pair at distance < alpha.
double diagonal_mass(const Coupling& gamma, double alpha);

}  // namespace mmot
