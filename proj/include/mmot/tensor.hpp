#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmot {

using Index = std::size_t;

/// Upper bound on the number of entries of a dense cost tensor.
inline constexpr std::size_t kMaterializeBudget = std::size_t{1} << 24;
/// Upper bound on the number of entries of a dense coupling.
inline constexpr std::size_t kCouplingBudget = std::size_t{1} << 26;

/// extent^order, throwing std::overflow_error past `limit`.
std::size_t checked_power(std::size_t extent, std::size_t order,
                          std::size_t limit = kCouplingBudget);

/// Dense N-way tensor with the same extent M on every axis.
///
/// Storage is row-major: axis 0 varies slowest, so the flat index of
/// (i_0, ..., i_{N-1}) is sum_k i_k * M^(N-1-k).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t extent, std::size_t order, double fill = 0.0);

  std::size_t extent() const { return extent_; }
  std::size_t order() const { return order_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::span<const Index> idx) { return data_[flat_index(idx)]; }
  double at(std::span<const Index> idx) const { return data_[flat_index(idx)]; }

  std::size_t flat_index(std::span<const Index> idx) const;
  void unflatten(std::size_t flat, std::span<Index> idx) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

 private:
  std::size_t extent_ = 0;
  std::size_t order_ = 0;
  std::vector<double> data_;
};

/// Odometer step over [0, extent)^idx.size() in row-major order.
/// Returns false (and resets idx to zeros) after the last tuple.
bool next_index(std::span<Index> idx, std::size_t extent);

/// Pairwise (tree) summation; the association order depends only on the
/// length of the input.
double pairwise_sum(std::span<const double> values);

/// Streaming sum with a fixed association: blocks of 4096 terms are summed
/// pairwise, then the block sums are summed pairwise.
class PairwiseAccumulator {
 public:
  void add(double v);
  double value() const;

 private:
  std::vector<double> block_;
  std::vector<double> partials_;
};

/// log(sum exp(values)); -inf for an empty input or all -inf entries.
double log_sum_exp(std::span<const double> values);

/// Streaming log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double v);
  double value() const;

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// Mass marginal along `axis`: out[i] = sum over tuples with i_axis = i.
std::vector<double> axis_sums(const Tensor& t, std::size_t axis);

/// Sum of all entries (pairwise summation).
double total(const Tensor& t);

/// (1/N!) sum over all axis permutations.
Tensor symmetrize(const Tensor& t);

/// Largest |t(idx) - t(sigma(idx))| over all tuples and permutations.
double symmetry_defect(const Tensor& t);

/// Outer product v_0 (x) v_1 (x) ... (x) v_{N-1} scaled by `weight`, added to `out`.
void add_outer_product(Tensor& out, std::span<const std::vector<double>> factors,
                       double weight = 1.0);

}  // namespace mmot
