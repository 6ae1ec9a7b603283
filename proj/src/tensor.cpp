#include "mmot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mmot {

std::size_t checked_power(std::size_t extent, std::size_t order, std::size_t limit) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < order; ++k) {
    if (extent != 0 && result > limit / extent) {
      throw std::overflow_error("tensor of extent " + std::to_string(extent) + " and order " +
                                std::to_string(order) + " exceeds the entry budget");
    }
    result *= extent;
  }
  if (result > limit) {
    throw std::overflow_error("tensor exceeds the entry budget");
  }
  return result;
}

Tensor::Tensor(std::size_t extent, std::size_t order, double fill)
    : extent_(extent), order_(order), data_(checked_power(extent, order), fill) {
  if (order == 0) {
    throw std::invalid_argument("tensor order must be positive");
  }
}

std::size_t Tensor::flat_index(std::span<const Index> idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < order_; ++k) {
    flat = flat * extent_ + idx[k];
  }
  return flat;
}

void Tensor::unflatten(std::size_t flat, std::span<Index> idx) const {
  for (std::size_t k = order_; k-- > 0;) {
    idx[k] = flat % extent_;
    flat /= extent_;
  }
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.extent_ != extent_ || other.order_ != order_) {
    throw std::invalid_argument("tensor shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += other.data_[i];
  }
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) {
    v *= s;
  }
  return *this;
}

bool next_index(std::span<Index> idx, std::size_t extent) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (++idx[k] < extent) {
      return true;
    }
    idx[k] = 0;
  }
  return false;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 64;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) {
      s += v;
    }
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double log_sum_exp(std::span<const double> values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx)) {
    return mx;
  }
  double s = 0.0;
  for (double v : values) {
    s += std::exp(v - mx);
  }
  return mx + std::log(s);
}

void LogSumExp::add(double v) {
  if (v == -std::numeric_limits<double>::infinity()) {
    return;
  }
  if (v > max_) {
    sum_ = sum_ * std::exp(max_ - v) + 1.0;
    max_ = v;
  } else {
    sum_ += std::exp(v - max_);
  }
}

double LogSumExp::value() const {
  if (sum_ == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return max_ + std::log(sum_);
}

std::vector<double> axis_sums(const Tensor& t, std::size_t axis) {
  const std::size_t M = t.extent();
  const std::size_t N = t.order();
  if (axis >= N) {
    throw std::out_of_range("axis out of range");
  }
  // View the tensor as (outer, M, inner) with the chosen axis in the middle.
  std::size_t inner = 1;
  for (std::size_t k = axis + 1; k < N; ++k) {
    inner *= M;
  }
  const std::size_t outer = t.size() / (inner * M);
  std::vector<double> out(M, 0.0);
  std::vector<double> partial(outer * inner);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t o = 0; o < outer; ++o) {
      const std::size_t base = (o * M + i) * inner;
      for (std::size_t r = 0; r < inner; ++r) {
        partial[o * inner + r] = t[base + r];
      }
    }
    out[i] = pairwise_sum(partial);
  }
  return out;
}

void PairwiseAccumulator::add(double v) {
  block_.push_back(v);
  if (block_.size() == 4096) {
    partials_.push_back(pairwise_sum(block_));
    block_.clear();
  }
}

double PairwiseAccumulator::value() const {
  if (partials_.empty()) {
    return pairwise_sum(block_);
  }
  std::vector<double> all = partials_;
  all.push_back(pairwise_sum(block_));
  return pairwise_sum(all);
}

double total(const Tensor& t) { return pairwise_sum(t.data()); }

namespace {

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> perms;
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return perms;
}

}  // namespace

Tensor symmetrize(const Tensor& t) {
  const std::size_t N = t.order();
  if (N == 2) {
    const std::size_t M = t.extent();
    Tensor out(M, 2);
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t j = 0; j < M; ++j) {
        out[i * M + j] = 0.5 * (t[i * M + j] + t[j * M + i]);
      }
    }
    return out;
  }
  const auto perms = all_permutations(N);
  const double scale = 1.0 / static_cast<double>(perms.size());
  Tensor out(t.extent(), N);
  std::vector<Index> idx(N, 0);
  std::vector<Index> moved(N);
  std::size_t flat = 0;
  do {
    double s = 0.0;
    for (const auto& p : perms) {
      for (std::size_t k = 0; k < N; ++k) {
        moved[k] = idx[p[k]];
      }
      s += t.at(moved);
    }
    out[flat++] = s * scale;
  } while (next_index(idx, t.extent()));
  return out;
}

double symmetry_defect(const Tensor& t) {
  const std::size_t N = t.order();
  const auto perms = all_permutations(N);
  std::vector<Index> idx(N, 0);
  std::vector<Index> moved(N);
  double worst = 0.0;
  std::size_t flat = 0;
  do {
    const double v = t[flat++];
    for (const auto& p : perms) {
      for (std::size_t k = 0; k < N; ++k) {
        moved[k] = idx[p[k]];
      }
      worst = std::max(worst, std::abs(v - t.at(moved)));
    }
  } while (next_index(idx, t.extent()));
  return worst;
}

namespace {

void outer_recurse(Tensor& out, std::span<const std::vector<double>> factors, std::size_t axis,
                   std::size_t flat, double partial) {
  const std::size_t M = out.extent();
  const auto& f = factors[axis];
  if (axis + 1 == factors.size()) {
    for (std::size_t i = 0; i < M; ++i) {
      if (f[i] != 0.0) {
        out[flat * M + i] += partial * f[i];
      }
    }
    return;
  }
  for (std::size_t i = 0; i < M; ++i) {
    if (f[i] != 0.0) {
      outer_recurse(out, factors, axis + 1, flat * M + i, partial * f[i]);
    }
  }
}

}  // namespace

void add_outer_product(Tensor& out, std::span<const std::vector<double>> factors, double weight) {
  if (factors.size() != out.order()) {
    throw std::invalid_argument("outer product needs one factor per axis");
  }
  for (const auto& f : factors) {
    if (f.size() != out.extent()) {
      throw std::invalid_argument("outer product factor has the wrong length");
    }
  }
  if (weight == 0.0) {
    return;
  }
  outer_recurse(out, factors, 0, 0, weight);
}

}  // namespace mmot
