#include "mmot/cost.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmot/coupling.hpp"

namespace mmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxOrder = 8;

}  // namespace

CostFunction CostFunction::riesz(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("riesz exponent must be positive");
  }
  return CostFunction(Kind::riesz, s);
}

CostFunction CostFunction::parse(std::string_view text) {
  if (text == "coulomb") {
    return coulomb();
  }
  if (text == "log" || text == "logarithmic") {
    return logarithmic();
  }
  if (text.starts_with("riesz:")) {
    const std::string arg(text.substr(6));
    std::size_t used = 0;
    double s = 0.0;
    try {
      s = std::stod(arg, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != arg.size() || arg.empty()) {
      throw std::invalid_argument("cannot parse riesz exponent '" + arg + "'");
    }
    return riesz(s);
  }
  throw std::invalid_argument("unknown cost '" + std::string(text) +
                              "' (expected coulomb, riesz:s or log)");
}

std::string CostFunction::name() const {
  switch (kind_) {
    case Kind::coulomb:
      return "coulomb";
    case Kind::logarithmic:
      return "log";
    case Kind::riesz: {
      std::ostringstream os;
      os << "riesz:" << s_;
      return os.str();
    }
  }
  return {};
}

double CostFunction::operator()(double z) const {
  if (!(z > 0.0)) {
    return kInf;
  }
  switch (kind_) {
    case Kind::coulomb:
      return 1.0 / z;
    case Kind::riesz:
      return s_ == 1.0 ? 1.0 / z : std::pow(z, -s_);
    case Kind::logarithmic:
      return -std::log(z);
  }
  return kInf;
}

double CostFunction::inverse(double y) const {
  switch (kind_) {
    case Kind::coulomb:
      return y > 0.0 ? 1.0 / y : kInf;
    case Kind::riesz:
      return y > 0.0 ? std::pow(y, -1.0 / s_) : kInf;
    case Kind::logarithmic:
      return std::exp(-y);
  }
  return kInf;
}

std::optional<std::string> CostFunction::riesz_window_warning(std::size_t dim) const {
  if (kind_ != Kind::riesz) {
    return std::nullopt;
  }
  const double n = static_cast<double>(dim);
  const double lo = std::max(n - 2.0, 0.0);
  if (s_ <= n && s_ >= lo) {
    return std::nullopt;
  }
  std::ostringstream os;
  os << "riesz exponent " << s_ << " lies outside [" << lo << ", " << n
     << "] for dimension " << dim << "; solving anyway";
  return os.str();
}

ConditionFReport check_conditions_F(const CostFunction& f, double lo, double hi,
                                    std::size_t samples) {
  if (!(lo > 0.0) || !(hi > lo) || samples < 2) {
    throw std::invalid_argument("sampling range must satisfy 0 < lo < hi");
  }
  ConditionFReport r;
  const double step = std::log(hi / lo) / static_cast<double>(samples - 1);
  double prev = kInf;
  for (std::size_t k = 0; k < samples; ++k) {
    const double v = f(lo * std::exp(step * static_cast<double>(k)));
    if (!std::isfinite(v)) {
      r.finite = false;
    }
    if (k > 0 && !(v < prev)) {
      r.decreasing = false;
    }
    prev = v;
  }
  r.blows_up = f(1e-300) > 1e100 || f(1e-300) > f(lo) + 100.0;
  return r;
}

CostTensor::CostTensor(std::shared_ptr<const DiscreteSpace> space, CostFunction f, std::size_t N)
    : space_(std::move(space)), f_(f), N_(N) {
  if (!space_) {
    throw std::invalid_argument("cost tensor needs a space");
  }
  if (N_ < 2 || N_ > kMaxOrder) {
    throw std::invalid_argument("marginal count must be between 2 and 8");
  }
  const std::size_t M = space_->size();
  pair_.resize(M * M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      pair_[i * M + j] = i == j ? kInf : f_(space_->distance(i, j));
    }
  }
  std::size_t entries = 0;
  try {
    entries = checked_power(M, N_, kMaterializeBudget);
  } catch (const std::overflow_error&) {
    return;
  }
  dense_ = Tensor(M, N_);
  std::array<Index, kMaxOrder> buf{};
  std::span<Index> idx(buf.data(), N_);
  for (std::size_t flat = 0; flat < entries; ++flat) {
    dense_[flat] = evaluate(idx);
    next_index(idx, M);
  }
}

double CostTensor::evaluate(std::span<const Index> idx) const {
  const std::size_t M = extent();
  double c = 0.0;
  for (std::size_t s = 1; s < idx.size(); ++s) {
    for (std::size_t t = 0; t < s; ++t) {
      c += pair_[idx[t] * M + idx[s]];
    }
  }
  return c;
}

double CostTensor::operator()(std::span<const Index> idx) const {
  if (idx.size() != N_) {
    throw std::invalid_argument("index tuple has the wrong length");
  }
  for (Index i : idx) {
    if (i >= extent()) {
      throw std::out_of_range("index out of range");
    }
  }
  return materialized() ? dense_.at(idx) : evaluate(idx);
}

double CostTensor::at_flat(std::size_t flat) const {
  if (materialized()) {
    return dense_[flat];
  }
  std::array<Index, kMaxOrder> buf{};
  std::span<Index> idx(buf.data(), N_);
  std::size_t rest = flat;
  for (std::size_t k = N_; k-- > 0;) {
    idx[k] = rest % extent();
    rest /= extent();
  }
  return evaluate(idx);
}

double gibbs_kernel_entry(const CostTensor& ct, double eps, std::span<const Index> idx) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  const double c = ct(idx);
  if (c == kInf) {
    return 0.0;
  }
  double m = 1.0;
  for (Index i : idx) {
    m *= ct.space().ref_weight(i);
  }
  return std::exp(-c / eps) * m;
}

std::optional<double> alpha_bound(const CostFunction& f, double beta, std::size_t N) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("beta must be positive");
  }
  if (N < 2) {
    throw std::invalid_argument("N must be at least 2");
  }
  const double n = static_cast<double>(N);
  const double scale = n * n * (n - 1.0) / 2.0;
  switch (f.kind()) {
    case CostFunction::Kind::coulomb:
      return beta / scale;
    case CostFunction::Kind::riesz:
      return beta * std::pow(1.0 / scale, 1.0 / f.exponent());
    case CostFunction::Kind::logarithmic:
      if (beta >= 1.0) {
        return std::nullopt;
      }
      return std::exp(scale * std::log(beta));
  }
  return std::nullopt;
}

double diagonal_mass(const Coupling& gamma, double alpha) {
  if (!(alpha > 0.0)) {
    return 0.0;
  }
  const auto& space = gamma.space();
  const std::size_t N = gamma.order();
  const std::size_t M = space.size();
  std::vector<Index> idx(N, 0);
  std::vector<double> hits;
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] > 0.0) {
      bool near = false;
      for (std::size_t s = 1; s < N && !near; ++s) {
        for (std::size_t t = 0; t < s; ++t) {
          if (space.distance(idx[t], idx[s]) < alpha) {
            near = true;
            break;
          }
        }
      }
      if (near) {
        hits.push_back(data[flat]);
      }
    }
    next_index(idx, M);
  }
  return pairwise_sum(hits);
}

}  // namespace mmot
