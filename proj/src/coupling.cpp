#include "mmot/coupling.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmot/errors.hpp"
#include "mmot/sinkhorn.hpp"

namespace mmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> log_ref(const DiscreteSpace& space) {
  std::vector<double> out(space.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(space.ref_weight(i));
  }
  return out;
}

// Calls body(flat, log prod m) for every tuple in row-major order.
template <typename Body>
void for_each_tuple(const Coupling& gamma, Body&& body) {
  const auto lm = log_ref(gamma.space());
  const std::size_t M = gamma.extent();
  std::vector<Index> idx(gamma.order(), 0);
  const std::size_t n = gamma.mass().size();
  for (std::size_t flat = 0; flat < n; ++flat) {
    double s = 0.0;
    for (Index i : idx) {
      s += lm[i];
    }
    body(flat, s);
    next_index(idx, M);
  }
}

void check_shape(const Coupling& gamma, const CostTensor& ct) {
  if (gamma.order() != ct.order() || gamma.extent() != ct.extent()) {
    throw std::invalid_argument("coupling and cost tensor shapes differ");
  }
}

}  // namespace

Coupling::Coupling(std::shared_ptr<const DiscreteSpace> space, Tensor mass)
    : space_(std::move(space)), mass_(std::move(mass)) {
  if (!space_) {
    throw std::invalid_argument("coupling needs a space");
  }
  if (mass_.extent() != space_->size() || mass_.order() < 1) {
    throw std::invalid_argument("coupling extent does not match the space");
  }
  for (double v : mass_.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("coupling masses must be nonnegative and finite");
    }
  }
  const double t = total(mass_);
  if (std::abs(t - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "coupling has total mass " << t << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

Coupling Coupling::from_unnormalized(std::shared_ptr<const DiscreteSpace> space, Tensor mass) {
  const double t = total(mass);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("cannot normalize a coupling with zero or non-finite mass");
  }
  mass *= 1.0 / t;
  return Coupling(std::move(space), std::move(mass));
}

std::vector<double> marginal_masses(const Coupling& gamma, std::size_t axis) {
  if (axis >= gamma.order()) {
    throw std::out_of_range("marginal axis out of range");
  }
  return axis_sums(gamma.mass(), axis);
}

Density marginal(const Coupling& gamma, std::size_t axis) {
  auto w = marginal_masses(gamma, axis);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] /= gamma.space().ref_weight(i);
  }
  return Density::normalized(gamma.space_ptr(), std::move(w));
}

double marginal_error(const Coupling& gamma, const Density& rho) {
  if (rho.size() != gamma.extent()) {
    throw std::invalid_argument("density and coupling sizes differ");
  }
  const auto target = rho.masses();
  double worst = 0.0;
  for (std::size_t k = 0; k < gamma.order(); ++k) {
    const auto m = marginal_masses(gamma, k);
    std::vector<double> diff(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      diff[i] = std::abs(m[i] - target[i]);
    }
    worst = std::max(worst, pairwise_sum(diff));
  }
  return worst;
}

Coupling symmetrize(const Coupling& gamma) {
  return Coupling(gamma.space_ptr(), symmetrize(gamma.mass()));
}

CostParts cost_C0_parts(const Coupling& gamma, const CostTensor& ct) {
  check_shape(gamma, ct);
  PairwiseAccumulator pos;
  PairwiseAccumulator neg;
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] == 0.0) {
      continue;
    }
    const double c = ct.at_flat(flat);
    if (c == kInf) {
      return {kInf, 0.0};
    }
    if (c < 0.0) {
      neg.add(c * data[flat]);
    } else {
      pos.add(c * data[flat]);
    }
  }
  return {pos.value(), neg.value()};
}

double cost_C0(const Coupling& gamma, const CostTensor& ct) {
  check_shape(gamma, ct);
  PairwiseAccumulator acc;
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] == 0.0) {
      continue;
    }
    const double c = ct.at_flat(flat);
    if (c == kInf) {
      return kInf;
    }
    acc.add(c * data[flat]);
  }
  return acc.value();
}

double entropy(const Coupling& gamma) {
  PairwiseAccumulator acc;
  const auto data = gamma.mass().data();
  for_each_tuple(gamma, [&](std::size_t flat, double log_m) {
    const double v = data[flat];
    if (v > 0.0) {
      acc.add(v * (std::log(v) - log_m));
    }
  });
  return acc.value();
}

double cost_Ceps(const Coupling& gamma, const CostTensor& ct, double eps) {
  if (!(eps >= 0.0)) {
    throw std::invalid_argument("eps must be nonnegative");
  }
  const double c0 = cost_C0(gamma, ct);
  return eps == 0.0 ? c0 : c0 + eps * entropy(gamma);
}

double kl(const Coupling& gamma, const Tensor& ref) {
  if (ref.extent() != gamma.extent() || ref.order() != gamma.order()) {
    throw std::invalid_argument("reference measure has the wrong shape");
  }
  PairwiseAccumulator acc;
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    const double v = data[flat];
    if (v == 0.0) {
      continue;
    }
    if (!(ref[flat] > 0.0)) {
      return kInf;
    }
    acc.add(v * (std::log(v) - std::log(ref[flat])));
  }
  return acc.value();
}

double kl_gibbs(const Coupling& gamma, const CostTensor& ct, double eps) {
  check_shape(gamma, ct);
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  PairwiseAccumulator acc;
  bool infinite = false;
  const auto data = gamma.mass().data();
  for_each_tuple(gamma, [&](std::size_t flat, double log_m) {
    const double v = data[flat];
    if (v == 0.0 || infinite) {
      return;
    }
    const double c = ct.at_flat(flat);
    if (c == kInf) {
      infinite = true;
      return;
    }
    acc.add(v * (std::log(v) + c / eps - log_m));
  });
  return infinite ? kInf : acc.value();
}

Coupling product_coupling(const Density& rho, std::size_t N) {
  if (N < 1) {
    throw std::invalid_argument("N must be positive");
  }
  checked_power(rho.size(), N);
  Tensor t(rho.size(), N);
  const std::vector<std::vector<double>> factors(N, rho.masses());
  add_outer_product(t, factors);
  return Coupling::from_unnormalized(rho.space_ptr(), std::move(t));
}

ReferenceChangeResult reference_change_check(const Density& rho, const CostTensor& ct, double eps,
                                             const SinkhornConfig& base) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  const auto& space = rho.space();
  auto rm = rho.masses();
  for (double v : rm) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("reference change needs a strictly positive density");
    }
  }
  auto space_rho = std::make_shared<const DiscreteSpace>(space.with_ref_weights(rm));
  const Density one(space_rho, std::vector<double>(rho.size(), 1.0));
  const CostTensor ct_rho(space_rho, ct.function(), ct.order());

  SinkhornConfig cfg = base;
  cfg.eps = eps;
  const SolveReport a = solve_symmetric(rho, ct, cfg);
  const SolveReport b = solve_symmetric(one, ct_rho, cfg);

  ReferenceChangeResult r;
  r.converged = a.converged && b.converged;
  if (!r.converged) {
    throw ConvergenceError("reference change check: a solve did not converge");
  }
  r.value_m = a.primal;
  r.value_rho = b.primal;
  r.correction = static_cast<double>(ct.order()) * eps * entropy_of_density(rho);
  r.residual = std::abs(r.value_m - r.value_rho - r.correction);
  std::vector<double> diff(a.coupling.mass().size());
  for (std::size_t k = 0; k < diff.size(); ++k) {
    diff[k] = std::abs(a.coupling.mass()[k] - b.coupling.mass()[k]);
  }
  r.tv = 0.5 * pairwise_sum(diff);
  return r;
}

}  // namespace mmot
