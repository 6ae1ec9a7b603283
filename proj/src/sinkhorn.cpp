#include "mmot/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmot/errors.hpp"
#include "mmot/parallel.hpp"

namespace mmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Terms more than kCutoff below the row maximum contribute below one part in
// 1e21 each and are skipped in the iteration (never in reported values).
constexpr double kCutoff = 48.0;

double lse_buffer(std::span<const double> b, bool truncate) {
  double mx = -kInf;
  for (double v : b) {
    mx = v > mx ? v : mx;
  }
  if (mx == -kInf) {
    return -kInf;
  }
  double s = 0.0;
  if (truncate) {
    const double floor = mx - kCutoff;
    for (double v : b) {
      if (v > floor) {
        s += std::exp(v - mx);
      }
    }
  } else {
    for (double v : b) {
      s += std::exp(v - mx);
    }
  }
  return mx + std::log(s);
}

// out[i] = log sum_{j_1..j_{N-1}} exp(w_{j_1} + ... + w_{j_{N-1}} - c(i, j_1, ...) / eps),
// i.e. the conditional log-partition of slot 0. Each row is reduced
// sequentially, so results do not depend on the thread count.
void row_lse(const CostTensor& ct, std::span<const double> w, double inv,
             std::span<double> out, bool truncate) {
  const std::size_t M = ct.extent();
  const std::size_t N = ct.order();
  if (N == 2) {
    parallel_for(M, M, [&](std::size_t begin, std::size_t end) {
      std::vector<double> buf(M);
      for (std::size_t i = begin; i < end; ++i) {
        const auto p = ct.pair_row(i);
        for (std::size_t j = 0; j < M; ++j) {
          buf[j] = w[j] - p[j] * inv;
        }
        out[i] = lse_buffer(buf, truncate);
      }
    });
    return;
  }
  if (N == 3) {
    parallel_for(M, M * M, [&](std::size_t begin, std::size_t end) {
      std::vector<double> buf(M * M);
      for (std::size_t i = begin; i < end; ++i) {
        const auto pi = ct.pair_row(i);
        for (std::size_t j = 0; j < M; ++j) {
          const auto pj = ct.pair_row(j);
          const double pij = pi[j];
          const double wj = w[j];
          double* row = buf.data() + j * M;
          for (std::size_t k = 0; k < M; ++k) {
            row[k] = (wj + w[k]) - ((pij + pi[k]) + pj[k]) * inv;
          }
        }
        out[i] = lse_buffer(buf, truncate);
      }
    });
    return;
  }
  const std::size_t block = checked_power(M, N - 1);
  parallel_for(M, block, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(block);
    std::vector<Index> rest(N - 1, 0);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t r = 0; r < block; ++r) {
        double s = 0.0;
        for (Index j : rest) {
          s += w[j];
        }
        buf[r] = s - ct.at_flat(i * block + r) * inv;
        next_index(rest, M);
      }
      out[i] = lse_buffer(buf, truncate);
    }
  });
}

void check_inputs(const Density& rho, const CostTensor& ct) {
  if (rho.size() != ct.extent()) {
    throw std::invalid_argument("density and cost tensor live on spaces of different size");
  }
}

std::vector<double> scaled_logs(std::span<const double> u, const DiscreteSpace& space,
                                double inv) {
  std::vector<double> w(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    w[j] = u[j] * inv + std::log(space.ref_weight(j));
  }
  return w;
}

struct StageResult {
  std::size_t iterations = 0;
  double error = kInf;
  double log_z = 0.0;
  bool converged = false;
};

// The first-order part of the primal-dual gap, N sum (u - mean u)(mu - rho m),
// is what can make the reported gap negative at a finite tolerance.
double gap_first_order(std::span<const double> u, std::span<const double> lmass, double log_z,
                       std::span<const double> target, std::size_t N) {
  double mean = 0.0;
  for (double v : u) {
    mean += v;
  }
  mean /= static_cast<double>(u.size());
  std::vector<double> terms(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    terms[i] = (u[i] - mean) * (std::exp(lmass[i] - log_z) - target[i]);
  }
  return static_cast<double>(N) * pairwise_sum(terms);
}

StageResult run_stage(std::vector<double>& u, const Density& rho, const CostTensor& ct,
                      double eps, double tol, std::size_t max_iter, double theta, bool certify) {
  const std::size_t M = ct.extent();
  const std::size_t N = ct.order();
  const double inv = 1.0 / eps;
  const auto target = rho.masses();
  std::vector<double> log_rho(M);
  for (std::size_t i = 0; i < M; ++i) {
    log_rho[i] = std::log(rho.weight(i));
  }
  std::vector<double> out(M);
  std::vector<double> lmass(M);
  std::vector<double> diff(M);
  StageResult r;
  for (std::size_t it = 0; it <= max_iter; ++it) {
    const auto w = scaled_logs(u, ct.space(), inv);
    row_lse(ct, w, inv, out, true);
    for (std::size_t i = 0; i < M; ++i) {
      if (out[i] == -kInf) {
        std::ostringstream os;
        os << "point " << i << " has no finite-cost partner tuple";
        throw InfeasibleError(os.str());
      }
      lmass[i] = w[i] + out[i];
      diff[i] = std::abs(std::exp(lmass[i]) - target[i]);
    }
    r.error = pairwise_sum(diff);
    r.iterations = it;
    if (!std::isfinite(r.error)) {
      break;
    }
    if (r.error <= tol) {
      r.log_z = log_sum_exp(lmass);
      // At a finite tolerance the recovered plan is slightly infeasible and
      // the gap can dip below zero; keep iterating until it does not.
      double normalized = 0.0;
      if (certify) {
        for (std::size_t i = 0; i < M; ++i) {
          diff[i] = std::abs(std::exp(lmass[i] - r.log_z) - target[i]);
        }
        normalized = pairwise_sum(diff);
      }
      if (!certify ||
          (normalized <= tol && gap_first_order(u, lmass, r.log_z, target, N) >= -1e-10)) {
        r.converged = true;
        return r;
      }
    }
    if (it == max_iter) {
      break;
    }
    for (std::size_t i = 0; i < M; ++i) {
      u[i] += theta * eps * (log_rho[i] - (u[i] * inv + out[i]));
    }
  }
  r.log_z = log_sum_exp(lmass);
  return r;
}

}  // namespace

void SinkhornConfig::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("eps must be positive and finite");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tol must be positive");
  }
  if (damping && !(*damping > 0.0 && *damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }
  if (max_iter == 0) {
    throw std::invalid_argument("max_iter must be positive");
  }
  if (eps_scaling && !(scaling_start > 0.0)) {
    throw std::invalid_argument("scaling start must be positive");
  }
}

SolveReport solve_symmetric(const Density& rho, const CostTensor& ct, const SinkhornConfig& cfg) {
  cfg.validate();
  check_inputs(rho, ct);
  const std::size_t M = ct.extent();
  const std::size_t N = ct.order();
  for (std::size_t i = 0; i < M; ++i) {
    if (!(rho.weight(i) > 0.0)) {
      throw std::invalid_argument("density must be strictly positive for the solver");
    }
  }
  std::vector<double> u(M, 0.0);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != M) {
      throw std::invalid_argument("warm-start potential has the wrong length");
    }
    u = *cfg.warm_start;
    for (double v : u) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("warm-start potential must be finite");
      }
    }
  }

  std::vector<double> stages;
  if (cfg.eps_scaling) {
    for (double e = cfg.scaling_start; e > cfg.eps; e *= 0.5) {
      stages.push_back(e);
    }
  }
  stages.push_back(cfg.eps);

  const double theta = cfg.theta(N);
  std::size_t iterations = 0;
  StageResult last;
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    const double tol = std::max(cfg.tol, cfg.scaling_tol);
    last = run_stage(u, rho, ct, stages[s], tol, cfg.max_iter, theta, false);
    iterations += last.iterations;
  }

  // The stopping test sees the marginals through the truncated reduction; if
  // the exact error of the recovered plan still exceeds tol, tighten and go on.
  std::size_t budget = cfg.max_iter;
  double tol = cfg.tol;
  for (int attempt = 0;; ++attempt) {
    last = run_stage(u, rho, ct, cfg.eps, tol, budget, theta, true);
    iterations += last.iterations;
    budget -= std::min(budget, last.iterations);
    const double shift = -cfg.eps * last.log_z / static_cast<double>(N);
    if (std::isfinite(shift)) {
      for (double& v : u) {
        v += shift;
      }
    }
    if (!last.converged || attempt == 3 || budget == 0) {
      break;
    }
    const Coupling check =
        Coupling::from_unnormalized(ct.space_ptr(), primal_from_potential(u, ct, cfg.eps));
    if (marginal_error(check, rho) <= cfg.tol) {
      break;
    }
    tol *= 0.5;
  }

  Coupling gamma = Coupling::from_unnormalized(ct.space_ptr(), primal_from_potential(u, ct, cfg.eps));
  SolveReport r{std::move(gamma), Potential{ct.space_ptr(), u}};
  r.iterations = iterations;
  r.eps = cfg.eps;
  r.normalization_defect = std::abs(std::expm1(last.log_z));
  r.marginal_error = marginal_error(r.coupling, rho);
  r.converged = last.converged && r.marginal_error <= cfg.tol;
  r.primal = cost_Ceps(r.coupling, ct, cfg.eps);
  r.dual = dual_objective(u, rho, ct, cfg.eps);
  r.gap = r.primal - r.dual;
  return r;
}

double dual_objective(std::span<const double> u, const Density& rho, const CostTensor& ct,
                      double eps) {
  check_inputs(rho, ct);
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  if (u.size() != ct.extent()) {
    throw std::invalid_argument("potential has the wrong length");
  }
  const std::size_t M = ct.extent();
  const double inv = 1.0 / eps;
  const auto w = scaled_logs(u, ct.space(), inv);
  std::vector<double> out(M);
  row_lse(ct, w, inv, out, false);
  for (std::size_t i = 0; i < M; ++i) {
    out[i] += w[i];
  }
  const double log_z = log_sum_exp(out);
  std::vector<double> lin(M);
  const auto target = rho.masses();
  for (std::size_t i = 0; i < M; ++i) {
    lin[i] = u[i] * target[i];
  }
  return static_cast<double>(ct.order()) * pairwise_sum(lin) - eps * std::exp(log_z) + eps;
}

double dual_objective_multi(std::span<const std::vector<double>> us, const Density& rho,
                            const CostTensor& ct, double eps) {
  check_inputs(rho, ct);
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  const std::size_t N = ct.order();
  const std::size_t M = ct.extent();
  if (us.size() != N) {
    throw std::invalid_argument("need one potential per marginal");
  }
  const double inv = 1.0 / eps;
  std::vector<std::vector<double>> w;
  const auto target = rho.masses();
  std::vector<double> lin;
  for (const auto& u : us) {
    if (u.size() != M) {
      throw std::invalid_argument("potential has the wrong length");
    }
    w.push_back(scaled_logs(u, ct.space(), inv));
    for (std::size_t i = 0; i < M; ++i) {
      lin.push_back(u[i] * target[i]);
    }
  }
  const std::size_t total_entries = checked_power(M, N);
  std::vector<double> exponents(total_entries);
  std::vector<Index> idx(N, 0);
  for (std::size_t flat = 0; flat < total_entries; ++flat) {
    double s = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      s += w[k][idx[k]];
    }
    exponents[flat] = s - ct.at_flat(flat) * inv;
    next_index(idx, M);
  }
  return pairwise_sum(lin) - eps * std::exp(log_sum_exp(exponents)) + eps;
}

Tensor primal_from_potential(std::span<const double> u, const CostTensor& ct, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  const std::size_t M = ct.extent();
  const std::size_t N = ct.order();
  if (u.size() != M) {
    throw std::invalid_argument("potential has the wrong length");
  }
  const double inv = 1.0 / eps;
  const auto w = scaled_logs(u, ct.space(), inv);
  Tensor t(M, N);
  if (N == 2) {
    for (std::size_t i = 0; i < M; ++i) {
      const auto p = ct.pair_row(i);
      for (std::size_t j = 0; j < M; ++j) {
        t[i * M + j] = std::exp((w[i] + w[j]) - p[j] * inv);
      }
    }
    return t;
  }
  std::vector<Index> idx(N, 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    double s = 0.0;
    for (Index i : idx) {
      s += w[i];
    }
    t[flat] = std::exp(s - ct.at_flat(flat) * inv);
    next_index(idx, M);
  }
  return t;
}

}  // namespace mmot
