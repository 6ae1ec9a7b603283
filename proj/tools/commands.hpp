#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "mmot/coupling.hpp"
#include "mmot/io.hpp"
#include "mmot/sinkhorn.hpp"

namespace mmot::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNotConverged = 2, kInfeasible = 3 };

/// Parses `args` (without the program name) and runs one subcommand.
/// Reports go to the --out file when given, else to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepRow {
  double eps = 0.0;
  double C0 = 0.0;
  double entropy = 0.0;
  double C_eps = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double marginal_error = 0.0;
  std::size_t support = 0;
  std::size_t iterations = 0;
  double wall_time = 0.0;
  bool converged = false;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  bool support_nonincreasing = true;
  bool support_strictly_decreasing = true;
  bool c0_nonincreasing = true;  ///< within 1e-4
  double final_entropy_ratio = 0.0;  ///< |eps E| / |C0| at the last eps
  bool all_converged = true;
};

/// Solves at each eps of a strictly decreasing list, warm-starting every
/// solve from the previous potential. `couplings`, when given, receives the
/// solutions in order.
SweepSummary run_sweep(const Density& rho, const CostTensor& ct, const ExperimentConfig& cfg,
                       std::vector<Coupling>* couplings = nullptr);

/// Number of entries with mass above `threshold`.
std::size_t support_size(const Coupling& gamma, double threshold);

/// Report document shared by solve and sweep.
ordered_json solve_report_json(const SolveReport& r, const CostTensor& ct,
                               double support_threshold);

}  // namespace mmot::cli
