#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "mmot/blockapprox.hpp"
#include "mmot/errors.hpp"
#include "mmot/oracle1d.hpp"
#include "mmot/parallel.hpp"

namespace mmot::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void emit(const ordered_json& j, const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.out) {
    write_json(*cfg.out, j);
  } else {
    out << j.dump(2) << '\n';
  }
}

std::string indexed_path(const std::string& path, std::size_t k) {
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  const std::string tag = "_" + std::to_string(k);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + tag;
  }
  return path.substr(0, dot) + tag + path.substr(dot);
}

ordered_json cost_warnings(const CostFunction& f, const Coupling& gamma, const CostTensor& ct) {
  ordered_json w = ordered_json::array();
  if (auto msg = f.riesz_window_warning(gamma.space().dim())) {
    w.push_back(*msg);
  }
  const auto parts = cost_C0_parts(gamma, ct);
  if (parts.negative < 0.0) {
    w.push_back("cost sums a negative tail of " + std::to_string(parts.negative));
  }
  return w;
}

std::vector<double> load_potential(const std::string& path, std::size_t M) {
  std::vector<double> u;
  try {
    u = read_potential_json(path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad potential file '" + path + "': " + e.what());
  }
  if (u.size() != M) {
    throw ConfigError("potential in '" + path + "' has " + std::to_string(u.size()) +
                      " entries, the space has " + std::to_string(M));
  }
  return u;
}

Coupling load_coupling(const std::string& path, const Density& rho, std::size_t N) {
  Coupling gamma = read_coupling_csv(path, rho.space_ptr());
  if (gamma.order() != N) {
    throw ConfigError("coupling in '" + path + "' has " + std::to_string(gamma.order()) +
                      " marginals, expected " + std::to_string(N));
  }
  return gamma;
}

double l1_distance(const Coupling& a, const Coupling& b) {
  std::vector<double> d(a.mass().size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = std::abs(a.mass()[k] - b.mass()[k]);
  }
  return pairwise_sum(d);
}

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const Density rho = cfg.density();
  const CostFunction f = cfg.cost_function();
  const CostTensor ct(rho.space_ptr(), f, cfg.N);
  SinkhornConfig scfg = cfg.solver(cfg.eps_value());
  if (cfg.warm_start) {
    scfg.warm_start = load_potential(*cfg.warm_start, rho.size());
  }
  const auto t0 = Clock::now();
  const SolveReport r = solve_symmetric(rho, ct, scfg);
  const double wall = seconds_since(t0);

  ordered_json j = solve_report_json(r, ct, cfg.support_threshold);
  j["warnings"] = cost_warnings(f, r.coupling, ct);
  if (cfg.coupling_csv) {
    write_coupling_csv(*cfg.coupling_csv, r.coupling, cfg.dump_threshold);
    j["coupling_csv"] = *cfg.coupling_csv;
  }
  if (cfg.potential_out) {
    write_potential_json(*cfg.potential_out, r.potential.values, r.eps);
    j["potential"] = *cfg.potential_out;
  }
  j["wall_time_s"] = wall;
  emit(j, cfg, out);
  if (!r.converged) {
    err << "solver did not converge within " << cfg.max_iter
        << " iterations per stage (marginal error " << r.marginal_error << ")\n";
    return kNotConverged;
  }
  return kOk;
}

void write_sweep_csv(const std::string& path, const SweepSummary& s) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  f << "eps,C0,entropy,C_eps,dual,gap,marginal_error,support_size,iterations,wall_time_s,converged\n";
  char buf[512];
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%.6f,%d\n",
                  r.eps, r.C0, r.entropy, r.C_eps, r.dual, r.gap, r.marginal_error, r.support,
                  r.iterations, r.wall_time, r.converged ? 1 : 0);
    f << buf;
  }
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.eps_list.empty()) {
    throw ConfigError("sweep needs --eps-list (or --preset figure1)");
  }
  const Density rho = cfg.density();
  const CostTensor ct(rho.space_ptr(), cfg.cost_function(), cfg.N);
  std::vector<Coupling> couplings;
  const SweepSummary s = run_sweep(rho, ct, cfg, cfg.coupling_csv ? &couplings : nullptr);

  ordered_json rows = ordered_json::array();
  for (const auto& r : s.rows) {
    ordered_json row;
    row["eps"] = r.eps;
    row["C0"] = r.C0;
    row["entropy"] = r.entropy;
    row["C_eps"] = r.C_eps;
    row["dual"] = r.dual;
    row["gap"] = r.gap;
    row["marginal_error"] = r.marginal_error;
    row["support_size"] = r.support;
    row["iterations"] = r.iterations;
    row["converged"] = r.converged;
    row["wall_time_s"] = r.wall_time;
    rows.push_back(row);
  }
  ordered_json j;
  j["command"] = "sweep";
  j["N"] = cfg.N;
  j["M"] = rho.size();
  j["cost"] = ct.function().name();
  j["support_threshold"] = cfg.support_threshold;
  j["rows"] = rows;
  ordered_json d;
  d["support_nonincreasing"] = s.support_nonincreasing;
  d["support_strictly_decreasing"] = s.support_strictly_decreasing;
  d["c0_nonincreasing"] = s.c0_nonincreasing;
  d["final_entropy_ratio"] = s.final_entropy_ratio;
  d["all_converged"] = s.all_converged;
  j["summary"] = d;
  if (cfg.csv) {
    write_sweep_csv(*cfg.csv, s);
    j["csv"] = *cfg.csv;
  }
  if (cfg.coupling_csv) {
    ordered_json files = ordered_json::array();
    for (std::size_t k = 0; k < couplings.size(); ++k) {
      const auto path = indexed_path(*cfg.coupling_csv, k);
      write_coupling_csv(path, couplings[k], cfg.dump_threshold);
      files.push_back(path);
    }
    j["coupling_csv"] = files;
  }
  emit(j, cfg, out);
  if (!s.all_converged) {
    for (const auto& r : s.rows) {
      if (!r.converged) {
        err << "eps = " << r.eps << " did not converge (marginal error " << r.marginal_error
            << ")\n";
      }
    }
    return kNotConverged;
  }
  return kOk;
}

int cmd_oracle(const ExperimentConfig& cfg, const std::string& compare, std::ostream& out) {
  const Density rho = cfg.density();
  const CostTensor ct(rho.space_ptr(), cfg.cost_function(), cfg.N);
  const Coupling plan = induced_plan(rho, cfg.N);
  const double c0 = cost_C0(plan, ct);

  ordered_json j;
  j["command"] = "oracle";
  j["N"] = cfg.N;
  j["M"] = rho.size();
  j["cost"] = ct.function().name();
  j["oracle_cost"] = c0;
  j["entropy"] = entropy(plan);
  j["marginal_error"] = marginal_error(plan, rho);
  j["support_size"] = support_size(plan, 0.0);
  if (cfg.coupling_csv) {
    write_coupling_csv(*cfg.coupling_csv, plan, cfg.dump_threshold);
    j["coupling_csv"] = *cfg.coupling_csv;
  }
  if (!compare.empty()) {
    std::string csv = compare;
    if (compare.size() < 4 || compare.substr(compare.size() - 4) != ".csv") {
      const auto report = read_json(compare);
      if (!report.contains("coupling_csv") || !report.at("coupling_csv").is_string()) {
        throw ConfigError("solve report '" + compare + "' names no coupling_csv");
      }
      csv = report.at("coupling_csv").get<std::string>();
    }
    const Coupling other = load_coupling(csv, rho, cfg.N);
    const double other_c0 = cost_C0(other, ct);
    ordered_json c;
    c["coupling_csv"] = csv;
    c["l1_distance"] = l1_distance(plan, other);
    c["C0"] = other_c0;
    c["cost_gap"] = other_c0 - c0;
    j["comparison"] = c;
  }
  emit(j, cfg, out);
  return kOk;
}

int cmd_duality(const ExperimentConfig& cfg, const std::string& coupling_path,
                const std::string& potential_path, double marginal_tol, std::ostream& out) {
  const Density rho = cfg.density();
  const CostTensor ct(rho.space_ptr(), cfg.cost_function(), cfg.N);
  const Coupling gamma = load_coupling(coupling_path, rho, cfg.N);
  const auto u = load_potential(potential_path, rho.size());
  double eps = cfg.eps_value();
  if (!cfg.eps) {
    const auto pj = read_json(potential_path);
    if (pj.is_object() && pj.contains("eps") && pj.at("eps").is_number()) {
      eps = pj.at("eps").get<double>();
    }
  }
  const double merr = marginal_error(gamma, rho);
  const double primal = cost_Ceps(gamma, ct, eps);
  const double dual = dual_objective(u, rho, ct, eps);
  const bool applicable = merr <= marginal_tol;

  ordered_json j;
  j["command"] = "duality";
  j["eps"] = eps;
  j["N"] = cfg.N;
  j["M"] = rho.size();
  j["marginal_error"] = merr;
  j["marginal_tolerance"] = marginal_tol;
  j["applicable"] = applicable;
  j["primal"] = primal;
  j["dual"] = dual;
  j["gap"] = primal - dual;
  if (!applicable) {
    j["verdict"] = "inapplicable";
  } else {
    j["verdict"] = primal - dual >= -1e-9 ? "weak duality holds" : "weak duality violated";
  }
  emit(j, cfg, out);
  return kOk;
}

ordered_json indices(const std::vector<Index>& v) { return ordered_json(v); }

int cmd_block_approx(const ExperimentConfig& cfg, const std::string& input, std::size_t n,
                     std::size_t max_n, std::ostream& out, std::ostream& err) {
  if (n == 0) {
    throw ConfigError("-n must be positive");
  }
  const Density rho = cfg.density();
  const CostTensor ct(rho.space_ptr(), cfg.cost_function(), cfg.N);
  const Coupling gamma = load_coupling(input, rho, cfg.N);

  ordered_json j;
  j["command"] = "block-approx";
  j["n"] = n;
  try {
    const BlockApproxResult res = block_approximation(gamma, ct, n);
    const auto& s = res.schedule;
    j["feasible"] = true;
    ordered_json sj;
    sj["r"] = s.r;
    sj["eps"] = s.eps;
    sj["delta"] = s.delta;
    sj["lambda"] = s.lambda;
    sj["anchor_x"] = indices(s.x);
    sj["anchor_x_prime"] = indices(s.x_prime);
    sj["mass_B"] = s.mass_B;
    sj["mass_B_prime"] = s.mass_B_prime;
    sj["K_size"] = s.K.size();
    sj["diam_K"] = s.diam_K;
    sj["blocks"] = s.blocks.size();
    j["schedule"] = sj;
    j["marginal_error"] = res.marginal_error;
    j["symmetry_defect"] = res.symmetry_defect;
    j["remainder_mass"] = res.remainder_mass;
    j["remainder_bound"] = 3.0 * s.eps;
    j["discarded_mass"] = res.discarded_mass;
    j["separation_coupled"] = res.separation_coupled;
    j["separation_coupled_bound"] = 0.4 * s.r;
    j["separation_reserve"] = res.separation_reserve;
    j["separation_reserve_bound"] = 0.8 * s.r;
    j["cost_original"] = res.cost_original;
    j["cost_approx"] = res.cost_approx;
    j["cost_gap"] = res.cost_gap;
    j["core_truncation"] = res.core_truncation;
    j["cost_bound"] = res.cost_bound;
    j["entropy"] = res.entropy;
    j["entropy_bound"] = res.entropy_bound;
    j["pieces"] = res.pieces;
    const auto before = test_function_integrals(gamma);
    const auto after = test_function_integrals(res.coupling);
    ordered_json dev = ordered_json::array();
    for (std::size_t k = 0; k < before.size(); ++k) {
      dev.push_back(std::abs(after[k] - before[k]));
    }
    j["test_function_deviation"] = dev;
    if (cfg.coupling_csv) {
      write_coupling_csv(*cfg.coupling_csv, res.coupling, cfg.dump_threshold);
      j["coupling_csv"] = *cfg.coupling_csv;
    }
    emit(j, cfg, out);
    return kOk;
  } catch (const InfeasibleError& e) {
    const auto suggestion = n < max_n ? smallest_feasible_n(gamma, ct, n + 1, max_n)
                                      : std::optional<std::size_t>{};
    j["feasible"] = false;
    j["reason"] = e.what();
    j["suggested_n"] = suggestion ? ordered_json(*suggestion) : ordered_json(nullptr);
    emit(j, cfg, out);
    err << "construction infeasible at n = " << n << ": " << e.what() << '\n';
    if (suggestion) {
      err << "smallest feasible n up to " << max_n << ": " << *suggestion << '\n';
    } else {
      err << "no feasible n up to " << max_n << '\n';
    }
    return kInfeasible;
  }
}

int cmd_check_conditions(const ExperimentConfig& cfg, const std::vector<double>& radii,
                         double r0, long origin_arg, std::ostream& out) {
  const Density rho = cfg.density();
  const CostFunction f = cfg.cost_function();
  const auto& space = rho.space();
  const auto probes = radii.empty() ? default_condition_A_radii() : radii;
  const ConditionAReport a = check_condition_A(rho, cfg.N, probes);

  ordered_json j;
  j["command"] = "check-conditions";
  j["N"] = cfg.N;
  j["M"] = rho.size();
  j["cost"] = f.name();
  ordered_json ja;
  ja["threshold"] = a.threshold;
  ja["max_atom_mass"] = a.max_atom_mass;
  ja["atoms_ok"] = a.atoms_ok;
  ja["ok"] = a.ok();
  ja["beta"] = a.beta ? ordered_json(*a.beta) : ordered_json(nullptr);
  ordered_json pj = ordered_json::array();
  for (const auto& p : a.probes) {
    ordered_json q;
    q["radius"] = p.radius;
    q["max_ball_mass"] = p.max_ball_mass;
    q["margin"] = a.threshold - p.max_ball_mass;
    q["admissible"] = p.admissible;
    pj.push_back(q);
    if (a.beta && p.radius == *a.beta) {
      ja["margin"] = a.threshold - p.max_ball_mass;
    }
  }
  ja["probes"] = pj;
  j["condition_A"] = ja;

  const Index origin = origin_arg < 0 ? central_index(rho) : static_cast<Index>(origin_arg);
  if (origin >= rho.size()) {
    throw ConfigError("--origin out of range");
  }
  ordered_json jb;
  jb["origin"] = origin;
  jb["r0"] = r0;
  jb["value"] = check_condition_B(rho, f, origin, r0);
  j["condition_B"] = jb;

  double dmin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < space.size(); ++i) {
    for (Index k = i + 1; k < space.size(); ++k) {
      dmin = std::min(dmin, space.distance(i, k));
    }
  }
  ordered_json warnings = ordered_json::array();
  ordered_json jf;
  if (std::isfinite(dmin)) {
    const double hi = 2.0 * space.diameter();
    const ConditionFReport fr = check_conditions_F(f, dmin, hi);
    jf["lo"] = dmin;
    jf["hi"] = hi;
    jf["finite"] = fr.finite;
    jf["decreasing"] = fr.decreasing;
    jf["blows_up"] = fr.blows_up;
    jf["ok"] = fr.ok();
    if (f.kind() == CostFunction::Kind::logarithmic && space.diameter() > 1.0) {
      warnings.push_back("log cost is negative beyond distance 1; condition B controls the tail");
    }
  }
  j["conditions_F"] = jf;
  if (a.beta) {
    const auto alpha = alpha_bound(f, *a.beta, cfg.N);
    j["alpha_bound"] = alpha ? ordered_json(*alpha) : ordered_json(nullptr);
    if (!alpha) {
      warnings.push_back("alpha bound inapplicable: f(beta) <= 0");
    }
  }
  if (auto msg = f.riesz_window_warning(space.dim())) {
    warnings.push_back(*msg);
  }
  j["warnings"] = warnings;
  emit(j, cfg, out);
  return kOk;
}

/// Flags common to every subcommand; applied on top of --preset and --config.
struct Flags {
  std::string preset, config, pdf, interval, space, cost, eps_list, warm_start, out, coupling_csv,
      potential_out, csv;
  std::size_t grid = 0, N = 0, max_iter = 0, threads = 0;
  double eps = 0, tol = 0, damping = 0, dump_threshold = 0, support_threshold = 0;
  bool no_scaling = false;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> setters;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* config_opt = nullptr;

  template <class T>
  void add(CLI::App* app, const std::string& name, T& slot, const std::string& help,
           std::function<void(ExperimentConfig&)> apply) {
    setters.emplace_back(app->add_option(name, slot, help), std::move(apply));
  }

  void attach(CLI::App* app) {
    preset_opt = app->add_option("--preset", preset, "named parameter set (figure1)");
    config_opt = app->add_option("--config", config, "JSON config file; flags win");
    add(app, "--grid", grid, "grid size M", [this](auto& c) { c.grid = grid; });
    add(app, "--interval", interval, "truncation interval a,b",
        [this](auto& c) { c.interval = parse_interval(interval); });
    add(app, "--pdf", pdf, "gaussian:mu,sigma | uniform | tabulated:path",
        [this](auto& c) { c.pdf = pdf; });
    add(app, "--space", space, "JSON space document (replaces the grid)",
        [this](auto& c) { c.space_path = space; });
    add(app, "--cost", cost, "coulomb | riesz:s | log", [this](auto& c) { c.cost = cost; });
    add(app, "-N", N, "number of marginals", [this](auto& c) { c.N = N; });
    add(app, "--eps", eps, "regularization", [this](auto& c) { c.eps = eps; });
    add(app, "--eps-list", eps_list, "decreasing list e1,e2,...",
        [this](auto& c) { c.eps_list = parse_list(eps_list); });
    add(app, "--tol", tol, "L1 marginal tolerance", [this](auto& c) { c.tol = tol; });
    add(app, "--max-iter", max_iter, "iteration cap per stage",
        [this](auto& c) { c.max_iter = max_iter; });
    add(app, "--damping", damping, "step size in (0, 1]", [this](auto& c) { c.damping = damping; });
    add(app, "--warm-start", warm_start, "initial potential (JSON)",
        [this](auto& c) { c.warm_start = warm_start; });
    add(app, "--out", out, "report path (default stdout)", [this](auto& c) { c.out = out; });
    add(app, "--coupling-csv", coupling_csv, "coupling dump path",
        [this](auto& c) { c.coupling_csv = coupling_csv; });
    add(app, "--potential-out", potential_out, "potential dump path",
        [this](auto& c) { c.potential_out = potential_out; });
    add(app, "--csv", csv, "sweep table path", [this](auto& c) { c.csv = csv; });
    add(app, "--dump-threshold", dump_threshold, "smallest dumped mass",
        [this](auto& c) { c.dump_threshold = dump_threshold; });
    add(app, "--support-threshold", support_threshold, "mass counted as support",
        [this](auto& c) { c.support_threshold = support_threshold; });
    add(app, "--threads", threads, "worker cap", [this](auto& c) { c.threads = threads; });
    setters.emplace_back(app->add_flag("--no-scaling", no_scaling, "disable eps-scaling"),
                         [](auto& c) { c.eps_scaling = false; });
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (preset_opt->count() > 0) {
      c.apply_preset(preset);
    }
    if (config_opt->count() > 0) {
      try {
        c.apply_json(read_json(config));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    for (const auto& [opt, apply] : setters) {
      if (opt->count() > 0) {
        apply(c);
      }
    }
    c.validate();
    return c;
  }
};

}  // namespace

std::size_t support_size(const Coupling& gamma, double threshold) {
  std::size_t n = 0;
  for (double v : gamma.mass().data()) {
    n += v > threshold ? 1 : 0;
  }
  return n;
}

ordered_json solve_report_json(const SolveReport& r, const CostTensor& ct,
                               double support_threshold) {
  ordered_json j;
  j["command"] = "solve";
  j["eps"] = r.eps;
  j["N"] = ct.order();
  j["M"] = ct.extent();
  j["cost"] = ct.function().name();
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["marginal_error"] = r.marginal_error;
  const double c0 = cost_C0(r.coupling, ct);
  const double e = entropy(r.coupling);
  j["C0"] = c0;
  j["entropy"] = e;
  j["C_eps"] = r.primal;
  j["dual"] = r.dual;
  j["gap"] = r.gap;
  j["normalization_defect"] = r.normalization_defect;
  j["support_threshold"] = support_threshold;
  j["support_size"] = support_size(r.coupling, support_threshold);
  j["marginal"] = marginal(r.coupling, 0).weights();
  return j;
}

SweepSummary run_sweep(const Density& rho, const CostTensor& ct, const ExperimentConfig& cfg,
                       std::vector<Coupling>* couplings) {
  SweepSummary s;
  std::optional<std::vector<double>> warm;
  if (cfg.warm_start) {
    warm = load_potential(*cfg.warm_start, rho.size());
  }
  std::optional<double> previous;
  for (double eps : cfg.eps_list) {
    SinkhornConfig scfg = cfg.solver(eps);
    scfg.warm_start = warm;
    if (previous) {
      scfg.scaling_start = *previous;
    }
    const auto t0 = Clock::now();
    const SolveReport r = solve_symmetric(rho, ct, scfg);
    SweepRow row;
    row.wall_time = seconds_since(t0);
    row.eps = eps;
    row.C0 = cost_C0(r.coupling, ct);
    row.entropy = entropy(r.coupling);
    row.C_eps = r.primal;
    row.dual = r.dual;
    row.gap = r.gap;
    row.marginal_error = r.marginal_error;
    row.support = support_size(r.coupling, cfg.support_threshold);
    row.iterations = r.iterations;
    row.converged = r.converged;
    s.rows.push_back(row);
    warm = r.potential.values;
    previous = eps;
    if (couplings) {
      couplings->push_back(r.coupling);
    }
  }
  for (std::size_t k = 1; k < s.rows.size(); ++k) {
    const auto& a = s.rows[k - 1];
    const auto& b = s.rows[k];
    s.support_nonincreasing = s.support_nonincreasing && b.support <= a.support;
    s.support_strictly_decreasing = s.support_strictly_decreasing && b.support < a.support;
    s.c0_nonincreasing = s.c0_nonincreasing && b.C0 <= a.C0 + 1e-4;
  }
  for (const auto& r : s.rows) {
    s.all_converged = s.all_converged && r.converged;
  }
  if (!s.rows.empty()) {
    const auto& last = s.rows.back();
    s.final_entropy_ratio = std::abs(last.eps * last.entropy) / std::abs(last.C0);
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropic multi-marginal optimal transport with repulsive costs", "mmot"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::map<CLI::App*, std::unique_ptr<Flags>> flags;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    flags[s] = std::make_unique<Flags>();
    flags[s]->attach(s);
    return s;
  };

  CLI::App* solve = sub("solve", "solve at one eps");
  CLI::App* sweep = sub("sweep", "solve along a decreasing eps list with warm starts");
  CLI::App* oracle = sub("oracle", "closed-form 1D plan and its cost");
  std::string compare;
  oracle->add_option("--compare", compare, "solve report (JSON) or coupling CSV to compare");
  CLI::App* duality = sub("duality", "certify a coupling/potential pair");
  std::string dual_coupling, dual_potential;
  double marginal_tol = 1e-6;
  duality->add_option("--coupling", dual_coupling, "coupling CSV")->required();
  duality->add_option("--potential", dual_potential, "potential JSON")->required();
  duality->add_option("--marginal-tol", marginal_tol, "largest admissible marginal error");
  CLI::App* block = sub("block-approx", "block approximation of a coupling");
  std::string block_input;
  std::size_t block_n = 0;
  std::size_t block_max_n = 64;
  block->add_option("--input", block_input, "coupling CSV")->required();
  block->add_option("-n", block_n, "step index")->required();
  block->add_option("--max-n", block_max_n, "search bound for a feasible step");
  CLI::App* check = sub("check-conditions", "verdicts for the marginal and cost conditions");
  std::string radii_text;
  double r0 = 1.0;
  long origin = -1;
  check->add_option("--radii", radii_text, "probe radii r1,r2,...");
  check->add_option("--r0", r0, "exterior radius for condition B");
  check->add_option("--origin", origin, "origin index for condition B (default: central point)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const ExperimentConfig cfg = flags.at(chosen)->resolve();
    if (cfg.threads) {
      set_thread_count(*cfg.threads);
    }
    if (chosen == solve) return cmd_solve(cfg, out, err);
    if (chosen == sweep) return cmd_sweep(cfg, out, err);
    if (chosen == oracle) return cmd_oracle(cfg, compare, out);
    if (chosen == duality) {
      return cmd_duality(cfg, dual_coupling, dual_potential, marginal_tol, out);
    }
    if (chosen == block) return cmd_block_approx(cfg, block_input, block_n, block_max_n, out, err);
    std::vector<double> radii;
    if (!radii_text.empty()) {
      radii = parse_list(radii_text);
    }
    return cmd_check_conditions(cfg, radii, r0, origin, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace mmot::cli
