#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmot/cost.hpp"
#include "mmot/sinkhorn.hpp"
#include "mmot/space.hpp"

namespace mmot::cli {

/// Bad command-line or configuration input; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string pdf = "uniform";
  std::optional<std::pair<double, double>> interval;
  std::size_t grid = 200;
  std::optional<std::string> space_path;  ///< JSON space document, overrides the grid
  std::size_t N = 2;
  std::string cost = "coulomb";
  std::optional<double> eps;
  std::vector<double> eps_list;
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  std::optional<double> damping;
  std::optional<std::string> warm_start;
  bool eps_scaling = true;
  std::optional<std::string> out;
  std::optional<std::string> coupling_csv;
  std::optional<std::string> potential_out;
  std::optional<std::string> csv;
  double dump_threshold = 1e-12;
  double support_threshold = 1e-6;
  std::optional<std::size_t> threads;

  /// Fills the fields named in a preset ("figure1").
  void apply_preset(const std::string& name);
  /// Overlays the keys present in a JSON config object.
  void apply_json(const nlohmann::ordered_json& j);
  /// Throws ConfigError on inconsistent values.
  void validate() const;

  Density density() const;
  CostFunction cost_function() const;
  SinkhornConfig solver(double eps_value) const;
  /// eps, or the default 1e-2 when unset.
  double eps_value() const { return eps.value_or(1e-2); }
};

/// "a,b" -> (a, b).
std::pair<double, double> parse_interval(const std::string& text);
/// "1e4,1e-2,..." -> values.
std::vector<double> parse_list(const std::string& text);

}  // namespace mmot::cli
