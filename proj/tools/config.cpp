#include "config.hpp"

#include <cmath>
#include <sstream>

#include "mmot/io.hpp"

namespace mmot::cli {

namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) {
    ++used;
  }
  if (used != s.size()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

std::vector<double> numbers_or_list(const nlohmann::ordered_json& v) {
  if (v.is_string()) {
    return parse_list(v.get<std::string>());
  }
  return v.get<std::vector<double>>();
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number(item));
  }
  if (out.empty()) {
    throw ConfigError("empty list");
  }
  return out;
}

std::pair<double, double> parse_interval(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 2) {
    throw ConfigError("interval must read a,b");
  }
  return {v[0], v[1]};
}

void ExperimentConfig::apply_preset(const std::string& name) {
  if (name != "figure1") {
    throw ConfigError("unknown preset '" + name + "'");
  }
  pdf = "gaussian:0,5";
  interval = std::pair{-25.0, 25.0};
  grid = 400;
  N = 2;
  cost = "coulomb";
  eps_list = {1e4, 1e-2, 1e-3, 1e-4, 1e-5};
}

void ExperimentConfig::apply_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  try {
    if (j.contains("preset")) apply_preset(j.at("preset").get<std::string>());
    for (const auto& [key, v] : j.items()) {
      if (key == "preset") {
      } else if (key == "pdf") {
        pdf = v.get<std::string>();
      } else if (key == "interval") {
        const auto iv = numbers_or_list(v);
        if (iv.size() != 2) throw ConfigError("interval must have two entries");
        interval = std::pair{iv[0], iv[1]};
      } else if (key == "grid") {
        grid = v.get<std::size_t>();
      } else if (key == "space") {
        space_path = v.get<std::string>();
      } else if (key == "N") {
        N = v.get<std::size_t>();
      } else if (key == "cost") {
        cost = v.get<std::string>();
      } else if (key == "eps") {
        eps = v.get<double>();
      } else if (key == "eps_list") {
        eps_list = numbers_or_list(v);
      } else if (key == "tol") {
        tol = v.get<double>();
      } else if (key == "max_iter") {
        max_iter = v.get<std::size_t>();
      } else if (key == "damping") {
        damping = v.get<double>();
      } else if (key == "warm_start") {
        warm_start = v.get<std::string>();
      } else if (key == "eps_scaling") {
        eps_scaling = v.get<bool>();
      } else if (key == "out") {
        out = v.get<std::string>();
      } else if (key == "coupling_csv") {
        coupling_csv = v.get<std::string>();
      } else if (key == "potential_out") {
        potential_out = v.get<std::string>();
      } else if (key == "csv") {
        csv = v.get<std::string>();
      } else if (key == "dump_threshold") {
        dump_threshold = v.get<double>();
      } else if (key == "support_threshold") {
        support_threshold = v.get<double>();
      } else if (key == "threads") {
        threads = v.get<std::size_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (!space_path && grid < 2) throw ConfigError("--grid must be at least 2");
  if (N < 2 || N > 8) throw ConfigError("-N must lie in [2, 8]");
  if (eps && !(*eps > 0.0 && std::isfinite(*eps))) throw ConfigError("--eps must be positive");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0 && std::isfinite(eps_list[k]))) {
      throw ConfigError("--eps-list entries must be positive");
    }
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
      throw ConfigError("--eps-list must be strictly decreasing");
    }
  }
  if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
  if (max_iter == 0) throw ConfigError("--max-iter must be positive");
  if (damping && !(*damping > 0.0 && *damping <= 1.0)) {
    throw ConfigError("--damping must lie in (0, 1]");
  }
  if (!(dump_threshold >= 0.0)) throw ConfigError("--dump-threshold must be nonnegative");
  if (!(support_threshold >= 0.0)) throw ConfigError("--support-threshold must be nonnegative");
  if (threads && *threads == 0) throw ConfigError("--threads must be positive");
  if (interval && !(interval->second > interval->first)) {
    throw ConfigError("--interval needs a < b");
  }
}

Density ExperimentConfig::density() const {
  try {
    Density rho = [&] {
      if (space_path) {
        return load_density(*space_path);
      }
      const PdfSpec spec = PdfSpec::parse(pdf);
      const auto [a, b] = interval.value_or(spec.default_interval());
      return grid_from_pdf(spec, a, b, grid);
    }();
    checked_power(rho.size(), N);
    return rho;
  } catch (const std::overflow_error&) {
    throw ConfigError("M^N exceeds the dense coupling budget");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

CostFunction ExperimentConfig::cost_function() const {
  try {
    return CostFunction::parse(cost);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

SinkhornConfig ExperimentConfig::solver(double eps_value) const {
  SinkhornConfig cfg;
  cfg.eps = eps_value;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.damping = damping;
  cfg.eps_scaling = eps_scaling;
  return cfg;
}

}  // namespace mmot::cli
