#include "mmot/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmot {

namespace {

std::vector<double> number_array(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument(std::string("space document needs an array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) {
      throw std::invalid_argument(std::string("'") + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot read '" + path + "'");
  }
  return in;
}

}  // namespace

ordered_json density_to_json(const Density& rho) {
  const auto& space = rho.space();
  ordered_json j;
  ordered_json pts = ordered_json::array();
  for (const auto& p : space.points()) {
    if (p.size() == 1) {
      pts.push_back(p[0]);
    } else {
      pts.push_back(p);
    }
  }
  j["points"] = pts;
  j["ref_weights"] = space.ref_weights();
  j["weights"] = rho.weights();
  if (space.is_euclidean_1d()) {
    j["metric"] = "euclidean-1d";
  } else {
    ordered_json rows = ordered_json::array();
    const std::size_t M = space.size();
    for (std::size_t i = 0; i < M; ++i) {
      rows.push_back(std::vector<double>(space.metric().begin() + static_cast<std::ptrdiff_t>(i * M),
                                         space.metric().begin() + static_cast<std::ptrdiff_t>((i + 1) * M)));
    }
    j["metric"] = rows;
  }
  return j;
}

Density density_from_json(const ordered_json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("space document must be a JSON object");
  }
  const auto ref = number_array(j, "ref_weights");
  const std::size_t M = ref.size();
  std::vector<std::vector<double>> points;
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      if (p.is_number()) {
        points.push_back({p.get<double>()});
      } else if (p.is_array()) {
        points.push_back(p.get<std::vector<double>>());
      } else {
        throw std::invalid_argument("points must be numbers or coordinate arrays");
      }
    }
  }
  std::shared_ptr<const DiscreteSpace> space;
  const auto& metric = j.contains("metric") ? j.at("metric") : ordered_json("euclidean-1d");
  if (metric.is_string()) {
    const auto name = metric.get<std::string>();
    if (name != "euclidean-1d" && name != "euclidean") {
      throw std::invalid_argument("unknown metric '" + name + "'");
    }
    space = std::make_shared<const DiscreteSpace>(DiscreteSpace::euclidean(points, ref));
  } else if (metric.is_array()) {
    std::vector<double> flat;
    for (const auto& row : metric) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != M) {
        throw std::invalid_argument("metric rows must have one entry per point");
      }
      flat.insert(flat.end(), r.begin(), r.end());
    }
    space = std::make_shared<const DiscreteSpace>(points, flat, ref);
  } else {
    throw std::invalid_argument("metric must be \"euclidean-1d\" or a matrix");
  }
  std::vector<double> w = j.contains("weights") ? number_array(j, "weights")
                                                : std::vector<double>(M, 1.0);
  return Density::normalized(space, std::move(w));
}

Density load_density(const std::string& path) { return density_from_json(read_json(path)); }

void save_density(const std::string& path, const Density& rho) {
  write_json(path, density_to_json(rho));
}

void write_coupling_csv(const std::string& path, const Coupling& gamma, double threshold) {
  auto out = open_out(path);
  const std::size_t N = gamma.order();
  for (std::size_t k = 0; k < N; ++k) {
    out << 'i' << (k + 1) << ',';
  }
  out << "mass\n";
  std::vector<Index> idx(N, 0);
  char buf[32];
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] > threshold) {
      for (Index i : idx) {
        out << i << ',';
      }
      std::snprintf(buf, sizeof buf, "%.17g", data[flat]);
      out << buf << '\n';
    }
    next_index(idx, gamma.extent());
  }
}

Coupling read_coupling_csv(const std::string& path, std::shared_ptr<const DiscreteSpace> space) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("coupling file '" + path + "' is empty");
  }
  std::size_t cols = 1;
  for (char c : line) {
    cols += c == ',' ? 1 : 0;
  }
  if (cols < 2 || line.rfind("mass") == std::string::npos) {
    throw std::invalid_argument("coupling header must read i1,...,iN,mass");
  }
  const std::size_t N = cols - 1;
  const std::size_t M = space->size();
  Tensor t(M, N);
  std::vector<Index> idx(N);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    for (std::size_t k = 0; k < N; ++k) {
      if (!std::getline(ls, field, ',')) {
        throw std::invalid_argument("short row " + std::to_string(row) + " in '" + path + "'");
      }
      const long long v = std::stoll(field);
      if (v < 0 || static_cast<std::size_t>(v) >= M) {
        throw std::invalid_argument("index out of range on row " + std::to_string(row));
      }
      idx[k] = static_cast<Index>(v);
    }
    if (!std::getline(ls, field)) {
      throw std::invalid_argument("missing mass on row " + std::to_string(row));
    }
    const double m = std::stod(field);
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("negative or non-finite mass on row " + std::to_string(row));
    }
    t.at(idx) += m;
  }
  return Coupling::from_unnormalized(std::move(space), std::move(t));
}

void write_potential_json(const std::string& path, std::span<const double> u, double eps) {
  ordered_json j;
  j["eps"] = eps;
  j["values"] = std::vector<double>(u.begin(), u.end());
  write_json(path, j);
}

std::vector<double> read_potential_json(const std::string& path) {
  const auto j = read_json(path);
  if (j.is_array()) {
    return j.get<std::vector<double>>();
  }
  if (!j.contains("values")) {
    throw std::invalid_argument("potential file needs a 'values' array");
  }
  return j.at("values").get<std::vector<double>>();
}

void write_json(const std::string& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ordered_json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("cannot parse '" + path + "': " + e.what());
  }
}

}  // namespace mmot
