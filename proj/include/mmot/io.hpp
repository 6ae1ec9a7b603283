#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmot/coupling.hpp"
#include "mmot/space.hpp"

namespace mmot {

using ordered_json = nlohmann::ordered_json;

/// {"points", "ref_weights", "weights", "metric"}, where metric is the string
/// "euclidean-1d" for 1D Euclidean spaces and an explicit matrix otherwise.
ordered_json density_to_json(const Density& rho);
/// Inverse of density_to_json. Weights are renormalized; a missing "weights"
/// entry means the uniform density. Throws std::invalid_argument on bad input.
Density density_from_json(const ordered_json& j);

Density load_density(const std::string& path);
void save_density(const std::string& path, const Density& rho);

/// CSV with header i1,...,iN,mass; rows in row-major order for entries above
/// `threshold`.
void write_coupling_csv(const std::string& path, const Coupling& gamma, double threshold = 1e-12);
/// Reads a coupling CSV onto `space`; N comes from the header. The masses are
/// renormalized to total 1 (dump thresholds drop a little mass).
Coupling read_coupling_csv(const std::string& path, std::shared_ptr<const DiscreteSpace> space);

void write_potential_json(const std::string& path, std::span<const double> u, double eps);
std::vector<double> read_potential_json(const std::string& path);

void write_json(const std::string& path, const ordered_json& j);
ordered_json read_json(const std::string& path);

}  // namespace mmot
