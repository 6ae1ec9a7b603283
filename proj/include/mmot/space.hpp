#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmot/tensor.hpp"

namespace mmot {

class CostFunction;

/// Finite metric measure space: points, a distance matrix and a positive
/// reference measure (cell widths for a grid).
class DiscreteSpace {
 public:
  /// Explicit metric, row-major M x M. Validates symmetry, zero diagonal,
  /// positive off-diagonal entries and positive weights; the triangle
  /// inequality is checked exhaustively when M <= 200.
  DiscreteSpace(std::vector<std::vector<double>> points, std::vector<double> metric,
                std::vector<double> ref_weights);

  /// Euclidean metric on the given coordinates.
  static DiscreteSpace euclidean(std::vector<std::vector<double>> points,
                                 std::vector<double> ref_weights);

  std::size_t size() const { return ref_weights_.size(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }
  double distance(Index i, Index j) const { return metric_[i * size() + j]; }
  double ref_weight(Index i) const { return ref_weights_[i]; }
  const std::vector<double>& ref_weights() const { return ref_weights_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& metric() const { return metric_; }
  double diameter() const;

  /// Same points and metric with a different reference measure.
  DiscreteSpace with_ref_weights(std::vector<double> ref_weights) const;

  /// True when the metric is |x_i - x_j| on one-dimensional coordinates.
  bool is_euclidean_1d() const { return euclidean_1d_; }
  /// True for a one-dimensional space with strictly increasing coordinates.
  bool is_sorted_1d() const;

 private:
  DiscreteSpace() = default;

  std::vector<std::vector<double>> points_;
  std::vector<double> metric_;
  std::vector<double> ref_weights_;
  bool euclidean_1d_ = false;
};

bool satisfies_triangle_inequality(const DiscreteSpace& space, double tol = 1e-12);

/// Density of a probability measure against the reference measure of its space.
class Density {
 public:
  /// Requires nonnegative weights with sum_i weights[i] * m_i = 1 within 1e-12.
  Density(std::shared_ptr<const DiscreteSpace> space, std::vector<double> weights);
  /// Rescales raw nonnegative weights to unit mass.
  static Density normalized(std::shared_ptr<const DiscreteSpace> space, std::vector<double> raw);

  const DiscreteSpace& space() const { return *space_; }
  const std::shared_ptr<const DiscreteSpace>& space_ptr() const { return space_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double weight(Index i) const { return weights_[i]; }
  /// Atom masses rho_i * m_i.
  std::vector<double> masses() const;

 private:
  std::shared_ptr<const DiscreteSpace> space_;
  std::vector<double> weights_;
};

/// Distribution used to build a grid density.
struct PdfSpec {
  enum class Kind { gaussian, uniform, tabulated };
  Kind kind = Kind::uniform;
  double mean = 0.0;
  double sigma = 1.0;
  /// (x, pdf) samples, sorted by x, for the tabulated kind.
  std::vector<std::pair<double, double>> table;
  std::string source;

  /// "gaussian:mu,sigma", "uniform" or "tabulated:path" (two-column CSV).
  static PdfSpec parse(std::string_view text);
  static PdfSpec gaussian(double mean, double sigma);
  static PdfSpec uniform() { return {}; }

  double operator()(double x) const;
  /// Interval used when none is given: mean +- 5 sigma for Gaussians,
  /// [0, 1] for the uniform kind and the table range otherwise.
  std::pair<double, double> default_interval() const;
  std::string to_string() const;
};

/// Midpoint discretization of a pdf on [a, b] with M cells of width h.
Density grid_from_pdf(const PdfSpec& pdf, double a, double b, std::size_t M);

struct BallProbe {
  double radius = 0.0;
  double max_ball_mass = 0.0;
  bool admissible = false;
};

struct ConditionAReport {
  double threshold = 0.0;  ///< 1 / (N (N-1)^2)
  double max_atom_mass = 0.0;
  bool atoms_ok = false;
  std::vector<BallProbe> probes;
  /// Largest admissible probed radius; empty when the check fails.
  std::optional<double> beta;
  bool ok() const { return beta.has_value(); }
};

/// Non-concentration surrogate: the largest probed radius whose closed balls
/// all carry mass below 1 / (N (N-1)^2). Fails outright when an atom already
/// violates the threshold.
ConditionAReport check_condition_A(const Density& rho, std::size_t N,
                                   std::span<const double> radii);

/// Radii 2^-1, ..., 2^-20 used when the caller supplies none.
std::vector<double> default_condition_A_radii();

/// sum over {i : d(x_i, o) > r0} of f(2 d(x_i, o)) rho_i m_i.
double check_condition_B(const Density& rho, const CostFunction& f, Index origin, double r0);

/// sum_i rho_i log(rho_i) m_i with 0 log 0 = 0.
double entropy_of_density(const Density& rho);

/// Index of the point closest to the barycenter of rho (1D) or the first
/// point of maximal density otherwise.
Index central_index(const Density& rho);

}  // namespace mmot
