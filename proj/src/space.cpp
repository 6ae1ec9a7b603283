#include "mmot/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mmot/cost.hpp"

namespace mmot {

namespace {

// Closed-ball membership with slack for grid-aligned radii.
bool within(double d, double r) { return d <= r + 1e-12 * std::max(1.0, r); }

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

void validate_weights(const std::vector<double>& w) {
  if (w.empty()) {
    throw std::invalid_argument("space must have at least one point");
  }
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("reference weights must be positive and finite");
    }
  }
}

}  // namespace

DiscreteSpace::DiscreteSpace(std::vector<std::vector<double>> points, std::vector<double> metric,
                             std::vector<double> ref_weights)
    : points_(std::move(points)), metric_(std::move(metric)), ref_weights_(std::move(ref_weights)) {
  validate_weights(ref_weights_);
  const std::size_t M = ref_weights_.size();
  if (metric_.size() != M * M) {
    throw std::invalid_argument("metric must be an M x M matrix");
  }
  if (!points_.empty() && points_.size() != M) {
    throw std::invalid_argument("point count does not match the reference weights");
  }
  for (std::size_t i = 0; i < M; ++i) {
    if (metric_[i * M + i] != 0.0) {
      throw std::invalid_argument("metric must vanish on the diagonal");
    }
    for (std::size_t j = i + 1; j < M; ++j) {
      const double d = metric_[i * M + j];
      if (d != metric_[j * M + i]) {
        throw std::invalid_argument("metric must be symmetric");
      }
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw std::invalid_argument("distinct points must be at positive finite distance");
      }
    }
  }
  if (M <= 200 && !satisfies_triangle_inequality(*this)) {
    throw std::invalid_argument("metric violates the triangle inequality");
  }
  if (!points_.empty() && points_.front().size() == 1) {
    euclidean_1d_ = true;
    for (std::size_t i = 0; i < M && euclidean_1d_; ++i) {
      for (std::size_t j = 0; j < M; ++j) {
        if (metric_[i * M + j] != std::abs(points_[i][0] - points_[j][0])) {
          euclidean_1d_ = false;
          break;
        }
      }
    }
  }
}

DiscreteSpace DiscreteSpace::euclidean(std::vector<std::vector<double>> points,
                                       std::vector<double> ref_weights) {
  validate_weights(ref_weights);
  const std::size_t M = ref_weights.size();
  if (points.size() != M) {
    throw std::invalid_argument("point count does not match the reference weights");
  }
  const std::size_t dim = points.front().size();
  if (dim == 0) {
    throw std::invalid_argument("points need at least one coordinate");
  }
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw std::invalid_argument("points must share one dimension");
    }
  }
  DiscreteSpace s;
  s.metric_.assign(M * M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i + 1; j < M; ++j) {
      const double d = dim == 1 ? std::abs(points[i][0] - points[j][0]) : euclid(points[i], points[j]);
      if (!(d > 0.0)) {
        throw std::invalid_argument("duplicate points in a Euclidean space");
      }
      s.metric_[i * M + j] = d;
      s.metric_[j * M + i] = d;
    }
  }
  s.points_ = std::move(points);
  s.ref_weights_ = std::move(ref_weights);
  s.euclidean_1d_ = dim == 1;
  return s;
}

double DiscreteSpace::diameter() const { return *std::max_element(metric_.begin(), metric_.end()); }

DiscreteSpace DiscreteSpace::with_ref_weights(std::vector<double> ref_weights) const {
  validate_weights(ref_weights);
  if (ref_weights.size() != size()) {
    throw std::invalid_argument("reference weights do not match the space");
  }
  DiscreteSpace s = *this;
  s.ref_weights_ = std::move(ref_weights);
  return s;
}

bool DiscreteSpace::is_sorted_1d() const {
  if (dim() != 1) {
    return false;
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i][0] > points_[i - 1][0])) {
      return false;
    }
  }
  return true;
}

bool satisfies_triangle_inequality(const DiscreteSpace& space, double tol) {
  const std::size_t M = space.size();
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      const double dij = space.distance(i, j);
      for (std::size_t k = 0; k < M; ++k) {
        if (dij > space.distance(i, k) + space.distance(k, j) + tol * std::max(1.0, dij)) {
          return false;
        }
      }
    }
  }
  return true;
}

Density::Density(std::shared_ptr<const DiscreteSpace> space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) {
    throw std::invalid_argument("density needs a space");
  }
  if (weights_.size() != space_->size()) {
    throw std::invalid_argument("density length does not match the space");
  }
  std::vector<double> m(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw std::invalid_argument("density weights must be nonnegative and finite");
    }
    m[i] = weights_[i] * space_->ref_weight(i);
  }
  const double mass = pairwise_sum(m);
  if (std::abs(mass - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "density has total mass " << mass << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

Density Density::normalized(std::shared_ptr<const DiscreteSpace> space, std::vector<double> raw) {
  if (!space || raw.size() != space->size()) {
    throw std::invalid_argument("density length does not match the space");
  }
  std::vector<double> m(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0) || !std::isfinite(raw[i])) {
      throw std::invalid_argument("density values must be nonnegative and finite");
    }
    m[i] = raw[i] * space->ref_weight(i);
  }
  const double z = pairwise_sum(m);
  if (!(z > 0.0)) {
    throw std::invalid_argument("density has zero total mass");
  }
  for (double& v : raw) {
    v /= z;
  }
  return Density(std::move(space), std::move(raw));
}

std::vector<double> Density::masses() const {
  std::vector<double> m(weights_.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = weights_[i] * space_->ref_weight(i);
  }
  return m;
}

PdfSpec PdfSpec::gaussian(double mean, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian sigma must be positive");
  }
  PdfSpec p;
  p.kind = Kind::gaussian;
  p.mean = mean;
  p.sigma = sigma;
  return p;
}

PdfSpec PdfSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "uniform") {
    return uniform();
  }
  if (head == "gaussian" || head == "normal") {
    const auto comma = tail.find(',');
    if (comma == std::string_view::npos) {
      throw std::invalid_argument("expected gaussian:mean,sigma");
    }
    try {
      return gaussian(std::stod(std::string(tail.substr(0, comma))),
                      std::stod(std::string(tail.substr(comma + 1))));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("cannot parse gaussian parameters in '" + std::string(text) + "'");
    }
  }
  if (head == "tabulated") {
    PdfSpec p;
    p.kind = Kind::tabulated;
    p.source = std::string(tail);
    std::ifstream in(p.source);
    if (!in) {
      throw std::invalid_argument("cannot open tabulated pdf '" + p.source + "'");
    }
    std::string line;
    while (std::getline(in, line)) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double x = 0.0;
      double y = 0.0;
      if (ls >> x >> y) {
        p.table.emplace_back(x, y);
      }
    }
    if (p.table.size() < 2) {
      throw std::invalid_argument("tabulated pdf needs at least two samples");
    }
    std::sort(p.table.begin(), p.table.end());
    return p;
  }
  throw std::invalid_argument("unknown pdf '" + std::string(text) + "'");
}

double PdfSpec::operator()(double x) const {
  switch (kind) {
    case Kind::uniform:
      return 1.0;
    case Kind::gaussian: {
      const double z = (x - mean) / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::tabulated: {
      if (x < table.front().first || x > table.back().first) {
        return 0.0;
      }
      auto hi = std::lower_bound(table.begin(), table.end(), std::make_pair(x, -1e300));
      if (hi == table.begin()) {
        return hi->second;
      }
      auto lo = hi - 1;
      if (hi == table.end()) {
        return lo->second;
      }
      const double t = (x - lo->first) / (hi->first - lo->first);
      return lo->second + t * (hi->second - lo->second);
    }
  }
  return 0.0;
}

std::pair<double, double> PdfSpec::default_interval() const {
  switch (kind) {
    case Kind::gaussian:
      return {mean - 5.0 * sigma, mean + 5.0 * sigma};
    case Kind::tabulated:
      return {table.front().first, table.back().first};
    case Kind::uniform:
      break;
  }
  return {0.0, 1.0};
}

std::string PdfSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::uniform:
      return "uniform";
    case Kind::gaussian:
      os << "gaussian:" << mean << "," << sigma;
      return os.str();
    case Kind::tabulated:
      return "tabulated:" + source;
  }
  return {};
}

Density grid_from_pdf(const PdfSpec& pdf, double a, double b, std::size_t M) {
  if (M < 2) {
    throw std::invalid_argument("grid needs at least two cells");
  }
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("grid interval must satisfy a < b");
  }
  const double h = (b - a) / static_cast<double>(M);
  std::vector<std::vector<double>> points(M);
  std::vector<double> raw(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double x = a + (static_cast<double>(i) + 0.5) * h;
    points[i] = {x};
    raw[i] = pdf(x);
    if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
      throw std::invalid_argument("pdf is not finite and nonnegative at x = " + std::to_string(x));
    }
  }
  auto space = std::make_shared<const DiscreteSpace>(
      DiscreteSpace::euclidean(std::move(points), std::vector<double>(M, h)));
  return Density::normalized(std::move(space), std::move(raw));
}

ConditionAReport check_condition_A(const Density& rho, std::size_t N,
                                   std::span<const double> radii) {
  if (N < 2) {
    throw std::invalid_argument("condition (A) needs N >= 2");
  }
  ConditionAReport report;
  const double nm1 = static_cast<double>(N - 1);
  report.threshold = 1.0 / (static_cast<double>(N) * nm1 * nm1);
  const auto mass = rho.masses();
  report.max_atom_mass = *std::max_element(mass.begin(), mass.end());
  report.atoms_ok = report.max_atom_mass < report.threshold;

  const auto& space = rho.space();
  const std::size_t M = space.size();
  for (double r : radii) {
    if (!(r > 0.0)) {
      throw std::invalid_argument("probe radii must be positive");
    }
    BallProbe probe{r, 0.0, false};
    for (std::size_t i = 0; i < M; ++i) {
      double ball = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        if (within(space.distance(i, j), r)) {
          ball += mass[j];
        }
      }
      probe.max_ball_mass = std::max(probe.max_ball_mass, ball);
    }
    probe.admissible = report.atoms_ok && probe.max_ball_mass < report.threshold;
    if (probe.admissible && (!report.beta || r > *report.beta)) {
      report.beta = r;
    }
    report.probes.push_back(probe);
  }
  return report;
}

std::vector<double> default_condition_A_radii() {
  std::vector<double> r;
  for (int k = 1; k <= 20; ++k) {
    r.push_back(std::ldexp(1.0, -k));
  }
  return r;
}

double check_condition_B(const Density& rho, const CostFunction& f, Index origin, double r0) {
  const auto& space = rho.space();
  if (origin >= space.size()) {
    throw std::out_of_range("origin index out of range");
  }
  if (!(r0 > 0.0)) {
    throw std::invalid_argument("condition (B) needs r0 > 0");
  }
  std::vector<double> terms;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double d = space.distance(i, origin);
    if (d > r0 && rho.weight(i) > 0.0) {
      terms.push_back(f(2.0 * d) * rho.weight(i) * space.ref_weight(i));
    }
  }
  return pairwise_sum(terms);
}

double entropy_of_density(const Density& rho) {
  std::vector<double> terms(rho.size(), 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double w = rho.weight(i);
    if (w > 0.0) {
      terms[i] = w * std::log(w) * rho.space().ref_weight(i);
    }
  }
  return pairwise_sum(terms);
}

Index central_index(const Density& rho) {
  const auto& space = rho.space();
  if (space.dim() == 1) {
    double mean = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      mean += space.points()[i][0] * rho.weight(i) * space.ref_weight(i);
    }
    Index best = 0;
    for (std::size_t i = 1; i < space.size(); ++i) {
      if (std::abs(space.points()[i][0] - mean) < std::abs(space.points()[best][0] - mean)) {
        best = i;
      }
    }
    return best;
  }
  return static_cast<Index>(std::max_element(rho.weights().begin(), rho.weights().end()) -
                            rho.weights().begin());
}

}  // namespace mmot
