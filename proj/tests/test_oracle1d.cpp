#include <doctest.h>

#include <cmath>
#include <memory>

#include "mmot/cost.hpp"
#include "mmot/coupling.hpp"
#include "mmot/oracle1d.hpp"

using namespace mmot;

namespace {

std::shared_ptr<const DiscreteSpace> line(std::vector<double> xs, std::vector<double> w) {
  std::vector<std::vector<double>> pts;
  for (double x : xs) pts.push_back({x});
  return std::make_shared<const DiscreteSpace>(DiscreteSpace::euclidean(pts, w));
}

// Continuous uniform quantile map on [0,1]: x + 1/N mod 1.
double uniform_shift(double x, std::size_t N) {
  const double y = x + 1.0 / static_cast<double>(N);
  return y > 1.0 ? y - 1.0 : y;
}

}  // namespace

TEST_CASE("distribution function") {
  const Density u = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 4);
  const QuantileTable qt = cdf(u);
  for (int i = 0; i < 4; ++i) CHECK(qt.cdf[i] == doctest::Approx(0.25 * (i + 1)).epsilon(1e-14));
  CHECK(qt.edges.front() == doctest::Approx(0.0));
  CHECK(qt.edges.back() == doctest::Approx(1.0));

  const auto sp = line({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, 1.0, 1.0});
  const QuantileTable atom = cdf(Density(sp, {1.0, 0.0, 0.0, 0.0}));
  for (double f : atom.cdf) CHECK(f == doctest::Approx(1.0));

  const QuantileTable g = cdf(grid_from_pdf(PdfSpec::gaussian(0.0, 1.0), -4.0, 4.0, 80));
  for (std::size_t i = 1; i < g.cdf.size(); ++i) CHECK(g.cdf[i] > g.cdf[i - 1]);
  CHECK(std::abs(g.cdf.back() - 1.0) <= 1e-12);
}

TEST_CASE("non-monotone or multi-dimensional spaces are rejected") {
  const auto flipped = line({1.0, 0.0}, {0.5, 0.5});
  CHECK_THROWS_AS(cdf(Density(flipped, {1.0, 1.0})), std::invalid_argument);
  const auto plane = std::make_shared<const DiscreteSpace>(
      DiscreteSpace::euclidean({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}));
  CHECK_THROWS_AS(cdf(Density(plane, {1.0, 1.0})), std::invalid_argument);
  const DiscreteSpace tri({}, {0, 1, 2, 1, 0, 1, 2, 1, 0}, {1, 1, 1});
  CHECK_THROWS_AS(induced_plan(Density(std::make_shared<const DiscreteSpace>(tri), {1, 1, 1}), 2),
                  std::invalid_argument);
}

TEST_CASE("left-continuous quantiles") {
  const QuantileTable qt = cdf(grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 4));
  CHECK(quantile(qt, 0.5) == doctest::Approx(0.375));
  CHECK(quantile_index(qt, 0.5) == 1);
  CHECK(quantile(qt, 0.0) == doctest::Approx(0.125));
  CHECK(quantile(qt, 1.0) == doctest::Approx(0.875));
  CHECK_THROWS(quantile(qt, 1.5));

  const auto sp = line({0.125, 0.375, 0.625, 0.875}, {0.25, 0.25, 0.25, 0.25});
  const QuantileTable half = cdf(Density(sp, {2.0, 2.0, 0.0, 0.0}));
  CHECK(quantile_index(half, 1.0) == 1);
}

TEST_CASE("cyclic quantile map on the uniform grid") {
  const QuantileTable qt = cdf(grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 200));
  CHECK(optimal_map(qt, 0.2, 2) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(optimal_map(qt, 0.8, 2) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(optimal_map(qt, 0.2, 3) == doctest::Approx(0.2 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(optimal_map(qt, 0.9, 3) == doctest::Approx(0.9 + 1.0 / 3.0 - 1.0).epsilon(1e-12));
  for (double x : {0.01, 0.3, 0.49, 0.77}) {
    for (std::size_t N : {2u, 3u, 5u}) {
      CHECK(optimal_map(qt, x, N) == doctest::Approx(uniform_shift(x, N)).epsilon(1e-12));
    }
  }
  CHECK_THROWS(optimal_map(qt, 0.5, 1));
}

TEST_CASE("the map is N-cyclical") {
  const Density g = grid_from_pdf(PdfSpec::gaussian(0.0, 1.0), -4.0, 4.0, 160);
  const QuantileTable qt = cdf(g);
  const double step = 8.0 / 160.0;
  for (std::size_t N : {2u, 3u, 4u}) {
    double l1 = 0.0;
    for (std::size_t i = 0; i < qt.points.size(); ++i) {
      double y = qt.points[i];
      for (std::size_t k = 0; k < N; ++k) y = optimal_map(qt, y, N);
      l1 += qt.masses[i] * std::abs(y - qt.points[i]);
    }
    CHECK(l1 <= step);
  }
  // The index map is a permutation that cycles with period N on a uniform grid.
  const QuantileTable u = cdf(grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 12));
  for (Index i = 0; i < 12; ++i) {
    CHECK(optimal_map_index(u, i, 3) == (i + 4) % 12);
  }
}

TEST_CASE("induced plan on uniform grids is the shift permutation") {
  const std::size_t M = 12;
  const Density u = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, M);
  const Coupling p2 = induced_plan(u, 2);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < M; ++j) {
      const double want = (j == (i + M / 2) % M) ? 1.0 / M : 0.0;
      CHECK(p2.mass()[i * M + j] == doctest::Approx(want).epsilon(1e-13));
    }

  // N = 3: the six orderings of (i, i+4, i+8) share mass 1/M each tuple orbit.
  const Coupling p3 = induced_plan(u, 3);
  Tensor ref(M, 3);
  for (Index i = 0; i < M; ++i) {
    const Index t[3] = {i, (i + 4) % M, (i + 8) % M};
    ref.at(t) += 1.0 / M;
  }
  const Tensor sref = symmetrize(ref);
  for (std::size_t k = 0; k < sref.size(); ++k) CHECK(p3.mass()[k] == doctest::Approx(sref[k]).epsilon(1e-12));
}

TEST_CASE("induced plan has exact marginals") {
  const Density g = grid_from_pdf(PdfSpec::gaussian(0.3, 1.2), -4.0, 4.0, 37);
  for (std::size_t N : {2u, 3u, 4u}) {
    const Coupling p = induced_plan(g, N);
    CHECK(marginal_error(p, g) <= 1e-12);
    CHECK(symmetry_defect(p.mass()) <= 1e-15);
    const CostTensor ct(g.space_ptr(), CostFunction::coulomb(), N);
    CHECK(std::isfinite(cost_C0(p, ct)));
  }
  // A three-cell ramp whose cdf crosses 1/2 inside a cell.
  const auto sp = line({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0});
  const Density ramp(sp, {1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0});
  const Coupling pr = induced_plan(ramp, 2);
  CHECK(marginal_error(pr, ramp) <= 1e-14);
}

TEST_CASE("two-point plan is antidiagonal") {
  const auto sp = line({0.0, 1.0}, {0.5, 0.5});
  const Density two(sp, {1.0, 1.0});
  const Coupling p = induced_plan(two, 2);
  CHECK(p.mass()[0] == doctest::Approx(0.0));
  CHECK(p.mass()[1] == doctest::Approx(0.5));
  CHECK(p.mass()[2] == doctest::Approx(0.5));
  CHECK(p.mass()[3] == doctest::Approx(0.0));
  CHECK(oracle_cost(two, 2, CostFunction::coulomb()) == doctest::Approx(1.0));
}

TEST_CASE("oracle costs on the uniform interval") {
  const Density u200 = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 200);
  CHECK(std::abs(oracle_cost(u200, 2, CostFunction::coulomb()) - 2.0) <= 0.02 * 2.0);
  // Pair distances 1/3, 1/3, 2/3 on a grid divisible by three.
  const Density u60 = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 60);
  CHECK(oracle_cost(u60, 3, CostFunction::coulomb()) == doctest::Approx(7.5).epsilon(1e-10));
  // Riesz s = 2 at N = 2: f(1/2) = 4.
  CHECK(oracle_cost(u200, 2, CostFunction::riesz(2.0)) == doctest::Approx(4.0).epsilon(1e-10));
}
