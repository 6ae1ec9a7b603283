#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

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

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("cost function families") {
  const auto c = CostFunction::coulomb();
  CHECK(c(0.5) == doctest::Approx(2.0));
  CHECK(c(0.0) == kInf);
  CHECK(c.inverse(4.0) == doctest::Approx(0.25));
  const auto r = CostFunction::riesz(2.0);
  CHECK(r(0.5) == doctest::Approx(4.0));
  CHECK(r.inverse(4.0) == doctest::Approx(0.5));
  const auto l = CostFunction::logarithmic();
  CHECK(l(std::exp(-1.0)) == doctest::Approx(1.0));
  CHECK(l(2.0) < 0.0);
  CHECK(l.inverse(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(CostFunction::riesz(0.0), std::invalid_argument);
  CHECK(CostFunction::parse("riesz:1.5").exponent() == doctest::Approx(1.5));
  CHECK(CostFunction::parse("log").kind() == CostFunction::Kind::logarithmic);
  CHECK(CostFunction::parse("coulomb").kind() == CostFunction::Kind::coulomb);
  CHECK_THROWS_AS(CostFunction::parse("quadratic"), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::parse("riesz:abc"), std::invalid_argument);
}

TEST_CASE("conditions F hold on sampled grids for every family") {
  for (const auto& f : {CostFunction::coulomb(), CostFunction::riesz(0.5), CostFunction::riesz(3.0),
                        CostFunction::logarithmic()}) {
    const auto rep = check_conditions_F(f, 1e-4, 50.0);
    CHECK(rep.ok());
  }
  CHECK_THROWS(check_conditions_F(CostFunction::coulomb(), 0.0, 1.0));
}

TEST_CASE("riesz window warning") {
  CHECK_FALSE(CostFunction::riesz(1.0).riesz_window_warning(1).has_value());
  CHECK(CostFunction::riesz(3.0).riesz_window_warning(1).has_value());
  CHECK(CostFunction::riesz(0.5).riesz_window_warning(3).has_value());
  CHECK_FALSE(CostFunction::coulomb().riesz_window_warning(7).has_value());
}

TEST_CASE("eval_cost examples") {
  const auto two = line({0.0, 0.5}, {1.0, 1.0});
  const CostTensor c2(two, CostFunction::coulomb(), 2);
  const Index a[2] = {0, 1};
  CHECK(eval_cost(c2, a) == doctest::Approx(2.0));
  const Index d[2] = {1, 1};
  CHECK(eval_cost(c2, d) == kInf);

  const auto three = line({0.0, 1.0 / 3.0, 2.0 / 3.0}, {1.0, 1.0, 1.0});
  const CostTensor c3(three, CostFunction::coulomb(), 3);
  const Index t[3] = {0, 1, 2};
  CHECK(eval_cost(c3, t) == doctest::Approx(7.5).epsilon(1e-14));
  const Index rep[3] = {0, 2, 0};
  CHECK(eval_cost(c3, rep) == kInf);
  const Index bad[3] = {0, 1, 3};
  CHECK_THROWS_AS(eval_cost(c3, bad), std::out_of_range);
}

TEST_CASE("cost is invariant under index permutation") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> xs(10);
  for (auto& x : xs) x = U(gen);
  std::sort(xs.begin(), xs.end());
  const auto sp = line(xs, std::vector<double>(10, 0.1));
  for (std::size_t N : {2u, 3u}) {
    const CostTensor ct(sp, CostFunction::riesz(1.7), N);
    std::vector<Index> idx(N, 0);
    do {
      std::vector<Index> p = idx;
      std::sort(p.begin(), p.end());
      // Independent oracle: direct pairwise sum.
      double ref = 0.0;
      bool diag = false;
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = k + 1; l < N; ++l) {
          const double dd = std::abs(xs[idx[k]] - xs[idx[l]]);
          diag = diag || dd == 0.0;
          ref += std::pow(dd, -1.7);
        }
      const double v = ct(idx);
      if (diag) {
        CHECK(v == kInf);
      } else {
        CHECK(v == doctest::Approx(ref).epsilon(1e-13));
      }
      do {
        if (diag) {
          CHECK(ct(p) == kInf);
        } else {
          CHECK(ct(p) == doctest::Approx(v).epsilon(1e-14));
        }
      } while (std::next_permutation(p.begin(), p.end()));
    } while (next_index(idx, 10));
  }
}

TEST_CASE("dense and on-demand evaluation agree bit for bit") {
  const Density rho = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, 300);
  const CostTensor dense(rho.space_ptr(), CostFunction::coulomb(), 2);
  CHECK(dense.materialized());
  const CostTensor lazy(rho.space_ptr(), CostFunction::coulomb(), 3);
  CHECK_FALSE(lazy.materialized());
  const Index t[3] = {4, 17, 250};
  const double ref = (dense.pair(4, 17) + dense.pair(4, 250)) + dense.pair(17, 250);
  CHECK(lazy(t) == ref);
  const Index u[2] = {3, 9};
  CHECK(dense.at_flat(3 * 300 + 9) == dense(u));
}

TEST_CASE("gibbs kernel entries") {
  const auto two = line({0.0, 1.0}, {0.5, 0.5});
  const CostTensor ct(two, CostFunction::coulomb(), 2);
  const Index off[2] = {0, 1};
  const Index dg[2] = {0, 0};
  CHECK(gibbs_kernel_entry(ct, 1.0, off) == doctest::Approx(std::exp(-1.0) * 0.25));
  CHECK(gibbs_kernel_entry(ct, 1.0, dg) == 0.0);
  const auto unit = line({0.0, 1.0}, {1.0, 1.0});
  const CostTensor cu(unit, CostFunction::coulomb(), 2);
  CHECK(gibbs_kernel_entry(cu, 1.0, off) == doctest::Approx(std::exp(-1.0)));
  CHECK(gibbs_kernel_entry(cu, 0.5, off) < gibbs_kernel_entry(cu, 1.0, off));
  CHECK_THROWS(gibbs_kernel_entry(cu, 0.0, off));
}

TEST_CASE("alpha bound closed forms") {
  CHECK(*alpha_bound(CostFunction::coulomb(), 0.5, 2) == doctest::Approx(0.25));
  CHECK(*alpha_bound(CostFunction::riesz(1.0), 0.5, 2) == doctest::Approx(0.25));
  CHECK(*alpha_bound(CostFunction::coulomb(), 0.3, 3) == doctest::Approx(0.3 / 9.0));
  // Riesz s=2, N=3: f^-1(9 f(beta)) = beta / 3.
  CHECK(*alpha_bound(CostFunction::riesz(2.0), 0.3, 3) == doctest::Approx(0.1));
  // log: -log alpha = 2 (-log beta) at N = 2.
  CHECK(*alpha_bound(CostFunction::logarithmic(), 0.5, 2) == doctest::Approx(0.25));
  CHECK_FALSE(alpha_bound(CostFunction::logarithmic(), 1.5, 2).has_value());
  // f(alpha) = N^2 (N-1) f(beta) / 2 by definition.
  const auto f = CostFunction::riesz(0.7);
  const double a = *alpha_bound(f, 0.2, 4);
  CHECK(f(a) == doctest::Approx(16.0 * 3.0 * f(0.2) / 2.0).epsilon(1e-12));
}

TEST_CASE("diagonal mass") {
  const std::size_t M = 200;
  const Density rho = grid_from_pdf(PdfSpec::uniform(), 0.0, 1.0, M);
  const Coupling prod = product_coupling(rho, 2);
  double ref = 0.0;
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < M; ++j)
      if (rho.space().distance(i, j) < 0.1) ref += 1.0 / (M * M);
  CHECK(diagonal_mass(prod, 0.1) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(diagonal_mass(prod, 0.1) == doctest::Approx(2 * 0.1 - 0.01).epsilon(0.03));
  CHECK(diagonal_mass(prod, 0.0) == 0.0);

  const auto two = line({0.0, 1.0}, {0.5, 0.5});
  Tensor t(2, 2);
  t[1] = 0.5;
  t[2] = 0.5;
  const Coupling anti(two, t);
  CHECK(diagonal_mass(anti, 0.5) == 0.0);
  CHECK(diagonal_mass(anti, 1.5) == doctest::Approx(1.0));
}
