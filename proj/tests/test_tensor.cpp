#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mmot/parallel.hpp"
#include "mmot/tensor.hpp"

using namespace mmot;

namespace {

Tensor random_tensor(std::size_t M, std::size_t N, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Tensor t(M, N);
  for (auto& v : t.data()) {
    v = U(gen);
  }
  return t;
}

}  // namespace

TEST_CASE("flat index is row-major and invertible") {
  Tensor t(3, 3);
  const std::vector<Index> idx{2, 0, 1};
  CHECK(t.flat_index(idx) == 2 * 9 + 0 * 3 + 1);
  std::vector<Index> back(3);
  t.unflatten(19, back);
  CHECK(back == idx);
}

TEST_CASE("odometer visits every tuple once in row-major order") {
  std::vector<Index> idx(3, 0);
  Tensor t(4, 3);
  std::size_t count = 0;
  do {
    CHECK(t.flat_index(idx) == count);
    ++count;
  } while (next_index(idx, 4));
  CHECK(count == 64);
  CHECK(idx == std::vector<Index>{0, 0, 0});
}

TEST_CASE("checked_power refuses oversized tensors") {
  CHECK(checked_power(10, 3) == 1000);
  CHECK_THROWS_AS(checked_power(1000, 4), std::overflow_error);
}

TEST_CASE("pairwise sums agree with long double accumulation") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t n : {0u, 1u, 5u, 4096u, 4097u, 20000u}) {
    std::vector<double> v(n);
    long double ref = 0.0L;
    PairwiseAccumulator acc;
    for (auto& x : v) {
      x = U(gen);
      ref += x;
      acc.add(x);
    }
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    CHECK(acc.value() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
}

TEST_CASE("log-sum-exp is stable and handles -inf") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v{1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
  std::vector<double> w{-inf, -inf};
  CHECK(log_sum_exp(w) == -inf);
  CHECK(log_sum_exp(std::span<const double>{}) == -inf);
  std::vector<double> small{0.1, -0.3, 2.0};
  double naive = 0.0;
  LogSumExp acc;
  for (double x : small) {
    naive += std::exp(x);
    acc.add(x);
  }
  CHECK(log_sum_exp(small) == doctest::Approx(std::log(naive)).epsilon(1e-14));
  CHECK(acc.value() == doctest::Approx(std::log(naive)).epsilon(1e-14));
}

TEST_CASE("axis sums match direct loops") {
  const Tensor t = random_tensor(5, 3, 3);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const auto s = axis_sums(t, axis);
    std::vector<double> ref(5, 0.0);
    for (Index a = 0; a < 5; ++a)
      for (Index b = 0; b < 5; ++b)
        for (Index c = 0; c < 5; ++c) {
          const Index idx[3] = {a, b, c};
          ref[idx[axis]] += t.at(idx);
        }
    for (Index i = 0; i < 5; ++i) {
      CHECK(s[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }
  }
  CHECK(total(t) == doctest::Approx(std::accumulate(t.data().begin(), t.data().end(), 0.0)));
}

TEST_CASE("symmetrize averages over permutations and is idempotent") {
  const Tensor t = random_tensor(4, 3, 11);
  const Tensor s = symmetrize(t);
  CHECK(symmetry_defect(s) < 1e-15);
  CHECK(symmetry_defect(t) > 1e-3);
  const Tensor ss = symmetrize(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(ss[k] == doctest::Approx(s[k]).epsilon(1e-14));
  }
  // Direct average over the six orderings for one tuple.
  std::vector<Index> p{0, 1, 3};
  double ref = 0.0;
  do {
    ref += t.at(p);
  } while (std::next_permutation(p.begin(), p.end()));
  const Index q[3] = {3, 0, 1};
  CHECK(s.at(q) == doctest::Approx(ref / 6.0).epsilon(1e-14));
  CHECK(total(s) == doctest::Approx(total(t)).epsilon(1e-13));
}

TEST_CASE("outer products") {
  Tensor out(3, 2);
  std::vector<std::vector<double>> f{{1, 2, 3}, {0.5, 0, 1}};
  add_outer_product(out, f, 2.0);
  const Index idx[2] = {2, 2};
  CHECK(out.at(idx) == doctest::Approx(6.0));
  const Index z[2] = {1, 1};
  CHECK(out.at(z) == 0.0);
}

TEST_CASE("parallel_for covers each index once at any worker count") {
  for (std::size_t workers : {1u, 2u, 5u}) {
    set_thread_count(workers);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 1 << 20, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        ++hits[i];
      }
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  set_thread_count(1);
}
