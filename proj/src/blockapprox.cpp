#include "mmot/blockapprox.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mmot/errors.hpp"

namespace mmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr int kDeltaProbes = 64;

double min_pair_distance(const DiscreteSpace& space, std::span<const Index> idx) {
  double d = kInf;
  for (std::size_t s = 1; s < idx.size(); ++s) {
    for (std::size_t t = 0; t < s; ++t) {
      d = std::min(d, space.distance(idx[t], idx[s]));
    }
  }
  return d;
}

bool separated(const DiscreteSpace& space, std::span<const Index> a, std::span<const Index> b,
               double r) {
  std::vector<Index> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return min_pair_distance(space, all) > r;
}

// ball[p] = k when d(p, centers[k]) <= radius; the balls are disjoint for
// anchors separated by more than twice the radius.
std::vector<std::size_t> ball_ids(const DiscreteSpace& space, std::span<const Index> centers,
                                  double radius) {
  std::vector<std::size_t> id(space.size(), kNone);
  for (std::size_t p = 0; p < space.size(); ++p) {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (space.distance(p, centers[k]) <= radius) {
        id[p] = k;
        break;
      }
    }
  }
  return id;
}

// Coordinates land in distinct balls, i.e. the tuple is a permutation of a
// point of the ball product.
bool in_permuted_balls(std::span<const Index> idx, const std::vector<std::size_t>& id) {
  std::vector<bool> seen(idx.size(), false);
  for (Index p : idx) {
    const std::size_t k = id[p];
    if (k == kNone || seen[k]) {
      return false;
    }
    seen[k] = true;
  }
  return true;
}

double tensor_cost(const Tensor& t, const CostTensor& ct) {
  PairwiseAccumulator acc;
  const auto data = t.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] > 0.0) {
      const double c = ct.at_flat(flat);
      if (c == kInf) {
        return kInf;
      }
      acc.add(c * data[flat]);
    }
  }
  return acc.value();
}

// Entropy of t / total(t) against the product reference measure.
double normalized_entropy(const Tensor& t, const DiscreteSpace& space) {
  const double z = total(t);
  if (!(z > 0.0)) {
    return 0.0;
  }
  std::vector<double> lm(space.size());
  for (std::size_t i = 0; i < lm.size(); ++i) {
    lm[i] = std::log(space.ref_weight(i));
  }
  PairwiseAccumulator acc;
  std::vector<Index> idx(t.order(), 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const double v = t[flat] / z;
    if (v > 0.0) {
      double s = 0.0;
      for (Index i : idx) {
        s += lm[i];
      }
      acc.add(v * (std::log(v) - s));
    }
    next_index(idx, t.extent());
  }
  return acc.value();
}

double support_separation(const Tensor& t, const DiscreteSpace& space) {
  double d = kInf;
  std::vector<Index> idx(t.order(), 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    if (t[flat] > 0.0) {
      d = std::min(d, min_pair_distance(space, idx));
    }
    next_index(idx, t.extent());
  }
  return d;
}

// Restriction of a probability vector to a ball, renormalized.
std::vector<double> restrict_normalized(std::span<const double> v,
                                        const std::vector<std::size_t>& id, std::size_t k) {
  std::vector<double> out(v.size(), 0.0);
  double z = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) {
    if (id[p] == k) {
      out[p] = v[p];
      z += v[p];
    }
  }
  if (!(z > 0.0)) {
    throw std::logic_error("reserve marginal has an empty ball");
  }
  for (double& x : out) {
    x /= z;
  }
  return out;
}

struct Prepared {
  BlockSchedule schedule;
  Tensor gamma0;
  std::vector<double> reserve_x;        // marginal of gamma restricted to B~, normalized
  std::vector<double> reserve_x_prime;
  std::vector<bool> in_K;
};

Prepared prepare(const Coupling& gamma, const CostTensor& ct, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("step index n must be positive");
  }
  if (ct.order() != gamma.order() || ct.extent() != gamma.extent()) {
    throw std::invalid_argument("coupling and cost tensor shapes differ");
  }
  if (symmetry_defect(gamma.mass()) > 1e-12) {
    throw std::invalid_argument("block approximation needs a symmetric coupling");
  }
  if (!std::isfinite(cost_C0(gamma, ct))) {
    throw std::invalid_argument("block approximation needs a coupling of finite cost");
  }
  const auto& space = gamma.space();
  const std::size_t N = gamma.order();
  const std::size_t M = gamma.extent();
  const double Nd = static_cast<double>(N);

  Prepared p;
  BlockSchedule& s = p.schedule;
  s.n = n;
  s.r = 1.0 / static_cast<double>(n);

  auto anchors = select_anchors(gamma, s.r);
  if (!anchors) {
    std::ostringstream os;
    os << "no pair of support tuples is " << s.r << "-separated (n = " << n << ")";
    throw InfeasibleError(os.str());
  }
  s.x = std::move(anchors->first);
  s.x_prime = std::move(anchors->second);

  const double radius = s.r / 10.0;
  const auto id_x = ball_ids(space, s.x, radius);
  const auto id_xp = ball_ids(space, s.x_prime, radius);

  // Masses of the symmetrized ball supports and their normalized marginals.
  const auto mass = gamma.mass().data();
  std::vector<char> region(mass.size(), 0);
  std::vector<double> marg_x(M, 0.0);
  std::vector<double> marg_xp(M, 0.0);
  {
    std::vector<Index> idx(N, 0);
    for (std::size_t flat = 0; flat < mass.size(); ++flat) {
      if (mass[flat] > 0.0) {
        if (in_permuted_balls(idx, id_x)) {
          region[flat] = 1;
          s.mass_B += mass[flat];
          marg_x[idx[0]] += mass[flat];
        } else if (in_permuted_balls(idx, id_xp)) {
          region[flat] = 2;
          s.mass_B_prime += mass[flat];
          marg_xp[idx[0]] += mass[flat];
        }
      }
      next_index(idx, M);
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    marg_x[i] /= s.mass_B;
    marg_xp[i] /= s.mass_B_prime;
  }
  p.reserve_x = std::move(marg_x);
  p.reserve_x_prime = std::move(marg_xp);

  // eps_n; the r / f(2r/5) term only constrains when f is positive there.
  const auto& f = ct.function();
  double e = std::min({s.mass_B, s.mass_B_prime, s.r});
  const double f25 = f(2.0 * s.r / 5.0);
  if (f25 > 0.0) {
    e = std::min(e, s.r / f25);
  }
  s.eps = e / Nd;
  if (!(s.eps > 0.0)) {
    throw InfeasibleError("eps_n vanishes at this n");
  }

  // gamma_0: chop eps off each reserve.
  p.gamma0 = gamma.mass();
  const double keep_x = (s.mass_B - s.eps) / s.mass_B;
  const double keep_xp = (s.mass_B_prime - s.eps) / s.mass_B_prime;
  for (std::size_t flat = 0; flat < mass.size(); ++flat) {
    if (region[flat] == 1) {
      p.gamma0[flat] *= keep_x;
    } else if (region[flat] == 2) {
      p.gamma0[flat] *= keep_xp;
    }
  }

  // Both discarded pieces must stay below eps / (2N) so that each ball of the
  // reserve is asked for at most eps / N by the coupled remainder.
  const double threshold = s.eps / (2.0 * Nd);

  // K_n: greedy prefix by marginal mass.
  const auto marg0 = axis_sums(p.gamma0, 0);
  std::vector<Index> by_mass(M);
  std::iota(by_mass.begin(), by_mass.end(), Index{0});
  std::stable_sort(by_mass.begin(), by_mass.end(),
                   [&](Index a, Index b) { return marg0[a] > marg0[b]; });
  std::vector<std::size_t> rank(M);
  for (std::size_t k = 0; k < M; ++k) {
    rank[by_mass[k]] = k;
  }
  std::vector<double> hist(M, 0.0);
  std::vector<double> dmin(mass.size(), kInf);
  {
    std::vector<Index> idx(N, 0);
    for (std::size_t flat = 0; flat < mass.size(); ++flat) {
      if (p.gamma0[flat] > 0.0) {
        std::size_t top = 0;
        for (Index i : idx) {
          top = std::max(top, rank[i]);
        }
        hist[top] += p.gamma0[flat];
        dmin[flat] = min_pair_distance(space, idx);
      }
      next_index(idx, M);
    }
  }
  std::vector<double> tail(M + 1, 0.0);
  for (std::size_t k = M; k-- > 0;) {
    tail[k] = tail[k + 1] + hist[k];
  }
  std::size_t keep = M;
  for (std::size_t k = 0; k <= M; ++k) {
    if (tail[k] < threshold) {
      keep = k;
      break;
    }
  }
  s.K.assign(by_mass.begin(), by_mass.begin() + static_cast<std::ptrdiff_t>(keep));
  p.in_K.assign(M, false);
  for (Index i : s.K) {
    p.in_K[i] = true;
  }
  for (std::size_t a = 0; a < s.K.size(); ++a) {
    for (std::size_t b = a + 1; b < s.K.size(); ++b) {
      s.diam_K = std::max(s.diam_K, space.distance(s.K[a], s.K[b]));
    }
  }

  // delta_n: largest probe r j / 64 with gamma_0(D_delta) below threshold.
  std::vector<double> bucket(kDeltaProbes + 1, 0.0);
  const auto probe = [&](int j) { return s.r * static_cast<double>(j) / kDeltaProbes; };
  for (std::size_t flat = 0; flat < mass.size(); ++flat) {
    if (p.gamma0[flat] > 0.0 && dmin[flat] < probe(kDeltaProbes - 1)) {
      int j = static_cast<int>(std::floor(dmin[flat] / probe(1))) + 1;
      while (j > 1 && probe(j - 1) > dmin[flat]) {
        --j;
      }
      while (!(probe(j) > dmin[flat])) {
        ++j;
      }
      bucket[static_cast<std::size_t>(j)] += p.gamma0[flat];
    }
  }
  double within = 0.0;
  int best = 0;
  for (int j = 1; j < kDeltaProbes; ++j) {
    within += bucket[static_cast<std::size_t>(j)];
    if (within < threshold) {
      best = j;
    } else {
      break;
    }
  }
  if (best == 0) {
    throw InfeasibleError("no diagonal margin delta_n keeps the near-diagonal mass small enough");
  }
  s.delta = probe(best);

  // lambda_n from the modulus of continuity of f on [delta/2, 2 diam K]. f is
  // convex and decreasing, so the worst pair sits at the left end.
  const double lo = s.delta / 2.0;
  const double hi = 2.0 * s.diam_K;
  const double cap = std::min(s.delta / static_cast<double>(n), s.delta / 4.0);
  const auto spread = [&](double lam) { return f(lo) - f(std::min(lo + 2.0 * lam, hi)); };
  double lam = cap;
  if (hi > lo && !(spread(cap) < s.eps)) {
    double a = 0.0;
    double b = cap;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      (spread(m) < s.eps ? a : b) = m;
    }
    lam = a;
  }
  s.lambda = 0.999 * lam;
  if (!(s.lambda > 0.0)) {
    throw InfeasibleError("no block diameter satisfies the modulus bound");
  }

  // Core marginal and the block partition of its support.
  std::vector<double> rho1(M, 0.0);
  {
    std::vector<Index> idx(N, 0);
    for (std::size_t flat = 0; flat < mass.size(); ++flat) {
      if (p.gamma0[flat] > 0.0 && dmin[flat] >= s.delta) {
        bool core = true;
        for (Index i : idx) {
          core = core && p.in_K[i];
        }
        if (core) {
          rho1[idx[0]] += p.gamma0[flat];
        }
      }
      next_index(idx, M);
    }
  }
  std::vector<Index> support;
  for (Index i = 0; i < M; ++i) {
    if (rho1[i] > 0.0) {
      if (rho1[i] >= s.eps) {
        std::ostringstream os;
        os << "point " << i << " carries core mass " << rho1[i] << " >= eps_n = " << s.eps;
        throw InfeasibleError(os.str());
      }
      support.push_back(i);
    }
  }
  if (space.is_euclidean_1d()) {
    const auto& pts = space.points();
    std::stable_sort(support.begin(), support.end(),
                     [&](Index a, Index b) { return pts[a][0] < pts[b][0]; });
    std::vector<Index> cur;
    double cur_mass = 0.0;
    for (Index q : support) {
      if (!cur.empty() && pts[q][0] - pts[cur.front()][0] < s.lambda &&
          cur_mass + rho1[q] < s.eps) {
        cur.push_back(q);
        cur_mass += rho1[q];
      } else {
        if (!cur.empty()) {
          s.blocks.push_back(std::move(cur));
        }
        cur = {q};
        cur_mass = rho1[q];
      }
    }
    if (!cur.empty()) {
      s.blocks.push_back(std::move(cur));
    }
  } else {
    std::vector<bool> used(M, false);
    for (Index seed : support) {
      if (used[seed]) {
        continue;
      }
      std::vector<Index> cur{seed};
      used[seed] = true;
      double cur_mass = rho1[seed];
      for (Index q : support) {
        if (!used[q] && space.distance(seed, q) < s.lambda / 2.0 && cur_mass + rho1[q] < s.eps) {
          cur.push_back(q);
          used[q] = true;
          cur_mass += rho1[q];
        }
      }
      s.blocks.push_back(std::move(cur));
    }
  }

  s.A.assign(M, N - 1);
  for (std::size_t y = 0; y < M; ++y) {
    for (std::size_t i = 0; i + 1 < N; ++i) {
      if (space.distance(s.x[i], y) <= s.r / 2.0) {
        s.A[y] = i;
        break;
      }
    }
  }
  return p;
}

}  // namespace

std::optional<std::pair<std::vector<Index>, std::vector<Index>>> select_anchors(
    const Coupling& gamma, double r) {
  const auto& space = gamma.space();
  const std::size_t N = gamma.order();
  std::vector<std::size_t> support;
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] > 0.0) {
      support.push_back(flat);
    }
  }
  std::vector<Index> a(N);
  std::vector<Index> b(N);
  std::vector<std::size_t> spaced;
  for (std::size_t flat : support) {
    gamma.mass().unflatten(flat, a);
    if (min_pair_distance(space, a) > r) {
      spaced.push_back(flat);
    }
  }
  for (std::size_t fa : spaced) {
    gamma.mass().unflatten(fa, a);
    for (std::size_t fb : spaced) {
      gamma.mass().unflatten(fb, b);
      if (separated(space, a, b, r)) {
        return std::make_pair(a, b);
      }
    }
  }
  return std::nullopt;
}

BlockSchedule build_schedule(const Coupling& gamma, const CostTensor& ct, std::size_t n) {
  return prepare(gamma, ct, n).schedule;
}

Tensor core_approximation(const Tensor& core1, std::span<const double> rho1,
                          const std::vector<std::vector<Index>>& blocks) {
  const std::size_t M = core1.extent();
  const std::size_t N = core1.order();
  std::vector<std::size_t> blk(M, kNone);
  std::vector<double> block_mass(blocks.size(), 0.0);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (Index i : blocks[k]) {
      blk[i] = k;
      block_mass[k] += rho1[i];
    }
    if (!(block_mass[k] > 0.0)) {
      throw std::invalid_argument("every block needs positive marginal mass");
    }
  }
  Tensor W(blocks.size(), N);
  std::vector<Index> idx(N, 0);
  std::vector<Index> bidx(N, 0);
  for (std::size_t flat = 0; flat < core1.size(); ++flat) {
    if (core1[flat] > 0.0) {
      for (std::size_t k = 0; k < N; ++k) {
        if (blk[idx[k]] == kNone) {
          throw std::invalid_argument("blocks do not cover the core support");
        }
        bidx[k] = blk[idx[k]];
      }
      W.at(bidx) += core1[flat];
    }
    next_index(idx, M);
  }
  Tensor out(M, N);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    double v = 1.0;
    bool inside = true;
    for (std::size_t k = 0; k < N && inside; ++k) {
      const std::size_t b = blk[idx[k]];
      if (b == kNone) {
        inside = false;
      } else {
        bidx[k] = b;
        v *= rho1[idx[k]] / block_mass[b];
      }
    }
    if (inside) {
      out[flat] = W.at(bidx) * v;
    }
    next_index(idx, M);
  }
  return out;
}

RemainderPieces remainder_coupling(const BlockSchedule& s, const DiscreteSpace& space,
                                   const Tensor& rest, std::span<const double> reserve_x,
                                   std::span<const double> reserve_x_prime) {
  const std::size_t N = rest.order();
  const std::size_t M = rest.extent();
  const double Nd = static_cast<double>(N);
  const double radius = s.r / 10.0;
  const auto id_x = ball_ids(space, s.x, radius);
  const auto id_xp = ball_ids(space, s.x_prime, radius);
  std::vector<std::vector<double>> hat(N);
  std::vector<std::vector<double>> hat_p(N);
  for (std::size_t k = 0; k < N; ++k) {
    hat[k] = restrict_normalized(reserve_x, id_x, k);
    hat_p[k] = restrict_normalized(reserve_x_prime, id_xp, k);
  }

  RemainderPieces out;
  const auto rho2 = axis_sums(rest, 0);

  // N (sum_i eta_i)^S: the discarded marginal within A_i, reserve balls elsewhere.
  Tensor eta(M, N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<std::vector<double>> factors = hat;
    factors[i].assign(M, 0.0);
    for (std::size_t y = 0; y < M; ++y) {
      if (s.A[y] == i) {
        factors[i][y] = rho2[y];
      }
    }
    add_outer_product(eta, factors);
  }
  out.coupled = symmetrize(eta);
  out.coupled *= Nd;

  // What is left of the x-reserve after the coupled piece drew on it.
  const auto used = axis_sums(out.coupled, 0);
  std::vector<double> rho3(M);
  for (std::size_t y = 0; y < M; ++y) {
    const double v = s.eps * reserve_x[y] + rho2[y] - used[y];
    if (v < -1e-14) {
      throw std::logic_error("negative residual reserve marginal");
    }
    rho3[y] = std::max(v, 0.0);
  }
  double rho3_mass = std::accumulate(rho3.begin(), rho3.end(), 0.0);

  // For N >= 3 the x'-reserve cannot absorb (N-1)|rho3| when rho3 is large;
  // pair its even part with itself across the x-balls first.
  std::vector<double> excess = rho3;
  double excess_mass = rho3_mass;
  if ((Nd - 1.0) * rho3_mass > s.eps) {
    std::vector<double> per_ball(N, 0.0);
    for (std::size_t y = 0; y < M; ++y) {
      if (id_x[y] != kNone) {
        per_ball[id_x[y]] += rho3[y];
      }
    }
    const double c_min = *std::min_element(per_ball.begin(), per_ball.end());
    out.balanced = Tensor(M, N);
    add_outer_product(out.balanced, hat, Nd * c_min);
    out.balanced = symmetrize(out.balanced);
    for (std::size_t y = 0; y < M; ++y) {
      double even = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        even += c_min * hat[k][y];
      }
      excess[y] = std::max(rho3[y] - even, 0.0);
    }
    excess_mass = std::accumulate(excess.begin(), excess.end(), 0.0);
  }

  Tensor phi(M, N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<std::vector<double>> factors = hat_p;
    factors[i] = excess;
    add_outer_product(phi, factors);
  }
  out.spread = symmetrize(phi);

  const double b = s.eps - (Nd - 1.0) * excess_mass;
  if (b < -1e-14) {
    throw std::logic_error("negative closing mass in the remainder");
  }
  out.closing = Tensor(M, N);
  add_outer_product(out.closing, hat_p, std::max(b, 0.0));
  out.closing = symmetrize(out.closing);
  return out;
}

BlockApproxResult block_approximation(const Coupling& gamma, const CostTensor& ct,
                                      std::size_t n) {
  Prepared p = prepare(gamma, ct, n);
  const BlockSchedule& s = p.schedule;
  const auto& space = gamma.space();
  const std::size_t N = gamma.order();
  const std::size_t M = gamma.extent();
  const double Nd = static_cast<double>(N);

  Tensor core1(M, N);
  Tensor rest(M, N);
  {
    std::vector<Index> idx(N, 0);
    for (std::size_t flat = 0; flat < core1.size(); ++flat) {
      const double v = p.gamma0[flat];
      if (v > 0.0) {
        bool core = min_pair_distance(space, idx) >= s.delta;
        for (Index i : idx) {
          core = core && p.in_K[i];
        }
        (core ? core1 : rest)[flat] = v;
      }
      next_index(idx, M);
    }
  }
  p.gamma0 = Tensor();

  const auto rho1 = axis_sums(core1, 0);
  Tensor approx = core_approximation(core1, rho1, s.blocks);
  RemainderPieces rem = remainder_coupling(s, space, rest, p.reserve_x, p.reserve_x_prime);

  BlockApproxResult r{s, Coupling(gamma.space_ptr(), [&] {
                        Tensor t = approx;
                        t += rem.coupled;
                        t += rem.spread;
                        if (rem.balanced.size() > 0) {
                          t += rem.balanced;
                        }
                        t += rem.closing;
                        return t;
                      }())};

  const Density rho = marginal(gamma, 0);
  r.marginal_error = marginal_error(r.coupling, rho);
  r.symmetry_defect = symmetry_defect(r.coupling.mass());
  r.discarded_mass = total(rest);
  r.remainder_mass = total(rem.coupled) + total(rem.spread) + total(rem.closing) +
                     (rem.balanced.size() > 0 ? total(rem.balanced) : 0.0);
  r.separation_coupled = support_separation(rem.coupled, space);
  r.separation_reserve = std::min(support_separation(rem.spread, space),
                                  support_separation(rem.closing, space));
  if (rem.balanced.size() > 0) {
    r.separation_reserve = std::min(r.separation_reserve, support_separation(rem.balanced, space));
  }
  r.cost_original = cost_C0(gamma, ct);
  r.cost_approx = cost_C0(r.coupling, ct);
  r.cost_gap = std::abs(r.cost_approx - r.cost_original);
  r.core_truncation = std::abs(r.cost_original - tensor_cost(core1, ct));
  r.cost_bound = Nd * (Nd - 1.0) / 2.0 * s.eps + 3.0 * Nd * (Nd - 1.0) * s.r / 2.0 +
                 r.core_truncation;
  r.entropy = entropy(r.coupling);

  // Mixture bound: each block product and each remainder piece is one
  // component; E[sum w_p nu_p] <= sum w_p E[nu_p] - sum w_p log w_p.
  std::vector<double> weights;
  std::vector<double> entropies;
  {
    std::vector<double> block_mass(s.blocks.size(), 0.0);
    std::vector<double> block_entropy(s.blocks.size(), 0.0);
    std::vector<std::size_t> blk(M, kNone);
    for (std::size_t k = 0; k < s.blocks.size(); ++k) {
      for (Index i : s.blocks[k]) {
        blk[i] = k;
        block_mass[k] += rho1[i];
      }
      for (Index i : s.blocks[k]) {
        const double q = rho1[i] / block_mass[k];
        if (q > 0.0) {
          block_entropy[k] += q * std::log(q / space.ref_weight(i));
        }
      }
    }
    Tensor W(s.blocks.size(), N);
    std::vector<Index> idx(N, 0);
    std::vector<Index> bidx(N, 0);
    for (std::size_t flat = 0; flat < core1.size(); ++flat) {
      if (core1[flat] > 0.0) {
        for (std::size_t k = 0; k < N; ++k) {
          bidx[k] = blk[idx[k]];
        }
        W.at(bidx) += core1[flat];
      }
      next_index(idx, M);
    }
    std::fill(bidx.begin(), bidx.end(), 0);
    for (std::size_t flat = 0; flat < W.size(); ++flat) {
      if (W[flat] > 0.0) {
        double e = 0.0;
        for (Index k : bidx) {
          e += block_entropy[k];
        }
        weights.push_back(W[flat]);
        entropies.push_back(e);
      }
      next_index(bidx, s.blocks.size());
    }
  }
  for (const Tensor* piece : {&rem.coupled, &rem.spread, &rem.balanced, &rem.closing}) {
    if (piece->size() > 0 && total(*piece) > 0.0) {
      weights.push_back(total(*piece));
      entropies.push_back(normalized_entropy(*piece, space));
    }
  }
  double bound = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    bound += weights[k] * (entropies[k] - std::log(weights[k]));
  }
  r.entropy_bound = bound;
  r.pieces = weights.size();
  return r;
}

std::optional<std::size_t> smallest_feasible_n(const Coupling& gamma, const CostTensor& ct,
                                               std::size_t from, std::size_t to) {
  for (std::size_t n = std::max<std::size_t>(from, 1); n <= to; ++n) {
    try {
      build_schedule(gamma, ct, n);
      return n;
    } catch (const InfeasibleError&) {
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> slowdown_reindex(std::span<const double> entropies,
                                          std::span<const double> tau) {
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (!(tau[k] > 0.0) || (k > 0 && !(tau[k] < tau[k - 1]))) {
      throw std::invalid_argument("tau must be positive and strictly decreasing");
    }
  }
  std::vector<std::size_t> k(tau.size());
  for (std::size_t n = 1; n <= tau.size(); ++n) {
    const double root = std::sqrt(tau[n - 1]);
    std::size_t sup = 0;
    while (sup < entropies.size() && root * entropies[sup] < 1.0) {
      ++sup;
    }
    k[n - 1] = std::min(n, std::max<std::size_t>(1, sup));
  }
  return k;
}

std::vector<double> test_function_integrals(const Coupling& gamma) {
  const auto& space = gamma.space();
  const std::size_t N = gamma.order();
  const double pairs = static_cast<double>(N * (N - 1) / 2);
  std::vector<PairwiseAccumulator> acc(10);
  std::vector<Index> idx(N, 0);
  std::vector<double> a(N);
  const auto data = gamma.mass().data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    const double w = data[flat];
    if (w > 0.0) {
      std::array<double, 10> phi{};
      for (std::size_t j = 0; j < N; ++j) {
        a[j] = space.distance(idx[j], 0);
        phi[0] += std::sin(a[j]);
        phi[1] += std::cos(a[j]);
        phi[2] += std::exp(-a[j]);
        phi[3] += std::min(1.0, a[j]);
        phi[4] += std::tanh(2.0 * a[j]);
        phi[9] += 1.0 / (1.0 + a[j]);
      }
      for (std::size_t s = 1; s < N; ++s) {
        for (std::size_t t = 0; t < s; ++t) {
          const double d = space.distance(idx[t], idx[s]);
          phi[5] += std::exp(-d) / pairs;
          phi[6] += std::min(1.0, d) / pairs;
          phi[7] += std::cos(3.0 * d) / pairs;
        }
      }
      phi[8] = std::sin(a[0]) * std::cos(a[1]);
      for (std::size_t k : {0, 1, 2, 3, 4, 9}) {
        phi[k] /= static_cast<double>(N);
      }
      for (std::size_t k = 0; k < 10; ++k) {
        acc[k].add(w * phi[k]);
      }
    }
    next_index(idx, gamma.extent());
  }
  std::vector<double> out;
  for (const auto& x : acc) {
    out.push_back(x.value());
  }
  return out;
}

}  // namespace mmot
