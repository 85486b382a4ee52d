#ifndef EQMASS_TRANSPORT_HPP
#define EQMASS_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "eqmass/geometry.hpp"
#include "eqmass/partition.hpp"
#include "eqmass/rational.hpp"
#include "eqmass/sequence.hpp"

namespace eqmass::transport {

/// Exact certificate extracted from a verified partition: the coupling that
/// sends each cell's mass to its point moves nothing farther than
/// sqrt(radius_sq), which is at most 6 sqrt(d) N^(-1/d).
struct CouplingCertificate {
  std::uint64_t N = 0;
  int d = 0;
  BigRational radius_sq;   // sup over cells of max squared distance
  double radius = 0.0;     // decimal rendering of its square root
  bool theorem_bound_holds = false;  // N^2 (radius_sq)^d <= (36 d)^d, exact
};

struct PartitionNotVerified : std::runtime_error {
  PartitionNotVerified(const std::string& what) : std::runtime_error(what) {}
};

inline CouplingCertificate winfty_upper(const partition::TransportPartition& p) {
  partition::VerifyReport rep = partition::verify_partition(p);
  if (!rep.ok()) {
    std::string why = "winfty_upper: partition failed verification:";
    for (const auto& c : rep.checks)
      if (!c.pass) why += " [" + c.name + ": " + c.witness + "]";
    throw PartitionNotVerified(why);
  }
  CouplingCertificate cert;
  cert.N = p.N;
  cert.d = p.d;
  cert.radius_sq = 0;
  for (const auto& cl : p.cells) {
    sequence::SequencePoint x = sequence::point(cl.n, p.d);
    BigRational d2 = max_sq_dist(cl.rect, x.coords);
    if (d2 > cert.radius_sq) cert.radius_sq = d2;
  }
  cert.radius = std::sqrt(to_double(cert.radius_sq));
  BigRational lhs(BigInt(p.N) * BigInt(p.N));
  BigRational rhs = 1;
  for (int j = 0; j < p.d; ++j) {
    lhs *= cert.radius_sq;
    rhs *= 36 * p.d;
  }
  cert.theorem_bound_holds = lhs <= rhs;
  return cert;
}

/// W_p <= W_infty for every p, so the certificate value is valid verbatim.
inline double wp_upper(const partition::TransportPartition& p, double pnorm) {
  if (pnorm < 1.0) throw std::invalid_argument("wp_upper: p must be >= 1");
  return winfty_upper(p).radius;
}

inline double unit_ball_volume(int d) {
  return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

/// Covering bound: N balls of radius r must hold unit mass, so any feasible
/// coupling radius satisfies N omega_d r^d >= 1.
inline double volumetric_lower_winfty(std::uint64_t N, int d) {
  if (N < 1 || d < 1) throw std::invalid_argument("volumetric_lower_winfty");
  return std::pow(static_cast<double>(N) * unit_ball_volume(d), -1.0 / d);
}

struct OracleBudgetExceeded : std::runtime_error {
  OracleBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct OracleResult {
  double value = 0.0;       // bottleneck distance of the grid surrogate
  double error = 0.0;       // sqrt(d)/(2g), the in-cell transport radius
  BigRational value_sq;     // exact squared bottleneck distance
};

namespace detail {

// Dinic max-flow on small integer-capacity networks.
struct MaxFlow {
  struct Edge {
    int to;
    std::int64_t cap;
    int rev;
  };
  std::vector<std::vector<Edge>> g;
  std::vector<int> level, iter;

  explicit MaxFlow(int n) : g(n) {}

  void add_edge(int from, int to, std::int64_t cap) {
    g[from].push_back({to, cap, static_cast<int>(g[to].size())});
    g[to].push_back({from, 0, static_cast<int>(g[from].size()) - 1});
  }

  bool bfs(int s, int t) {
    level.assign(g.size(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const Edge& e : g[v])
        if (e.cap > 0 && level[e.to] < 0) {
          level[e.to] = level[v] + 1;
          q.push(e.to);
        }
    }
    return level[t] >= 0;
  }

  std::int64_t dfs(int v, int t, std::int64_t f) {
    if (v == t) return f;
    for (int& i = iter[v]; i < static_cast<int>(g[v].size()); ++i) {
      Edge& e = g[v][i];
      if (e.cap > 0 && level[v] < level[e.to]) {
        std::int64_t d = dfs(e.to, t, std::min(f, e.cap));
        if (d > 0) {
          e.cap -= d;
          g[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  std::int64_t run(int s, int t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      iter.assign(g.size(), 0);
      std::int64_t f;
      while ((f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) > 0)
        flow += f;
    }
    return flow;
  }
};

inline std::vector<std::vector<BigRational>> grid_centers(int d, std::uint64_t g) {
  std::vector<std::vector<BigRational>> centers;
  std::uint64_t total = 1;
  for (int j = 0; j < d; ++j) total *= g;
  centers.reserve(total);
  std::vector<std::uint64_t> idx(d, 0);
  for (std::uint64_t c = 0; c < total; ++c) {
    std::vector<BigRational> pt;
    pt.reserve(d);
    for (int j = 0; j < d; ++j)
      pt.emplace_back(BigInt(2 * idx[j] + 1), BigInt(2 * g));
    centers.push_back(std::move(pt));
    for (int j = 0; j < d; ++j) {
      if (++idx[j] < g) break;
      idx[j] = 0;
    }
  }
  return centers;
}

}  // namespace detail

/// Desk-scale W_infty oracle: discretizes Lebesgue measure to g^d cell
/// centers and computes the exact bottleneck cost of the balanced transport
/// onto the points, by binary search over the sorted distinct squared
/// point-cell distances with a max-flow feasibility test per candidate.
/// Masses are scaled by lcm(N, g^d) so N need not divide g^d. The true
/// semi-discrete value differs from the returned one by at most
/// error = sqrt(d)/(2g).
inline OracleResult winfty_oracle_grid(
    const std::vector<std::vector<BigRational>>& points, std::uint64_t g,
    std::uint64_t edge_budget = 4'000'000) {
  if (points.empty() || g < 1)
    throw std::invalid_argument("winfty_oracle_grid: empty input");
  const int d = static_cast<int>(points[0].size());
  const std::uint64_t N = points.size();
  std::uint64_t G = 1;
  for (int j = 0; j < d; ++j) {
    if (G > edge_budget / g) throw OracleBudgetExceeded("grid too fine");
    G *= g;
  }
  if (N > edge_budget / G)
    throw OracleBudgetExceeded("oracle instance above the edge budget");

  auto centers = detail::grid_centers(d, g);

  // scaled integer masses: cell supply unit/G, point capacity unit/N
  const std::uint64_t unit = std::lcm(N, G);
  const std::int64_t cell_supply = static_cast<std::int64_t>(unit / G);
  const std::int64_t point_cap = static_cast<std::int64_t>(unit / N);

  // all pairwise squared distances, exact
  std::vector<BigRational> dist(N * G);
  for (std::uint64_t i = 0; i < N; ++i)
    for (std::uint64_t c = 0; c < G; ++c) {
      BigRational s = 0;
      for (int j = 0; j < d; ++j) {
        BigRational t = points[i][j] - centers[c][j];
        s += t * t;
      }
      dist[i * G + c] = std::move(s);
    }
  std::vector<BigRational> cand = dist;
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto feasible = [&](const BigRational& r2) {
    detail::MaxFlow mf(static_cast<int>(N + G + 2));
    const int src = static_cast<int>(N + G);
    const int sink = src + 1;
    for (std::uint64_t c = 0; c < G; ++c)
      mf.add_edge(src, static_cast<int>(N + c), cell_supply);
    for (std::uint64_t i = 0; i < N; ++i)
      mf.add_edge(static_cast<int>(i), sink, point_cap);
    for (std::uint64_t i = 0; i < N; ++i)
      for (std::uint64_t c = 0; c < G; ++c)
        if (dist[i * G + c] <= r2)
          mf.add_edge(static_cast<int>(N + c), static_cast<int>(i),
                      std::min(cell_supply, point_cap));
    return mf.run(src, sink) == static_cast<std::int64_t>(unit);
  };

  // smallest candidate radius whose feasibility flow saturates everything
  std::size_t lo = 0, hi = cand.size() - 1;
  if (!feasible(cand[hi]))
    throw std::logic_error("winfty_oracle_grid: full graph infeasible");
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible(cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }

  OracleResult out;
  out.value_sq = cand[lo];
  out.value = std::sqrt(to_double(out.value_sq));
  out.error = std::sqrt(static_cast<double>(d)) / (2.0 * static_cast<double>(g));
  return out;
}

namespace detail {

inline void require_sorted_unit(const std::vector<BigRational>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] < 0 || pts[i] >= 1)
      throw std::invalid_argument("1-D points must lie in [0,1)");
    if (i > 0 && pts[i] < pts[i - 1])
      throw std::invalid_argument("1-D points must be sorted");
  }
}

// integral of |c - x| over [a, b], closed form
inline BigRational abs_integral(const BigRational& a, const BigRational& b,
                                const BigRational& c) {
  if (c <= a) return ((b - c) * (b - c) - (a - c) * (a - c)) / 2;
  if (c >= b) return ((c - a) * (c - a) - (c - b) * (c - b)) / 2;
  return ((c - a) * (c - a) + (b - c) * (b - c)) / 2;
}

}  // namespace detail

/// Exact W_1 between the empirical measure of the sorted points and Lebesgue
/// on [0,1]: the integral of |F(x) - x|, piecewise between consecutive points.
inline BigRational w1_exact_1d(const std::vector<BigRational>& pts) {
  detail::require_sorted_unit(pts);
  const std::uint64_t N = pts.size();
  if (N == 0) throw std::invalid_argument("w1_exact_1d: empty input");
  BigRational total = 0;
  for (std::uint64_t i = 0; i <= N; ++i) {
    const BigRational a = (i == 0) ? BigRational(0) : pts[i - 1];
    const BigRational b = (i == N) ? BigRational(1) : pts[i];
    if (a == b) continue;
    total += detail::abs_integral(a, b, BigRational(BigInt(i), BigInt(N)));
  }
  return total;
}

/// Exact 1-D W_infty by quantile matching: point x_(i) serves the mass block
/// [(i-1)/N, i/N], so the bottleneck is the farthest block endpoint.
inline BigRational winfty_exact_1d(const std::vector<BigRational>& pts) {
  detail::require_sorted_unit(pts);
  const std::uint64_t N = pts.size();
  if (N == 0) throw std::invalid_argument("winfty_exact_1d: empty input");
  BigRational best = 0;
  for (std::uint64_t i = 1; i <= N; ++i) {
    BigRational a = abs(pts[i - 1] - BigRational(BigInt(i - 1), BigInt(N)));
    BigRational b = abs(pts[i - 1] - BigRational(BigInt(i), BigInt(N)));
    best = std::max(best, std::max(a, b));
  }
  return best;
}

/// The d = 1 analogue of the dyadic digital sequence: the base-2 van der
/// Corput point, i.e. the bit reversal of n-1 across the binary point.
inline BigRational vdc_point_1d(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("vdc_point_1d: n must be >= 1");
  std::uint64_t m = n - 1;
  BigInt num = 0;
  int k = 0;
  for (; m > 0; m >>= 1, ++k) {
    num <<= 1;
    num += (m & 1);
  }
  return k == 0 ? BigRational(0) : BigRational(num, pow2_int(k));
}

struct ObstructionRow {
  std::uint64_t N = 0;
  BigRational n_times_w1;  // N * W_1 of the length-N van der Corput prefix
  BigRational block_max;   // running maximum within the dyadic block of N
};

/// N * W_1 for every prefix of the 1-D van der Corput sequence, with the
/// running maximum per dyadic block [2^j, 2^{j+1}). All values are exact;
/// internally the points are dyadic with a common denominator, so each W_1
/// reduces to integer arithmetic.
inline std::vector<ObstructionRow> obstruction_scan(std::uint64_t n_max) {
  if (n_max < 2) throw std::invalid_argument("obstruction_scan: need N >= 2");
  // common scale: all points among the first n_max have denominator <= 2^K
  int K = 0;
  while ((std::uint64_t{1} << K) < n_max) ++K;
  const std::uint64_t S = std::uint64_t{1} << K;

  std::vector<std::uint64_t> sorted;  // scaled points, kept sorted
  sorted.reserve(n_max);
  std::vector<ObstructionRow> rows;
  rows.reserve(n_max);
  BigRational block_max = 0;
  std::uint64_t block_start = 1;

  for (std::uint64_t N = 1; N <= n_max; ++N) {
    // scaled van der Corput point: reverse the K low bits of N-1
    std::uint64_t m = N - 1, y = 0;
    for (int j = 0; j < K; ++j) {
      y = (y << 1) | (m & 1);
      m >>= 1;
    }
    sorted.insert(std::lower_bound(sorted.begin(), sorted.end(), y), y);

    // 2 * N^2 * S^2 * W_1 as one integer; see w1_exact_1d for the formula
    unsigned __int128 acc = 0;
    auto seg = [&](std::uint64_t ya, std::uint64_t yb, std::uint64_t i) {
      if (ya == yb) return;
      const std::int64_t A = static_cast<std::int64_t>(ya) * N;
      const std::int64_t B = static_cast<std::int64_t>(yb) * N;
      const std::int64_t C = static_cast<std::int64_t>(i) * S;
      auto sq = [](std::int64_t v) {
        return static_cast<unsigned __int128>(v < 0 ? -v : v) *
               static_cast<unsigned __int128>(v < 0 ? -v : v);
      };
      if (C <= A)
        acc += sq(B - C) - sq(A - C);
      else if (C >= B)
        acc += sq(C - A) - sq(C - B);
      else
        acc += sq(C - A) + sq(B - C);
    };
    seg(0, sorted[0], 0);
    for (std::uint64_t i = 1; i < N; ++i) seg(sorted[i - 1], sorted[i], i);
    seg(sorted[N - 1], S, N);

    BigInt num = BigInt(static_cast<std::uint64_t>(acc >> 64));
    num <<= 64;
    num += static_cast<std::uint64_t>(acc);
    // N * W_1 = acc / (2 N S^2)
    BigRational nw1(num, BigInt(2) * N * BigInt(S) * BigInt(S));

    if ((N & (N - 1)) == 0 && N > block_start) {  // new dyadic block
      block_max = 0;
      block_start = N;
    }
    block_max = std::max(block_max, nw1);
    rows.push_back({N, nw1, block_max});
  }
  return rows;
}

}  // namespace eqmass::transport

#endif  // EQMASS_TRANSPORT_HPP
