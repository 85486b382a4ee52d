#ifndef EQMASS_GEOMETRY_HPP
#define EQMASS_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "eqmass/rational.hpp"

namespace eqmass {

/// Axis-parallel half-open box prod_j [lo_j, hi_j) with rational endpoints.
struct Rect {
  std::vector<BigRational> lo;
  std::vector<BigRational> hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool valid() const {
    if (lo.size() != hi.size() || lo.empty()) return false;
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (!(lo[j] < hi[j])) return false;
    return true;
  }

  bool operator==(const Rect& o) const { return lo == o.lo && hi == o.hi; }
};

inline BigRational volume(const Rect& r) {
  BigRational v = 1;
  for (int j = 0; j < r.dim(); ++j) v *= r.hi[j] - r.lo[j];
  return v;
}

struct CutResult {
  Rect left;   // R ∩ {x_j < t}
  Rect right;  // R ∩ {x_j >= t}
  BigRational t;
};

/// Single-axis mass cut: the unique t with |R ∩ {x_j < t}| = V.
/// The displacement identity |t - mid| * A_j = |V - vol/2| holds exactly.
inline CutResult cut(const Rect& r, int axis, const BigRational& target) {
  if (axis < 0 || axis >= r.dim()) throw std::invalid_argument("cut: bad axis");
  const BigRational vol = volume(r);
  if (!(target > 0) || !(target < vol))
    throw std::invalid_argument("cut: target volume not in (0, vol)");
  BigRational cross = 1;  // cross-sectional area orthogonal to the axis
  for (int j = 0; j < r.dim(); ++j)
    if (j != axis) cross *= r.hi[j] - r.lo[j];
  CutResult out;
  out.t = r.lo[axis] + target / cross;
  out.left = r;
  out.left.hi[axis] = out.t;
  out.right = r;
  out.right.lo[axis] = out.t;
  return out;
}

inline bool disjoint(const Rect& a, const Rect& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("disjoint: dim mismatch");
  for (int j = 0; j < a.dim(); ++j)
    if (a.hi[j] <= b.lo[j] || b.hi[j] <= a.lo[j]) return true;
  return false;
}

inline bool contains_point(const Rect& r, const std::vector<BigRational>& x) {
  if (static_cast<int>(x.size()) != r.dim())
    throw std::invalid_argument("contains_point: dim mismatch");
  for (int j = 0; j < r.dim(); ++j)
    if (x[j] < r.lo[j] || x[j] >= r.hi[j]) return false;
  return true;
}

/// a ⊆ b as half-open boxes.
inline bool contains_rect(const Rect& b, const Rect& a) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("contains_rect: dim mismatch");
  for (int j = 0; j < a.dim(); ++j)
    if (a.lo[j] < b.lo[j] || a.hi[j] > b.hi[j]) return false;
  return true;
}

/// max over the closure of R of |y - x|^2, attained at a corner.
inline BigRational max_sq_dist(const Rect& r, const std::vector<BigRational>& x) {
  if (static_cast<int>(x.size()) != r.dim())
    throw std::invalid_argument("max_sq_dist: dim mismatch");
  BigRational s = 0;
  for (int j = 0; j < r.dim(); ++j) {
    BigRational a = abs(r.lo[j] - x[j]);
    BigRational b = abs(r.hi[j] - x[j]);
    BigRational m = std::max(a, b);
    s += m * m;
  }
  return s;
}

/// Decides max|y-x|^2 <= c^2 d N^(-2/d) over y in R, exactly:
/// N^(-1/d) is irrational in general, so compare d-th powers,
/// N^2 (D^2)^d <= (c^2 d)^d in rational arithmetic. A floating-point
/// prefilter accepts instances that hold by a wide margin (the accumulated
/// rounding error over these few operations is below 1e-12 relative, far
/// inside the 1e-9 guard band); everything near the boundary goes through
/// the rational comparison.
inline bool within_radius(const Rect& r, const std::vector<BigRational>& x,
                          const BigRational& c, std::uint64_t N, int d) {
  double approx = 0;
  for (int j = 0; j < d; ++j) {
    const double xj = to_double(x[j]);
    const double m = std::max(std::fabs(to_double(r.lo[j]) - xj),
                              std::fabs(to_double(r.hi[j]) - xj));
    approx += m * m;
  }
  const double cd = to_double(c);
  const double rhs_f =
      cd * cd * d * std::pow(static_cast<double>(N), -2.0 / d);
  if (approx < rhs_f * (1.0 - 1e-9)) return true;

  const BigRational d2 = max_sq_dist(r, x);
  BigRational lhs = BigRational(BigInt(N) * BigInt(N));
  BigRational rhs = 1;
  const BigRational cc = c * c * d;
  for (int j = 0; j < d; ++j) {
    lhs *= d2;
    rhs *= cc;
  }
  return lhs <= rhs;
}

/// |sum over the chosen half of the multiset - half the total| for a
/// {m, m+1}-valued list; bounded by B/4.
inline BigRational half_sum_deviation(const std::vector<std::int64_t>& counts,
                                      const std::vector<std::size_t>& subset) {
  const std::size_t B = counts.size();
  if (B == 0 || B % 2 != 0)
    throw std::invalid_argument("half_sum_deviation: list size must be even");
  const std::int64_t m = *std::min_element(counts.begin(), counts.end());
  for (auto c : counts)
    if (c != m && c != m + 1)
      throw std::invalid_argument("half_sum_deviation: values not in {m, m+1}");
  if (subset.size() != B / 2)
    throw std::invalid_argument("half_sum_deviation: subset size must be B/2");
  std::vector<bool> seen(B, false);
  BigInt part = 0;
  for (auto i : subset) {
    if (i >= B || seen[i])
      throw std::invalid_argument("half_sum_deviation: bad subset index");
    seen[i] = true;
    part += counts[i];
  }
  BigInt total = 0;
  for (auto c : counts) total += c;
  return abs(BigRational(part) - BigRational(total, 2));
}

}  // namespace eqmass

#endif  // EQMASS_GEOMETRY_HPP
