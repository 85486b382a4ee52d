#ifndef EQMASS_SEQUENCE_HPP
#define EQMASS_SEQUENCE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "eqmass/geometry.hpp"
#include "eqmass/rational.hpp"

namespace eqmass::sequence {

inline constexpr int kMaxDim = 16;  // b = 2^16 already exceeds desk scale

inline void check_dim(int d) {
  if (d < 2 || d > kMaxDim)
    throw std::invalid_argument("dimension must be in [2, 16]");
}

/// One point of the dyadic digital sequence: the base-2^d digits of n-1 are
/// spread bitwise across the d coordinates, one bit per digit per coordinate.
struct SequencePoint {
  std::uint64_t n = 0;
  std::vector<BigRational> coords;  // dyadic rationals in [0,1)
};

/// Length-l word over {0,...,2^d - 1} addressing the level-l dyadic cube
/// whose points share these leading base-2^d digits of n-1.
struct DigitWord {
  int d = 2;
  std::vector<std::uint32_t> digits;

  std::size_t level() const { return digits.size(); }

  std::uint64_t base() const { return std::uint64_t{1} << d; }

  /// Residue sum u_k * b^k identifying the word's congruence class mod b^l.
  BigInt residue() const {
    BigInt r = 0;
    BigInt p = 1;
    const BigInt b = base();
    for (auto dig : digits) {
      r += BigInt(dig) * p;
      p *= b;
    }
    return r;
  }
};

inline DigitWord word_from_residue(std::uint64_t r, std::size_t level, int d) {
  check_dim(d);
  DigitWord u;
  u.d = d;
  u.digits.reserve(level);
  const std::uint64_t b = std::uint64_t{1} << d;
  for (std::size_t k = 0; k < level; ++k) {
    u.digits.push_back(static_cast<std::uint32_t>(r % b));
    r /= b;
  }
  return u;
}

inline SequencePoint point(std::uint64_t n, int d) {
  check_dim(d);
  if (n < 1) throw std::invalid_argument("point: n must be >= 1");
  std::uint64_t m = n - 1;
  // digits of m in base b = 2^d, least significant first
  std::vector<std::uint32_t> digits;
  const std::uint64_t b = std::uint64_t{1} << d;
  for (std::uint64_t t = m; t > 0; t /= b)
    digits.push_back(static_cast<std::uint32_t>(t % b));

  SequencePoint p;
  p.n = n;
  p.coords.reserve(d);
  const std::size_t K = digits.size();
  const BigInt den = pow2_int(static_cast<std::int64_t>(K));
  for (int j = 0; j < d; ++j) {
    // coordinate j collects bit j-1...: bit (j) of each digit, weight 2^-(k+1)
    BigInt num = 0;
    for (std::size_t k = 0; k < K; ++k)
      if ((digits[k] >> j) & 1u) num += den >> (k + 1);
    p.coords.emplace_back(num, den);
  }
  return p;
}

inline std::vector<SequencePoint> prefix(std::uint64_t N, int d) {
  check_dim(d);
  if (N < 1) throw std::invalid_argument("prefix: N must be >= 1");
  std::vector<SequencePoint> pts;
  pts.reserve(N);
  for (std::uint64_t n = 1; n <= N; ++n) pts.push_back(point(n, d));
  return pts;
}

/// First `level` base-2^d digits of n-1; x_n lies in the cube C_u it names.
inline DigitWord word_of(std::uint64_t n, std::size_t level, int d) {
  check_dim(d);
  if (n < 1) throw std::invalid_argument("word_of: n must be >= 1");
  DigitWord u;
  u.d = d;
  u.digits.reserve(level);
  std::uint64_t m = n - 1;
  const std::uint64_t b = std::uint64_t{1} << d;
  for (std::size_t k = 0; k < level; ++k) {
    u.digits.push_back(static_cast<std::uint32_t>(m % b));
    m /= b;
  }
  return u;
}

/// #{1 <= n <= N : x_n in C_u}, via counting the residue class r_u mod b^l
/// inside {0,...,N-1}. O(level), no point enumeration.
inline std::uint64_t count_in_cube(std::uint64_t N, const DigitWord& u) {
  if (N < 1) throw std::invalid_argument("count_in_cube: N must be >= 1");
  const BigInt r = u.residue();
  if (r > BigInt(N - 1)) return 0;
  const BigInt bl = ipow(BigInt(u.base()), u.level());
  BigInt cnt = (BigInt(N - 1) - r) / bl + 1;
  return cnt.convert_to<std::uint64_t>();
}

/// The level-l dyadic cube addressed by u: side 2^-l, half-open.
inline Rect cube_rect(const DigitWord& u) {
  const int d = u.d;
  check_dim(d);
  const std::size_t l = u.level();
  const BigInt den = pow2_int(static_cast<std::int64_t>(l));
  Rect r;
  r.lo.reserve(d);
  r.hi.reserve(d);
  const BigRational side = pow2(-static_cast<std::int64_t>(l));
  for (int j = 0; j < d; ++j) {
    BigInt num = 0;
    for (std::size_t k = 0; k < l; ++k)
      if ((u.digits[k] >> j) & 1u) num += den >> (k + 1);
    BigRational lo(num, den);
    r.lo.push_back(lo);
    r.hi.push_back(lo + side);
  }
  return r;
}

}  // namespace eqmass::sequence

#endif  // EQMASS_SEQUENCE_HPP
