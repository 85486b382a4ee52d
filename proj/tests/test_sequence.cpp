#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "eqmass/sequence.hpp"

using namespace eqmass;
using namespace eqmass::sequence;

namespace {

BigRational rat(long long p, long long q) { return BigRational(p, q); }

// Independent brute-force count: evaluates each point's coordinates in
// floating point (exact here, all dyadics have far fewer than 53 bits) and
// tests containment against the cube bounds.
std::uint64_t brute_count(std::uint64_t N, const DigitWord& u) {
  const int d = u.d;
  const std::size_t l = u.level();
  std::vector<double> lo(d, 0.0);
  for (int j = 0; j < d; ++j)
    for (std::size_t k = 0; k < l; ++k)
      if ((u.digits[k] >> j) & 1u) lo[j] += std::ldexp(1.0, -static_cast<int>(k) - 1);
  const double side = std::ldexp(1.0, -static_cast<int>(l));

  std::uint64_t cnt = 0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    std::uint64_t m = n - 1;
    bool inside = true;
    for (int j = 0; j < d && inside; ++j) {
      double c = 0.0;
      int k = 0;
      for (std::uint64_t t = m; t > 0; t >>= d, ++k)
        if ((t >> j) & 1u) c += std::ldexp(1.0, -k - 1);
      inside = (c >= lo[j]) && (c < lo[j] + side);
    }
    if (inside) ++cnt;
  }
  return cnt;
}

}  // namespace

TEST_CASE("point evaluates the digit formula") {
  auto p = point(1, 2);
  REQUIRE(p.coords == std::vector<BigRational>{0, 0});

  p = point(6, 2);
  REQUIRE(p.coords == std::vector<BigRational>{rat(3, 4), 0});

  p = point(3, 3);
  REQUIRE(p.coords == std::vector<BigRational>{0, rat(1, 2), 0});

  for (std::uint64_t n : {1, 7, 100, 12345}) {
    auto q = point(n, 2);
    for (const auto& c : q.coords) {
      REQUIRE(c >= 0);
      REQUIRE(c < 1);
      // dyadic denominator
      BigInt den = denominator(c);
      REQUIRE((den & (den - 1)) == 0);
    }
  }

  REQUIRE_THROWS_AS(point(1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(point(0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(point(1, 17), std::invalid_argument);
}

TEST_CASE("prefix enumerates the sequence") {
  REQUIRE(prefix(1, 2).size() == 1);
  REQUIRE(prefix(1, 2)[0].coords == std::vector<BigRational>{0, 0});

  auto pts = prefix(4, 2);
  REQUIRE(pts[0].coords == std::vector<BigRational>{0, 0});
  REQUIRE(pts[1].coords == std::vector<BigRational>{rat(1, 2), 0});
  REQUIRE(pts[2].coords == std::vector<BigRational>{0, rat(1, 2)});
  REQUIRE(pts[3].coords == std::vector<BigRational>{rat(1, 2), rat(1, 2)});

  REQUIRE(prefix(5, 3)[4].coords == std::vector<BigRational>{0, 0, rat(1, 2)});
}

TEST_CASE("prefix points are pairwise distinct") {
  for (int d : {2, 3}) {
    auto pts = prefix(10000, d);
    std::set<std::vector<BigRational>> seen;
    for (const auto& p : pts) seen.insert(p.coords);
    REQUIRE(seen.size() == pts.size());
  }
}

TEST_CASE("word_of extracts leading base-b digits") {
  REQUIRE(word_of(1, 3, 2).digits == std::vector<std::uint32_t>{0, 0, 0});
  REQUIRE(word_of(6, 2, 2).digits == std::vector<std::uint32_t>{1, 1});
  REQUIRE(word_of(10, 1, 2).digits == std::vector<std::uint32_t>{1});
}

TEST_CASE("point lies in the cube of each of its words") {
  for (std::uint64_t n = 1; n <= 10000; n += 7) {
    auto p = point(n, 2);
    for (std::size_t l = 0; l <= 5; ++l)
      REQUIRE(contains_point(cube_rect(word_of(n, l, 2)), p.coords));
  }
}

TEST_CASE("count_in_cube spot values") {
  DigitWord u{2, {0}};
  REQUIRE(count_in_cube(5, u) == 2);
  for (std::uint32_t v = 0; v < 4; ++v)
    REQUIRE(count_in_cube(16, DigitWord{2, {v}}) == 4);
  REQUIRE(count_in_cube(1, DigitWord{2, {0, 0, 0}}) == 1);
  REQUIRE(count_in_cube(1, DigitWord{2, {1}}) == 0);
}

TEST_CASE("count_in_cube matches brute force and the floor/ceil law") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 120; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const std::uint64_t N = 1 + rng() % 100000;
    const std::size_t l = rng() % 7;
    DigitWord u;
    u.d = d;
    for (std::size_t k = 0; k < l; ++k)
      u.digits.push_back(static_cast<std::uint32_t>(rng() % (1u << d)));
    const std::uint64_t c = count_in_cube(N, u);
    REQUIRE(c == brute_count(N, u));
    BigInt bl = ipow(BigInt(u.base()), l);
    BigInt fl = BigInt(N) / bl;
    BigInt ce = (BigInt(N) + bl - 1) / bl;
    REQUIRE(BigInt(c) >= fl);
    REQUIRE(BigInt(c) <= ce);
  }
}

TEST_CASE("child counts sum to the parent count") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 50; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const std::uint64_t b = std::uint64_t{1} << d;
    const std::uint64_t N = 1 + rng() % 1000000;
    const std::size_t l = rng() % 4;
    DigitWord u;
    u.d = d;
    for (std::size_t k = 0; k < l; ++k)
      u.digits.push_back(static_cast<std::uint32_t>(rng() % b));
    std::uint64_t total = 0;
    for (std::uint64_t v = 0; v < b; ++v) {
      DigitWord child = u;
      child.digits.push_back(static_cast<std::uint32_t>(v));
      total += count_in_cube(N, child);
    }
    REQUIRE(total == count_in_cube(N, u));
  }
}

TEST_CASE("cube_rect spot values") {
  Rect q = cube_rect(DigitWord{2, {}});
  REQUIRE(q.lo == std::vector<BigRational>{0, 0});
  REQUIRE(q.hi == std::vector<BigRational>{1, 1});

  Rect r = cube_rect(DigitWord{2, {1}});
  REQUIRE(r.lo == std::vector<BigRational>{rat(1, 2), 0});
  REQUIRE(r.hi == std::vector<BigRational>{1, rat(1, 2)});

  r = cube_rect(DigitWord{2, {0, 3}});
  REQUIRE(r.lo == std::vector<BigRational>{rat(1, 4), rat(1, 4)});
  REQUIRE(r.hi == std::vector<BigRational>{rat(1, 2), rat(1, 2)});
}
