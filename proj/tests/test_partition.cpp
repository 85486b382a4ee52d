#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "eqmass/partition.hpp"
#include "eqmass/serialize.hpp"

using namespace eqmass;
using namespace eqmass::partition;

namespace {

BigRational rat(long long p, long long q) { return BigRational(p, q); }

Rect unit_cube(int d) {
  Rect r;
  r.lo.assign(d, BigRational(0));
  r.hi.assign(d, BigRational(1));
  return r;
}

}  // namespace

TEST_CASE("choose_level") {
  REQUIRE(choose_level(1, 2) == 0);
  REQUIRE(choose_level(17, 2) == 3);
  REQUIRE(choose_level(64, 2) == 3);
  REQUIRE(choose_level(65, 2) == 4);
  REQUIRE(choose_level(100, 3) == 3);

  // 2^-L <= N^-1/d <= 2 * 2^-L, i.e. 2^(dL) >= N and (L >= 1) N > 2^(d(L-1))
  std::mt19937_64 rng(23);
  for (int it = 0; it < 200; ++it) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const std::uint64_t N = 1 + rng() % 1000000;
    const int L = choose_level(N, d);
    REQUIRE(pow2_int(static_cast<std::int64_t>(d) * L) >= N);
    if (L >= 1) REQUIRE(BigInt(N) > pow2_int(static_cast<std::int64_t>(d) * (L - 1)));
  }
}

TEST_CASE("drift_schedule spot values for N=100, d=2") {
  auto s = drift_schedule(100, 2);
  REQUIRE(s.L == 4);
  REQUIRE(s.delta.size() == 2);
  REQUIRE(s.delta[0] == rat(1, 50));
  REQUIRE(s.delta[1] == rat(1, 25));
  REQUIRE(s.S.back() == rat(3, 50));
  REQUIRE(s.S.back() <= rat(1, 8));  // 2 * 2^-L
}

TEST_CASE("drift_schedule with a single delta") {
  // smallest non-fallback range for d=2 is 17..64, where L = 3 and the
  // schedule carries only Delta_0 = 2/N
  auto s = drift_schedule(17, 2);
  REQUIRE(s.L == 3);
  REQUIRE(s.delta.size() == 1);
  REQUIRE(s.delta[0] == rat(2, 17));
  REQUIRE(s.S.back() == rat(2, 17));
}

TEST_CASE("drift_schedule rejects the fallback range") {
  REQUIRE_THROWS_AS(drift_schedule(16, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(drift_schedule(1, 2), std::invalid_argument);
}

TEST_CASE("drift_schedule invariants hold exactly") {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 100; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const std::uint64_t b2 = std::uint64_t{1} << (2 * d);
    const std::uint64_t N = b2 + 1 + rng() % 1000000;
    auto s = drift_schedule(N, d);
    for (std::size_t l = 0; l < s.sigma.size(); ++l) {
      REQUIRE(s.sigma[l] == pow2(-static_cast<std::int64_t>(l)) - 2 * s.S[l]);
      REQUIRE(s.sigma[l] >= rat(3, 4) * pow2(-static_cast<std::int64_t>(l)));
      REQUIRE(s.delta[l] <= s.sigma[l] / 6);
    }
    REQUIRE(s.S.back() <= 2 * pow2(-s.L));
  }
}

TEST_CASE("split_children with uniform counts lands on dyadic subcubes") {
  // N = b^L: every cut is a midpoint cut by symmetry
  const std::uint64_t N = 64;
  std::vector<std::uint64_t> counts(4, 16);
  auto children = split_children(unit_cube(2), counts, N);
  REQUIRE(children.size() == 4);
  REQUIRE(children[0].hi == std::vector<BigRational>{rat(1, 2), rat(1, 2)});
  REQUIRE(children[1].lo == std::vector<BigRational>{rat(1, 2), 0});
  REQUIRE(children[2].lo == std::vector<BigRational>{0, rat(1, 2)});
  REQUIRE(children[3].lo == std::vector<BigRational>{rat(1, 2), rat(1, 2)});
}

TEST_CASE("split_children first cut follows the partial counts") {
  // d=2, counts (2,1,1,1), N=5: digits 0 and 2 have first bit 0, so the
  // coordinate-1 cut targets volume 3/5
  std::vector<std::uint64_t> counts{2, 1, 1, 1};
  auto children = split_children(unit_cube(2), counts, 5);
  REQUIRE(children[0].hi[0] == rat(3, 5));
  REQUIRE(children[2].hi[0] == rat(3, 5));
  REQUIRE(children[1].lo[0] == rat(3, 5));
  for (std::uint64_t v = 0; v < 4; ++v)
    REQUIRE(volume(children[v]) == BigRational(counts[v], 5));
}

TEST_CASE("split_children rejects zero counts and volume mismatch") {
  REQUIRE_THROWS_AS(split_children(unit_cube(2), {2, 0, 2, 1}, 5),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(split_children(unit_cube(2), {1, 1, 1, 1}, 5),
                    std::invalid_argument);
}

TEST_CASE("rectangle_partition for N=100, d=2") {
  BuildTrace trace;
  auto rp = rectangle_partition(100, 2, &trace);
  REQUIRE(rp.L == 4);
  REQUIRE(rp.rects.size() == 16);
  BigRational total = 0;
  for (std::size_t r = 0; r < rp.rects.size(); ++r) {
    BigRational v = volume(rp.rects[r]);
    REQUIRE((v == rat(6, 100) || v == rat(7, 100)));
    REQUIRE(v == BigRational(rp.counts[r], 100));
    total += v;
  }
  REQUIRE(total == 1);
  // endpoint deviations at the terminal level stay within S_2 = 3/50
  REQUIRE(trace.max_endpoint_dev.back() <= rat(3, 50));
  // cuts stay within their level budgets
  auto s = drift_schedule(100, 2);
  for (std::size_t l = 0; l < trace.max_cut_offset.size(); ++l)
    REQUIRE(trace.max_cut_offset[l] <= s.delta[l]);
}

TEST_CASE("rectangle_partition reproduces dyadic cubes when N = b^L") {
  auto rp = rectangle_partition(256, 2);
  REQUIRE(rp.rects.size() == 16);
  for (std::uint64_t r = 0; r < 16; ++r) {
    REQUIRE(rp.counts[r] == 16);
    Rect cube = sequence::cube_rect(sequence::word_from_residue(r, 2, 2));
    REQUIRE(rp.rects[r] == cube);
  }
}

TEST_CASE("terminal_slabs") {
  auto slabs = terminal_slabs(unit_cube(2), 4, 4);
  REQUIRE(slabs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(slabs[i].lo[0] == rat(i, 4));
    REQUIRE(slabs[i].hi[0] == rat(i + 1, 4));
  }

  Rect r;
  r.lo = {0, 0};
  r.hi = {rat(3, 5), rat(1, 2)};
  slabs = terminal_slabs(r, 3, 10);
  REQUIRE(slabs[0].hi[0] == rat(1, 5));
  REQUIRE(slabs[1].hi[0] == rat(2, 5));
  REQUIRE(slabs[2].hi[0] == rat(3, 5));

  REQUIRE(terminal_slabs(r, 3, 10).size() == 3);
  REQUIRE_THROWS_AS(terminal_slabs(r, 4, 10), std::invalid_argument);

  auto one = terminal_slabs(r, 3, 10);
  Rect single;
  single.lo = {0};
  single.hi = {rat(1, 7)};
  // M = 1 leaves the rectangle unchanged
  Rect sq;
  sq.lo = {0, 0};
  sq.hi = {rat(1, 2), rat(1, 2)};
  auto same = terminal_slabs(sq, 1, 4);
  REQUIRE(same.size() == 1);
  REQUIRE(same[0] == sq);
}

TEST_CASE("build_partition trivial and fallback paths") {
  auto p1 = build_partition(1, 2);
  REQUIRE(p1.fallback);
  REQUIRE(p1.cells.size() == 1);
  REQUIRE(p1.cells[0].rect == unit_cube(2));
  REQUIRE(verify_partition(p1).ok());

  auto p4 = build_partition(4, 2);
  REQUIRE(p4.fallback);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(p4.cells[i].rect.lo[0] == rat(i, 4));
    REQUIRE(p4.cells[i].rect.hi[0] == rat(i + 1, 4));
  }
  REQUIRE(verify_partition(p4, true).ok());
}

TEST_CASE("build_partition constructs verified partitions") {
  for (std::uint64_t N : {17, 100, 333, 1000}) {
    auto p = build_partition(N, 2);
    REQUIRE_FALSE(p.fallback);
    auto rep = verify_partition(p);
    CAPTURE(N);
    for (const auto& c : rep.checks) {
      CAPTURE(c.name, c.witness);
      REQUIRE(c.pass);
    }
    // oblivious mode certifies the same partition without provenance
    REQUIRE(verify_partition(p, true).ok());
  }
  REQUIRE(verify_partition(build_partition(500, 3)).ok());
}

TEST_CASE("points within a terminal word are matched in index order") {
  auto p = build_partition(100, 2);
  const std::uint64_t words = 16;
  std::vector<std::vector<const Cell*>> by_word(words);
  for (const auto& c : p.cells) by_word[(c.n - 1) % words].push_back(&c);
  for (const auto& group : by_word)
    for (std::size_t i = 1; i < group.size(); ++i) {
      REQUIRE(group[i - 1]->n < group[i]->n);  // cells stored sorted by n
      REQUIRE(group[i - 1]->rect.lo[0] < group[i]->rect.lo[0]);
    }
}

TEST_CASE("verify_partition flags a tampered cell") {
  auto p = build_partition(100, 2);
  // shrink one rectangle by half a cell volume
  Rect& r = p.cells[41].rect;
  r.hi[0] = (r.lo[0] + r.hi[0]) / 2;
  auto rep = verify_partition(p, true);
  REQUIRE_FALSE(rep.ok());
  bool volume_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "volume" && !c.pass) {
      volume_failed = true;
      REQUIRE(c.witness.find("42") != std::string::npos);
    }
  REQUIRE(volume_failed);
}

TEST_CASE("verify_partition flags overlapping cells in oblivious mode") {
  auto p = build_partition(50, 2);
  p.cells[7].rect = p.cells[8].rect;
  auto rep = verify_partition(p, true);
  bool disjoint_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "disjoint" && !c.pass) disjoint_failed = true;
  REQUIRE(disjoint_failed);
}

TEST_CASE("build_partition is deterministic") {
  for (std::uint64_t N : {4, 100, 1234}) {
    auto a = serialize::serialize_partition(build_partition(N, 2));
    auto b = serialize::serialize_partition(build_partition(N, 2));
    REQUIRE(a == b);
  }
}

TEST_CASE("serialization round trip is bit identical") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 5; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const std::uint64_t N = 1 + rng() % 500;
    auto p = build_partition(N, d);
    auto text = serialize::serialize_partition(p);
    std::vector<std::vector<BigRational>> stored;
    auto q = serialize::parse_partition(text, &stored);
    REQUIRE(q.N == p.N);
    REQUIRE(q.d == p.d);
    REQUIRE(q.L == p.L);
    REQUIRE(q.fallback == p.fallback);
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      REQUIRE(q.cells[i].n == p.cells[i].n);
      REQUIRE(q.cells[i].rect == p.cells[i].rect);
    }
    REQUIRE(serialize::check_stored_points(q, stored).pass);
    REQUIRE(serialize::serialize_partition(q) == text);
  }
}

TEST_CASE("parse_partition rejects malformed input") {
  REQUIRE_THROWS_AS(serialize::parse_partition("not json"),
                    serialize::ParseError);
  REQUIRE_THROWS_AS(serialize::parse_partition("{\"d\": 2}"),
                    serialize::ParseError);
  auto text = serialize::serialize_partition(build_partition(4, 2));
  auto broken = text;
  broken.replace(broken.find("1/4"), 3, "1/x");
  REQUIRE_THROWS_AS(serialize::parse_partition(broken), serialize::ParseError);
}
