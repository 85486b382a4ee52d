#ifndef EQMASS_PARTITION_HPP
#define EQMASS_PARTITION_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eqmass/geometry.hpp"
#include "eqmass/rational.hpp"
#include "eqmass/sequence.hpp"

namespace eqmass::partition {

using sequence::DigitWord;
using sequence::SequencePoint;

/// L = min{l >= 0 : (2^d)^l >= N}; satisfies 2^-L <= N^(-1/d) <= 2*2^-L.
inline int choose_level(std::uint64_t N, int d) {
  sequence::check_dim(d);
  if (N < 1) throw std::invalid_argument("choose_level: N must be >= 1");
  int L = 0;
  BigInt p = 1;
  while (p < N) {
    p <<= d;
    ++L;
  }
  return L;
}

/// Per-level cut displacement budgets Delta_l, their running sums S_l, and
/// the minimal side lengths sigma_l = 2^-l - 2 S_l.
struct DriftSchedule {
  int d = 0;
  std::uint64_t N = 0;
  int L = 0;
  std::vector<BigRational> delta;  // Delta_0 .. Delta_{L-3}
  std::vector<BigRational> S;      // S_0 .. S_{L-2}
  std::vector<BigRational> sigma;  // sigma_0 .. sigma_{L-3}
};

inline DriftSchedule drift_schedule(std::uint64_t N, int d) {
  sequence::check_dim(d);
  const BigInt b2 = BigInt(1) << (2 * d);
  if (BigInt(N) <= b2)
    throw std::invalid_argument("drift_schedule: requires N > b^2");
  DriftSchedule s;
  s.d = d;
  s.N = N;
  s.L = choose_level(N, d);
  s.S.push_back(BigRational(0));
  for (int l = 0; l <= s.L - 3; ++l) {
    BigRational delta(pow2_int(2 * d - 3 + static_cast<std::int64_t>(l) * (d - 1)),
                      BigInt(N));
    s.delta.push_back(delta);
    s.sigma.push_back(pow2(-l) - 2 * s.S.back());
    s.S.push_back(s.S.back() + delta);
  }
  return s;
}

/// Splits a parent rectangle into its 2^d children by d sequential binary
/// cuts, coordinate k carrying bit k of the child digit. Each cut hits the
/// exact partial-count target volume, so child v gets volume counts[v]/N.
inline std::vector<Rect> split_children(const Rect& parent,
                                        const std::vector<std::uint64_t>& counts,
                                        std::uint64_t N,
                                        BigRational* max_cut_offset = nullptr) {
  const int d = parent.dim();
  const std::size_t b = std::size_t{1} << d;
  if (counts.size() != b)
    throw std::invalid_argument("split_children: need 2^d child counts");
  std::uint64_t total = 0;
  for (auto c : counts) {
    if (c == 0) throw std::invalid_argument("split_children: zero child count");
    total += c;
  }
  if (volume(parent) != BigRational(BigInt(total), BigInt(N)))
    throw std::invalid_argument("split_children: parent volume != M(u)/N");

  // nodes keyed by the bit-prefix eta, packed with eta_1 in bit 0
  std::vector<Rect> nodes{parent};
  for (int k = 0; k < d; ++k) {
    std::vector<Rect> next(std::size_t{1} << (k + 1));
    const std::size_t mask = (std::size_t{1} << (k + 1)) - 1;
    for (std::size_t eta = 0; eta < nodes.size(); ++eta) {
      std::uint64_t m0 = 0;  // children consistent with eta whose bit k is 0
      for (std::size_t v = 0; v < b; ++v)
        if ((v & mask) == eta) m0 += counts[v];
      CutResult c = cut(nodes[eta], k, BigRational(BigInt(m0), BigInt(N)));
      if (max_cut_offset) {
        BigRational mid = (nodes[eta].lo[k] + nodes[eta].hi[k]) / 2;
        BigRational off = abs(c.t - mid);
        if (off > *max_cut_offset) *max_cut_offset = off;
      }
      next[eta] = std::move(c.left);
      next[eta | (std::size_t{1} << k)] = std::move(c.right);
    }
    nodes = std::move(next);
  }
  return nodes;  // node at index v is the child for digit v
}

/// Exact per-level witnesses recorded during construction, for checking the
/// drift estimates: max |t - midpoint| among cuts splitting level-l parents
/// (index l = 0..L-3) and max endpoint deviation from the dyadic cube at
/// each level (index l = 0..L-2).
struct BuildTrace {
  std::vector<BigRational> max_cut_offset;
  std::vector<BigRational> max_endpoint_dev;
};

struct RectanglePartition {
  int d = 0;
  std::uint64_t N = 0;
  int L = 0;
  DriftSchedule schedule;
  // indexed by the word residue at level L-2
  std::vector<Rect> rects;
  std::vector<std::uint64_t> counts;
};

namespace detail {

// closed-form count of residue class r mod b^l within {0,...,N-1}
inline std::uint64_t residue_count(std::uint64_t N, std::uint64_t r,
                                   std::uint64_t bl) {
  if (r > N - 1) return 0;
  return (N - 1 - r) / bl + 1;
}

inline BigRational endpoint_deviation(const Rect& r, std::uint64_t residue,
                                      std::size_t level, int d) {
  Rect cube = sequence::cube_rect(sequence::word_from_residue(residue, level, d));
  BigRational dev = 0;
  for (int j = 0; j < d; ++j) {
    BigRational a = abs(r.lo[j] - cube.lo[j]);
    BigRational b = abs(r.hi[j] - cube.hi[j]);
    dev = std::max(dev, std::max(a, b));
  }
  return dev;
}

}  // namespace detail

/// Level-by-level construction of the near-dyadic rectangle family down to
/// level L-2: each rectangle R_u has volume M(u)/N and endpoints within
/// S_{L-2} of the dyadic cube C_u.
inline RectanglePartition rectangle_partition(std::uint64_t N, int d,
                                              BuildTrace* trace = nullptr) {
  RectanglePartition out;
  out.d = d;
  out.N = N;
  out.schedule = drift_schedule(N, d);  // rejects N <= b^2
  out.L = out.schedule.L;
  const int last = out.L - 2;
  const std::uint64_t b = std::uint64_t{1} << d;

  if (trace) {
    trace->max_cut_offset.assign(last, BigRational(0));
    trace->max_endpoint_dev.assign(last + 1, BigRational(0));
  }

  Rect q;
  q.lo.assign(d, BigRational(0));
  q.hi.assign(d, BigRational(1));
  std::vector<Rect> level_rects{q};

  std::uint64_t bl = 1;  // b^l
  for (int l = 0; l < last; ++l) {
    std::vector<Rect> next(level_rects.size() * b);
    const std::uint64_t bl1 = bl * b;
    for (std::uint64_t r = 0; r < level_rects.size(); ++r) {
      std::vector<std::uint64_t> counts(b);
      for (std::uint64_t v = 0; v < b; ++v)
        counts[v] = detail::residue_count(N, r + v * bl, bl1);
      BigRational* off = trace ? &trace->max_cut_offset[l] : nullptr;
      std::vector<Rect> children = split_children(level_rects[r], counts, N, off);
      for (std::uint64_t v = 0; v < b; ++v) {
        const std::uint64_t rv = r + v * bl;
        if (trace) {
          BigRational dev = detail::endpoint_deviation(children[v], rv, l + 1, d);
          if (dev > trace->max_endpoint_dev[l + 1])
            trace->max_endpoint_dev[l + 1] = dev;
        }
        next[rv] = std::move(children[v]);
      }
    }
    level_rects = std::move(next);
    bl = bl1;
  }

  out.rects = std::move(level_rects);
  out.counts.resize(out.rects.size());
  for (std::uint64_t r = 0; r < out.counts.size(); ++r)
    out.counts[r] = detail::residue_count(N, r, bl);
  return out;
}

/// Slices R along coordinate 1 into M half-open slabs of volume 1/N each,
/// in increasing coordinate order.
inline std::vector<Rect> terminal_slabs(const Rect& r, std::uint64_t M,
                                        std::uint64_t N) {
  if (M < 1) throw std::invalid_argument("terminal_slabs: M must be >= 1");
  if (volume(r) != BigRational(BigInt(M), BigInt(N)))
    throw std::invalid_argument("terminal_slabs: volume != M/N");
  const BigRational width = (r.hi[0] - r.lo[0]) / BigInt(M);
  std::vector<Rect> slabs;
  slabs.reserve(M);
  for (std::uint64_t i = 0; i < M; ++i) {
    Rect s = r;
    s.lo[0] = r.lo[0] + width * BigInt(i);
    s.hi[0] = (i + 1 == M) ? r.hi[0] : r.lo[0] + width * BigInt(i + 1);
    slabs.push_back(std::move(s));
  }
  return slabs;
}

/// One transport cell: point index n owns the half-open box rect of
/// volume exactly 1/N.
struct Cell {
  std::uint64_t n = 0;
  Rect rect;
};

struct TransportPartition {
  int d = 0;
  std::uint64_t N = 0;
  int L = 0;
  bool fallback = false;  // true iff N <= b^2
  std::vector<Cell> cells;  // sorted by n
};

/// Builds the equal-mass transport partition: for N <= b^2, N coordinate-1
/// slabs of Q assigned in index order; otherwise the rectangle family at
/// level L-2 is sliced into terminal slabs and matched to the points of each
/// cube, index order against coordinate-1 order.
inline TransportPartition build_partition(std::uint64_t N, int d,
                                          BuildTrace* trace = nullptr) {
  sequence::check_dim(d);
  if (N < 1) throw std::invalid_argument("build_partition: N must be >= 1");
  TransportPartition p;
  p.d = d;
  p.N = N;
  p.L = choose_level(N, d);
  const BigInt b2 = BigInt(1) << (2 * d);
  p.fallback = BigInt(N) <= b2;

  if (p.fallback) {
    p.cells.reserve(N);
    for (std::uint64_t i = 1; i <= N; ++i) {
      Cell c;
      c.n = i;
      c.rect.lo.assign(d, BigRational(0));
      c.rect.hi.assign(d, BigRational(1));
      c.rect.lo[0] = BigRational(BigInt(i - 1), BigInt(N));
      c.rect.hi[0] = BigRational(BigInt(i), BigInt(N));
      p.cells.push_back(std::move(c));
    }
    return p;
  }

  RectanglePartition rp = rectangle_partition(N, d, trace);
  const std::uint64_t words = rp.rects.size();  // b^(L-2)

  // bucket point indices by terminal word residue; each bucket is in
  // increasing index order by construction
  std::vector<std::vector<std::uint64_t>> buckets(words);
  for (std::uint64_t n = 1; n <= N; ++n) buckets[(n - 1) % words].push_back(n);

  p.cells.resize(N);
  for (std::uint64_t r = 0; r < words; ++r) {
    const std::uint64_t M = rp.counts[r];
    if (buckets[r].size() != M)
      throw std::logic_error("build_partition: point/slab count mismatch");
    std::vector<Rect> slabs = terminal_slabs(rp.rects[r], M, N);
    for (std::uint64_t i = 0; i < M; ++i) {
      const std::uint64_t n = buckets[r][i];
      p.cells[n - 1].n = n;
      p.cells[n - 1].rect = std::move(slabs[i]);
    }
  }
  return p;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string witness;  // empty on pass
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

// Reconstructs, per terminal word, the bounding rectangle of its cells and
// checks the cells tile it exactly along coordinate 1 (shared side intervals,
// contiguous slabs). Returns false with a witness on structural failure.
struct WordGroup {
  std::vector<const Cell*> cells;  // sorted by lo[0]
  Rect hull;
};

inline bool group_terminal_words(const TransportPartition& p,
                                 std::vector<WordGroup>& groups,
                                 std::string& witness) {
  const std::uint64_t words =
      ipow(BigInt(std::uint64_t{1} << p.d), p.L - 2).convert_to<std::uint64_t>();
  groups.assign(words, WordGroup{});
  for (const auto& c : p.cells) {
    if (c.rect.dim() != p.d) {
      witness = "cell " + std::to_string(c.n) + " has bad dimension";
      return false;
    }
    groups[(c.n - 1) % words].cells.push_back(&c);
  }
  for (std::uint64_t r = 0; r < words; ++r) {
    auto& g = groups[r];
    if (g.cells.empty()) {
      witness = "terminal word " + std::to_string(r) + " has no cells";
      return false;
    }
    // sort by a double key first: rounding is monotone, so unequal keys
    // order the rationals correctly, and ties fall back to exact compare
    std::vector<std::pair<double, const Cell*>> keyed;
    keyed.reserve(g.cells.size());
    for (const Cell* c : g.cells)
      keyed.emplace_back(to_double(c->rect.lo[0]), c);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return a.second->rect.lo[0] < b.second->rect.lo[0];
              });
    for (std::size_t i = 0; i < keyed.size(); ++i) g.cells[i] = keyed[i].second;
    g.hull = g.cells.front()->rect;
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
      const Rect& rc = g.cells[i]->rect;
      for (int j = 1; j < p.d; ++j)
        if (!rat_eq(rc.lo[j], g.hull.lo[j]) || !rat_eq(rc.hi[j], g.hull.hi[j])) {
          witness = "cell " + std::to_string(g.cells[i]->n) +
                    " side intervals differ within its terminal word";
          return false;
        }
      if (i > 0 && !rat_eq(rc.lo[0], g.cells[i - 1]->rect.hi[0])) {
        witness = "cells " + std::to_string(g.cells[i - 1]->n) + " and " +
                  std::to_string(g.cells[i]->n) +
                  " are not contiguous along coordinate 1";
        return false;
      }
    }
    g.hull.hi[0] = g.cells.back()->rect.hi[0];
  }
  return true;
}

}  // namespace detail

/// Exact verification of every Theorem-style invariant of a partition:
/// per-cell volume 1/N, pairwise disjointness, full coverage of Q, the
/// radius bound (c = 6 by default), and the endpoint drift bounds at the
/// terminal level. In oblivious mode disjointness is checked pairwise with
/// no reference to how the partition was built.
inline VerifyReport verify_partition(const TransportPartition& p,
                                     bool oblivious = false,
                                     const BigRational& c = BigRational(6)) {
  VerifyReport rep;
  auto add = [&rep](const std::string& name, bool pass,
                    const std::string& witness = "") {
    rep.checks.push_back({name, pass, pass ? "" : witness});
  };

  // metadata consistency; later checks rely on it, so bail out on failure
  {
    bool pass = true;
    std::string w;
    if (p.d < 2 || p.d > sequence::kMaxDim || p.N < 1) {
      pass = false;
      w = "bad (d, N)";
    } else if (p.L != choose_level(p.N, p.d)) {
      pass = false;
      w = "stored L does not match N";
    } else if (p.fallback != (BigInt(p.N) <= (BigInt(1) << (2 * p.d)))) {
      pass = false;
      w = "fallback flag inconsistent with N";
    } else if (p.cells.size() != p.N) {
      pass = false;
      w = "cell count != N";
    } else {
      std::vector<bool> seen(p.N, false);
      for (const auto& cl : p.cells) {
        if (cl.n < 1 || cl.n > p.N || seen[cl.n - 1]) {
          pass = false;
          w = "cell indices are not a permutation of 1..N";
          break;
        }
        seen[cl.n - 1] = true;
      }
    }
    add("metadata", pass, w);
    if (!pass) return rep;
  }

  const BigRational cell_vol(BigInt(1), BigInt(p.N));

  // terminal word groups, shared by the volume fast path, the tree-mode
  // disjointness check, and the drift check
  std::vector<detail::WordGroup> groups;
  bool groups_ok = false;
  std::string groups_witness;
  if (!p.fallback)
    groups_ok = detail::group_terminal_words(p, groups, groups_witness);

  // per-cell volumes, shared by the volume and coverage checks; -1 marks a
  // degenerate rectangle. When the terminal words grouped cleanly, every
  // cell of a word shares the hull's side intervals exactly, so the side
  // product is computed once per word.
  std::vector<BigRational> vols(p.cells.size(), BigRational(-1));
  if (groups_ok) {
    for (const auto& g : groups) {
      BigRational side = 1;
      bool sides_ok = true;
      for (int j = 1; j < p.d; ++j) {
        BigRational w = g.hull.hi[j] - g.hull.lo[j];
        if (!(w > 0)) sides_ok = false;
        side *= w;
      }
      for (const Cell* cl : g.cells) {
        const std::size_t i = static_cast<std::size_t>(cl - p.cells.data());
        BigRational w0 = cl->rect.hi[0] - cl->rect.lo[0];
        if (sides_ok && w0 > 0) vols[i] = w0 * side;
      }
    }
  } else {
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const Rect& r = p.cells[i].rect;
      if (r.dim() == p.d && r.valid()) vols[i] = volume(r);
    }
  }

  // (a) volumes
  {
    bool pass = true;
    std::string w;
    for (std::size_t i = 0; i < p.cells.size(); ++i)
      if (!rat_eq(vols[i], cell_vol)) {
        pass = false;
        w = "cell " + std::to_string(p.cells[i].n) + " has volume != 1/N";
        break;
      }
    add("volume", pass, w);
  }

  // (c) coverage: total mass 1 and containment in Q
  {
    bool pass = true;
    std::string w;
    BigRational total = 0;
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const auto& cl = p.cells[i];
      total += vols[i];
      for (int j = 0; j < std::min(p.d, cl.rect.dim()); ++j)
        if (cl.rect.lo[j] < 0 || cl.rect.hi[j] > 1) {
          pass = false;
          w = "cell " + std::to_string(cl.n) + " leaves the unit cube";
        }
    }
    if (pass && total != 1) {
      pass = false;
      w = "total volume " + eqmass::to_string(total) + " != 1";
    }
    add("coverage", pass, w);
  }

  // (b) pairwise disjointness
  {
    bool pass = true;
    std::string w;
    if (oblivious) {
      for (std::size_t i = 0; i < p.cells.size() && pass; ++i)
        for (std::size_t j = i + 1; j < p.cells.size(); ++j)
          if (!disjoint(p.cells[i].rect, p.cells[j].rect)) {
            pass = false;
            w = "cells " + std::to_string(p.cells[i].n) + " and " +
                std::to_string(p.cells[j].n) + " overlap";
            break;
          }
    } else if (p.fallback) {
      // N slabs of Q: sort by lo[0] and sweep
      std::vector<const Cell*> order;
      for (const auto& cl : p.cells) order.push_back(&cl);
      std::sort(order.begin(), order.end(), [](const Cell* a, const Cell* b) {
        return a->rect.lo[0] < b->rect.lo[0];
      });
      for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i]->rect.lo[0] < order[i - 1]->rect.hi[0]) {
          pass = false;
          w = "cells " + std::to_string(order[i - 1]->n) + " and " +
              std::to_string(order[i]->n) + " overlap";
          break;
        }
    } else {
      // tree mode: cells of a terminal word tile its rectangle, and the
      // reconstructed rectangles must match the deterministic rebuild,
      // which is pairwise disjoint by construction
      pass = groups_ok;
      w = groups_witness;
      if (pass) {
        RectanglePartition rp = rectangle_partition(p.N, p.d);
        auto rect_eq = [d = p.d](const Rect& a, const Rect& b) {
          for (int j = 0; j < d; ++j)
            if (!rat_eq(a.lo[j], b.lo[j]) || !rat_eq(a.hi[j], b.hi[j]))
              return false;
          return true;
        };
        for (std::uint64_t r = 0; r < groups.size(); ++r)
          if (!rect_eq(groups[r].hull, rp.rects[r])) {
            pass = false;
            w = "terminal word " + std::to_string(r) +
                " does not tile its rectangle";
            break;
          }
      }
    }
    add("disjoint", pass, w);
  }

  // (d) radius bound
  {
    bool pass = true;
    std::string w;
    for (const auto& cl : p.cells) {
      SequencePoint x = sequence::point(cl.n, p.d);
      if (!within_radius(cl.rect, x.coords, c, p.N, p.d)) {
        pass = false;
        w = "cell " + std::to_string(cl.n) + " exceeds the radius bound";
        break;
      }
    }
    add("radius", pass, w);
  }

  // (e) endpoint drift at level L-2 (non-fallback only)
  if (!p.fallback) {
    bool pass = groups_ok;
    std::string w = groups_witness;
    if (pass) {
      const DriftSchedule sched = drift_schedule(p.N, p.d);
      const BigRational& bound = sched.S.back();  // S_{L-2}
      for (std::uint64_t r = 0; r < groups.size(); ++r) {
        BigRational dev =
            detail::endpoint_deviation(groups[r].hull, r, p.L - 2, p.d);
        if (dev > bound) {
          pass = false;
          w = "terminal word " + std::to_string(r) + " drifts by " +
              eqmass::to_string(dev) + " > S_{L-2}";
          break;
        }
      }
    }
    add("drift", pass, w);
  }

  return rep;
}

}  // namespace eqmass::partition

#endif  // EQMASS_PARTITION_HPP
