#ifndef EQMASS_SERIALIZE_HPP
#define EQMASS_SERIALIZE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqmass/partition.hpp"
#include "eqmass/rational.hpp"
#include "eqmass/sequence.hpp"

namespace eqmass::serialize {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Serialized partition document: metadata plus per-cell records. Rationals
/// travel as "p/q" decimal strings so the round trip is bit-identical; no
/// floating point appears in the file.
inline nlohmann::json to_json(const partition::TransportPartition& p) {
  nlohmann::json doc;
  doc["d"] = p.d;
  doc["N"] = p.N;
  doc["L"] = p.L;
  doc["fallback"] = p.fallback;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : p.cells) {
    nlohmann::json cell;
    cell["n"] = c.n;
    sequence::SequencePoint x = sequence::point(c.n, p.d);
    nlohmann::json pt = nlohmann::json::array();
    for (const auto& v : x.coords) pt.push_back(eqmass::to_string(v));
    cell["point"] = std::move(pt);
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (const auto& v : c.rect.lo) lo.push_back(eqmass::to_string(v));
    for (const auto& v : c.rect.hi) hi.push_back(eqmass::to_string(v));
    cell["lo"] = std::move(lo);
    cell["hi"] = std::move(hi);
    cells.push_back(std::move(cell));
  }
  doc["cells"] = std::move(cells);
  return doc;
}

inline std::string serialize_partition(const partition::TransportPartition& p) {
  return to_json(p).dump(1);
}

/// Parses a partition document. Structural or lexical problems throw
/// ParseError; semantic problems (wrong volumes, drifted rectangles, stored
/// point coordinates that disagree with the sequence) are left to
/// verify_partition / stored-point checks.
inline partition::TransportPartition parse_partition(
    const std::string& text,
    std::vector<std::vector<BigRational>>* stored_points = nullptr) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  partition::TransportPartition p;
  try {
    p.d = doc.at("d").get<int>();
    p.N = doc.at("N").get<std::uint64_t>();
    p.L = doc.at("L").get<int>();
    p.fallback = doc.at("fallback").get<bool>();
    const auto& cells = doc.at("cells");
    if (!cells.is_array()) throw ParseError("'cells' is not an array");
    if (stored_points) stored_points->clear();
    for (const auto& cj : cells) {
      partition::Cell c;
      c.n = cj.at("n").get<std::uint64_t>();
      auto read_vec = [&](const char* key) {
        std::vector<BigRational> out;
        for (const auto& s : cj.at(key)) {
          if (!s.is_string()) throw ParseError("rational entry is not a string");
          out.push_back(parse_rational(s.get<std::string>()));
        }
        return out;
      };
      c.rect.lo = read_vec("lo");
      c.rect.hi = read_vec("hi");
      if (static_cast<int>(c.rect.lo.size()) != p.d ||
          static_cast<int>(c.rect.hi.size()) != p.d)
        throw ParseError("rect dimension mismatch");
      std::vector<BigRational> pt = read_vec("point");
      if (static_cast<int>(pt.size()) != p.d)
        throw ParseError("point dimension mismatch");
      if (stored_points) stored_points->push_back(std::move(pt));
      p.cells.push_back(std::move(c));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad document structure: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("bad rational: ") + e.what());
  }
  return p;
}

/// Compares the stored point coordinates against the sequence definition.
inline partition::CheckResult check_stored_points(
    const partition::TransportPartition& p,
    const std::vector<std::vector<BigRational>>& stored) {
  if (stored.size() != p.cells.size())
    return {"points", false, "stored point count != cell count"};
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    const std::uint64_t n = p.cells[i].n;
    if (n < 1) return {"points", false, "cell index 0"};
    sequence::SequencePoint x = sequence::point(n, p.d);
    if (stored[i] != x.coords)
      return {"points", false,
              "stored coordinates of point " + std::to_string(n) +
                  " disagree with the sequence"};
  }
  return {"points", true, ""};
}

}  // namespace eqmass::serialize

#endif  // EQMASS_SERIALIZE_HPP
