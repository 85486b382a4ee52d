#ifndef EQMASS_RATIONAL_HPP
#define EQMASS_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace eqmass {

// All geometry and mass accounting runs on exact rationals; floating point
// appears only in report rendering.
using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline BigInt pow2_int(std::int64_t k) {
  if (k < 0) throw std::invalid_argument("pow2_int: negative exponent");
  return BigInt(1) << static_cast<unsigned>(k);
}

/// 2^k as a rational, k may be negative.
inline BigRational pow2(std::int64_t k) {
  if (k >= 0) return BigRational(pow2_int(k));
  return BigRational(1, pow2_int(-k));
}

inline BigInt ipow(BigInt base, std::uint64_t e) {
  BigInt r = 1;
  while (e) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

/// Exact equality through the canonical numerator/denominator pair; the
/// generic operator== cross-multiplies and is much slower on hot paths.
inline bool rat_eq(const BigRational& a, const BigRational& b) {
  return numerator(a) == numerator(b) && denominator(a) == denominator(b);
}

inline std::string to_string(const BigRational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

/// Parses "p/q" or a plain integer "p". Throws std::invalid_argument on
/// malformed input or zero denominator.
inline BigRational parse_rational(const std::string& s) {
  auto bad = [&] { throw std::invalid_argument("parse_rational: '" + s + "'"); };
  if (s.empty()) bad();
  auto check_int = [&](const std::string& t) {
    if (t.empty()) bad();
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size()) bad();
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') bad();
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    check_int(s);
    return BigRational(BigInt(s));
  }
  std::string num = s.substr(0, slash), den = s.substr(slash + 1);
  check_int(num);
  check_int(den);
  BigInt d(den);
  if (d == 0) bad();
  return BigRational(BigInt(num), d);
}

inline double to_double(const BigRational& q) {
  return q.convert_to<double>();
}

}  // namespace eqmass

#endif  // EQMASS_RATIONAL_HPP
