#pragma once

// Exact arithmetic used everywhere: arbitrary-precision integers and
// rationals. No floating point anywhere in the engine.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfd {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Integer direction vectors (entries stay tiny, weights included).
using IVec = std::vector<long long>;
// Exact rational coordinate vectors.
using RVec = std::vector<Rat>;

inline IVec ivec_zero(int m) { return IVec(static_cast<size_t>(m), 0); }

inline bool ivec_is_zero(const IVec& v) {
  for (long long x : v)
    if (x != 0) return false;
  return true;
}

inline IVec ivec_add(const IVec& a, const IVec& b) {
  IVec r(a);
  for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline IVec ivec_neg(const IVec& a) {
  IVec r(a);
  for (auto& x : r) x = -x;
  return r;
}

inline IVec ivec_scale(const IVec& a, long long k) {
  IVec r(a);
  for (auto& x : r) x *= k;
  return r;
}

// gcd of the absolute values of all entries; 0 for the zero vector.
inline long long ivec_weight(const IVec& v) {
  long long g = 0;
  for (long long x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

inline IVec ivec_primitive(const IVec& v) {
  long long g = ivec_weight(v);
  if (g == 0) throw std::invalid_argument("primitive direction of zero vector");
  IVec r(v);
  for (auto& x : r) x /= g;
  return r;
}

inline std::string ivec_str(const IVec& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

inline std::string rat_str(const Rat& r) { return r.str(); }

// Parses "p" or "p/q" into an exact rational.
Rat rat_parse(const std::string& s);

// splitmix64, the usual constants. Used as the single entropy source so that
// sampled positions are bit-identical across platforms.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  // uniform odd numerator in (-2^16, 2^16); odd keeps denominators honest
  long long box_numerator() {
    long long v = static_cast<long long>(below(1ULL << 15)) * 2 + 1;
    return (next() & 1) ? v : -v;
  }
};

inline Rat rat_parse_or(const std::string& s, const Rat& fallback) {
  try {
    return rat_parse(s);
  } catch (...) {
    return fallback;
  }
}

}  // namespace crfd
