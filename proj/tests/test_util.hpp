#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "autoconv/profile.hpp"

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform01(std::mt19937_64& g) {
  return ((g() >> 11) + 1) * 0x1.0p-53;
}

// Random point of A_n: exponential variates scaled to mass 4n.
inline autoconv::Profile random_normalized(int n, std::mt19937_64& g) {
  std::vector<double> v((std::size_t)(2 * n));
  double s = 0.0;
  for (double& x : v) {
    x = -std::log(uniform01(g));
    s += x;
  }
  for (double& x : v) x *= 4.0 * n / s;
  return autoconv::make_profile(n, std::span<const double>(v.data(), v.size()));
}

// Random nonnegative profile with arbitrary mass.
inline autoconv::Profile random_raw(int n, std::mt19937_64& g, double scale = 3.0) {
  std::vector<double> v((std::size_t)(2 * n));
  for (double& x : v) x = scale * uniform01(g);
  return autoconv::make_profile(n, std::span<const double>(v.data(), v.size()));
}

inline double l1_dist(const autoconv::Profile& a, const autoconv::Profile& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    s += std::fabs(a.coeffs[i] - b.coeffs[i]);
  return s;
}

}  // namespace testutil
