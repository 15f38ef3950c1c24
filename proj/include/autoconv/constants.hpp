#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "autoconv/errors.hpp"

namespace autoconv {

// The two scales in use: c bounds the autoconvolution sup from below,
// sigma = sqrt(2/c) is the equivalent constant on the sqrt scale. A lower
// bound on c is an upper bound on sigma and vice versa.
inline double sigma_from_c(double c) {
  if (!(c > 0.0)) throw DomainError("sigma_from_c requires c > 0, got " + std::to_string(c));
  return std::sqrt(2.0 / c);
}

inline double c_from_sigma(double sigma) {
  if (!(sigma > 0.0))
    throw DomainError("c_from_sigma requires sigma > 0, got " + std::to_string(sigma));
  return 2.0 / (sigma * sigma);
}

struct ScaledConstants {
  double c_value = 0.0;
  double sigma_value = 0.0;

  static ScaledConstants from_c(double c) { return {c, sigma_from_c(c)}; }
  static ScaledConstants from_sigma(double s) { return {c_from_sigma(s), s}; }
};

// Upper bound on sigma implied by a lower bound on c. The division and the
// sqrt each round to nearest (at most one ulp low apiece), so stepping two
// ulps up yields a guaranteed upper bound.
inline double sigma_upper_from_c_lower(double c_lower) {
  if (!(c_lower > 0.0))
    throw DomainError("sigma bound requires a positive c lower bound");
  const double inf = std::numeric_limits<double>::infinity();
  double s = std::sqrt(2.0 / c_lower);
  return std::nextafter(std::nextafter(s, inf), inf);
}

}  // namespace autoconv
