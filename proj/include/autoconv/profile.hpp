#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "autoconv/errors.hpp"

namespace autoconv {

// Nonnegative coefficients a_i for i in [-n, n-1], stored at index i+n.
// The feasible set A_n additionally requires sum a_i = 4n; profiles carrying
// other masses are legal inputs for the raw evaluators.
struct Profile {
  int n = 0;
  std::vector<double> coeffs;

  double at(int i) const { return coeffs[(std::size_t)(i + n)]; }
  double& at(int i) { return coeffs[(std::size_t)(i + n)]; }

  double mass() const {
    double s = 0.0;
    for (double v : coeffs) s += v;
    return s;
  }

  // Mass within relative tolerance 1e-9 of 4n.
  bool normalized() const {
    return std::fabs(mass() - 4.0 * n) <= 4.0 * n * 1e-9;
  }
};

inline Profile make_profile(int n, std::span<const double> raw, bool normalize = false) {
  check_n(n);
  if (raw.size() != (std::size_t)(2 * n))
    throw ShapeError("profile for n=" + std::to_string(n) + " needs " +
                     std::to_string(2 * n) + " coefficients, got " +
                     std::to_string(raw.size()));
  Profile p;
  p.n = n;
  p.coeffs.assign(raw.begin(), raw.end());
  for (double v : p.coeffs) {
    if (!(v >= 0.0))
      throw DomainError("profile coefficients must be nonnegative finite, got " +
                        std::to_string(v));
    if (!std::isfinite(v)) throw DomainError("profile coefficients must be finite");
  }
  if (normalize) {
    double s = p.mass();
    if (s <= 0.0) throw DegenerateError("cannot normalize a zero-mass profile");
    double scale = 4.0 * n / s;
    for (double& v : p.coeffs) v *= scale;
  }
  return p;
}

inline Profile make_profile(int n, std::initializer_list<double> raw, bool normalize = false) {
  return make_profile(n, std::span<const double>(raw.begin(), raw.size()), normalize);
}

// Index reversal i -> -1-i; an exact symmetry of the objective.
inline Profile reflect(const Profile& p) {
  Profile r = p;
  std::reverse(r.coeffs.begin(), r.coeffs.end());
  return r;
}

// Euclidean projection of v onto {x >= 0, sum x = 4n} by the sorted
// threshold method: x_i = max(v_i - tau, 0) with tau chosen so the result
// sums to 4n.
inline Profile project_to_simplex(int n, std::span<const double> v) {
  check_n(n);
  const std::size_t d = (std::size_t)(2 * n);
  if (v.size() != d)
    throw ShapeError("projection input for n=" + std::to_string(n) + " needs " +
                     std::to_string(d) + " entries, got " + std::to_string(v.size()));
  const double total = 4.0 * n;
  std::vector<double> u(v.begin(), v.end());
  for (double x : u)
    if (!std::isfinite(x)) throw DomainError("projection input must be finite");
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < d; ++j) {
    cum += u[j];
    double t = (cum - total) / (double)(j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  Profile p;
  p.n = n;
  p.coeffs.resize(d);
  for (std::size_t i = 0; i < d; ++i) p.coeffs[i] = std::max(v[i] - tau, 0.0);
  return p;
}

inline Profile project_to_simplex(int n, std::initializer_list<double> v) {
  return project_to_simplex(n, std::span<const double>(v.begin(), v.size()));
}

}  // namespace autoconv
