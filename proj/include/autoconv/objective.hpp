#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "autoconv/errors.hpp"
#include "autoconv/profile.hpp"
#include "autoconv/windows.hpp"

namespace autoconv {

// s_m = sum_{i+j=m} a_i a_j for m in [-2n, 2n-2], stored at index m+2n.
// sum_m s_m = (sum_i a_i)^2.
struct Autoconvolution {
  int n = 0;
  std::vector<double> s;

  double at(int m) const { return s[(std::size_t)(m + 2 * n)]; }
};

inline Autoconvolution autoconvolve(const Profile& p) {
  check_n(p.n);
  const int d = 2 * p.n;
  Autoconvolution a;
  a.n = p.n;
  a.s.assign((std::size_t)(2 * d - 1), 0.0);
  for (int i = 0; i < d; ++i) {
    const double ai = p.coeffs[(std::size_t)i];
    if (ai == 0.0) continue;
    for (int j = 0; j < d; ++j) a.s[(std::size_t)(i + j)] += ai * p.coeffs[(std::size_t)j];
  }
  return a;
}

namespace detail {

// P[t] = s_{-2n} + ... + s_{-2n+t-1}; band sums become P differences.
inline std::vector<double> prefix_sums(const Autoconvolution& a) {
  std::vector<double> P(a.s.size() + 1, 0.0);
  for (std::size_t t = 0; t < a.s.size(); ++t) P[t + 1] = P[t] + a.s[t];
  return P;
}

}  // namespace detail

// (1/(4 n l)) * (s_k + ... + s_{k+l-2}). Any window legal in proof mode for
// this n is accepted; proof mode is the widest valid range.
inline double window_value(const Autoconvolution& a, Window w) {
  check_window(a.n, RangeMode::proof, w);
  const auto P = detail::prefix_sums(a);
  const int off = 2 * a.n;
  double band = P[(std::size_t)(w.k + w.ell - 1 + off)] - P[(std::size_t)(w.k + off)];
  return band / (4.0 * a.n * w.ell);
}

struct Evaluation {
  double value = 0.0;
  std::vector<Window> argmax;  // windows within relative 1e-12 of value, enumeration order
  RangeMode mode = RangeMode::proof;
};

// max over the window set of the window value. O(n^2) via one
// autoconvolution and one prefix scan.
inline Evaluation objective(const Profile& p, RangeMode mode = RangeMode::proof) {
  const auto a = autoconvolve(p);
  const auto P = detail::prefix_sums(a);
  const auto ws = window_set(p.n, mode);
  const int off = 2 * p.n;
  const double inv4n = 1.0 / (4.0 * p.n);

  Evaluation ev;
  ev.mode = mode;
  double best = -1.0;
  for (const Window& w : ws) {
    double band = P[(std::size_t)(w.k + w.ell - 1 + off)] - P[(std::size_t)(w.k + off)];
    double v = band * inv4n / w.ell;
    if (v > best) best = v;
  }
  ev.value = best;
  const double thr = best * (1.0 - 1e-12);
  for (const Window& w : ws) {
    double band = P[(std::size_t)(w.k + w.ell - 1 + off)] - P[(std::size_t)(w.k + off)];
    double v = band * inv4n / w.ell;
    if (v >= thr) ev.argmax.push_back(w);
  }
  return ev;
}

// Independent oracle: literal pair sums per window, no shared
// autoconvolution, no prefix arrays. O(n^2) per window.
inline double objective_bruteforce(const Profile& p, RangeMode mode) {
  const auto ws = window_set(p.n, mode);
  const int n = p.n;
  double best = -1.0;
  for (const Window& w : ws) {
    double acc = 0.0;
    for (int i = -n; i <= n - 1; ++i)
      for (int j = -n; j <= n - 1; ++j) {
        int m = i + j;
        if (m >= w.k && m <= w.k + w.ell - 2) acc += p.at(i) * p.at(j);
      }
    double v = acc / (4.0 * n * w.ell);
    if (v > best) best = v;
  }
  return best;
}

// sup of f*f for the step function f with value a_i on
// [i/(4n), (i+1)/(4n)). f*f is piecewise linear with breakpoints at
// multiples of 1/(4n) and (f*f)((m+1)/(4n)) = s_m/(4n), so the sup is
// max_m s_m/(4n). Requires a normalized profile: only then is f a unit-mass
// density and the sup a meaningful certificate.
inline double step_sup(const Profile& p) {
  if (!p.normalized())
    throw DomainError("step_sup requires a normalized profile (mass 4n)");
  const auto a = autoconvolve(p);
  double best = 0.0;
  for (double v : a.s) best = std::max(best, v);
  return best / (4.0 * p.n);
}

}  // namespace autoconv
