#pragma once

#include <string>
#include <vector>

#include "autoconv/errors.hpp"

namespace autoconv {

// Window index ranges. `theorem` is the range the bound statement quantifies
// over (2 <= l <= 2n, -n <= k <= n-l); `proof` is the wider range the
// argument actually controls (2 <= l <= 4n, -2n <= k <= 2n-l). proof is a
// superset of theorem and contains the all-pairs window (-2n, 4n), which
// forces objective >= 1 on normalized profiles.
enum class RangeMode { theorem, proof };

inline const char* to_string(RangeMode m) {
  return m == RangeMode::theorem ? "theorem" : "proof";
}

inline RangeMode range_mode_from_string(const std::string& s) {
  if (s == "theorem") return RangeMode::theorem;
  if (s == "proof") return RangeMode::proof;
  throw DomainError("unknown range mode '" + s + "' (expected 'theorem' or 'proof')");
}

// A window (k, l): the index band k <= i+j <= k+l-2, i.e. autoconvolution
// entries s_k .. s_{k+l-2}, weighted by 1/(4 n l).
struct Window {
  int k = 0;
  int ell = 0;

  friend bool operator==(const Window& a, const Window& b) {
    return a.k == b.k && a.ell == b.ell;
  }
  friend bool operator<(const Window& a, const Window& b) {
    if (a.ell != b.ell) return a.ell < b.ell;
    return a.k < b.k;
  }
};

inline bool window_in_range(int n, RangeMode mode, Window w) {
  check_n(n);
  int lmax = mode == RangeMode::theorem ? 2 * n : 4 * n;
  int kmin = mode == RangeMode::theorem ? -n : -2 * n;
  int kmax_plus_l = mode == RangeMode::theorem ? n : 2 * n;  // k <= kmax_plus_l - l
  return w.ell >= 2 && w.ell <= lmax && w.k >= kmin && w.k + w.ell <= kmax_plus_l;
}

inline void check_window(int n, RangeMode mode, Window w) {
  if (!window_in_range(n, mode, w))
    throw RangeError("window (k=" + std::to_string(w.k) + ", l=" + std::to_string(w.ell) +
                     ") outside the " + to_string(mode) + " range for n=" + std::to_string(n));
}

inline long long window_count(int n, RangeMode mode) {
  check_n(n);
  long long N = n;
  return mode == RangeMode::theorem ? N * (2 * N - 1) : 2 * N * (4 * N - 1);
}

// All windows, l ascending then k ascending. This order is part of the
// determinism contract: argmax lists and tie-breaks follow it.
inline std::vector<Window> window_set(int n, RangeMode mode) {
  check_n(n);
  int lmax = mode == RangeMode::theorem ? 2 * n : 4 * n;
  int kmin = mode == RangeMode::theorem ? -n : -2 * n;
  int bound = mode == RangeMode::theorem ? n : 2 * n;
  std::vector<Window> out;
  out.reserve((std::size_t)window_count(n, mode));
  for (int l = 2; l <= lmax; ++l)
    for (int k = kmin; k + l <= bound; ++k) out.push_back({k, l});
  return out;
}

}  // namespace autoconv
