#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "autoconv/errors.hpp"
#include "autoconv/objective.hpp"
#include "autoconv/profile.hpp"
#include "autoconv/windows.hpp"

namespace autoconv {

struct StepSchedule {
  double initial = 0.5;
  double decay = 0.5;
  double min_step = 1e-9;
};

struct SearchConfig {
  int n = 1;
  RangeMode mode = RangeMode::proof;
  std::uint64_t seed = 0;
  int restarts = 1;
  int max_iters = 10000;
  StepSchedule schedule;
  bool symmetric = false;     // keep iterates reflection-symmetric
  double active_tol = 1e-6;   // relative near-max margin for the averaged gradient
  int threads = 1;            // 0 = hardware concurrency
};

struct RestartSummary {
  int restart = 0;
  double start_value = 0.0;
  double final_value = 0.0;
  int iterations = 0;
};

struct SearchResult {
  int n = 0;
  RangeMode mode = RangeMode::proof;
  std::uint64_t seed = 0;
  int restarts = 0;
  Profile best_profile;
  double best_value = 0.0;
  double best_step_sup = 0.0;
  int best_restart = 0;
  std::vector<RestartSummary> per_restart;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent substream per restart; byte-reproducible across platforms
// because mt19937_64 and the explicit variate construction below are pinned
// by the standard (std::exponential_distribution is not).
inline std::mt19937_64 restart_stream(std::uint64_t seed, int restart) {
  return std::mt19937_64(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (std::uint64_t)(restart + 1))));
}

inline double uniform_open01(std::mt19937_64& g) {
  return ((g() >> 11) + 1) * 0x1.0p-53;  // in (0, 1]
}

// Random point of A_n: exponential variates scaled to mass 4n, i.e. uniform
// on the simplex.
inline Profile random_profile(int n, std::mt19937_64& g) {
  check_n(n);
  std::vector<double> v((std::size_t)(2 * n));
  double s = 0.0;
  while (s == 0.0) {
    s = 0.0;
    for (double& x : v) {
      x = -std::log(uniform_open01(g));
      s += x;
    }
  }
  for (double& x : v) x *= 4.0 * n / s;
  return make_profile(n, std::span<const double>(v.data(), v.size()));
}

inline Profile symmetrize(const Profile& p) {
  Profile r = p;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i)
    r.coeffs[i] = 0.5 * (p.coeffs[i] + p.coeffs[p.coeffs.size() - 1 - i]);
  return r;
}

struct DescentResult {
  Profile profile;
  double value = 0.0;
  double start_value = 0.0;
  int iterations = 0;
};

namespace detail {

// Buffers and window table reused across descent iterations.
struct SearchEval {
  int n;
  std::vector<Window> ws;
  std::vector<double> s, P, pa, grad, cand, sorted;

  SearchEval(int n_, RangeMode mode) : n(n_), ws(window_set(n_, mode)) {}

  double value(const std::vector<double>& a) {
    autoconv_into(a);
    double best = -1.0;
    for (const Window& w : ws) {
      double v = wval(w);
      if (v > best) best = v;
    }
    return best;
  }

  // Averaged gradient over the near-active windows: each window value has
  // d/da_q = 2 * (sum of a over the band shifted by q) / (4 n l).
  void gradient(const std::vector<double>& a, double fval, double active_tol) {
    const int d = 2 * n;
    pa.assign((std::size_t)d + 1, 0.0);
    for (int i = 0; i < d; ++i) pa[(std::size_t)(i + 1)] = pa[(std::size_t)i] + a[(std::size_t)i];
    grad.assign((std::size_t)d, 0.0);
    const double thr = fval * (1.0 - active_tol);
    int nactive = 0;
    for (const Window& w : ws) {
      if (wval(w) < thr) continue;
      ++nactive;
      const double c = 2.0 / (4.0 * n * w.ell);
      for (int q = -n; q <= n - 1; ++q) {
        int lo = std::max(w.k - q, -n);
        int hi = std::min(w.k + w.ell - 2 - q, n - 1);
        if (lo > hi) continue;
        grad[(std::size_t)(q + n)] +=
            c * (pa[(std::size_t)(hi + 1 + n)] - pa[(std::size_t)(lo + n)]);
      }
    }
    if (nactive > 1)
      for (double& gq : grad) gq /= (double)nactive;
  }

 private:
  void autoconv_into(const std::vector<double>& a) {
    const int d = 2 * n;
    s.assign((std::size_t)(2 * d - 1), 0.0);
    for (int i = 0; i < d; ++i) {
      const double ai = a[(std::size_t)i];
      if (ai == 0.0) continue;
      for (int j = 0; j < d; ++j) s[(std::size_t)(i + j)] += ai * a[(std::size_t)j];
    }
    P.resize(s.size() + 1);
    P[0] = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) P[t + 1] = P[t] + s[t];
  }

  double wval(const Window& w) const {
    const int off = 2 * n;
    return (P[(std::size_t)(w.k + w.ell - 1 + off)] - P[(std::size_t)(w.k + off)]) /
           (4.0 * n * w.ell);
  }
};

// In-place sorted-threshold projection onto {x >= 0, sum = 4n}.
inline void project_simplex_into(int n, std::vector<double>& v, std::vector<double>& sorted) {
  const double total = 4.0 * n;
  sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cum += sorted[j];
    double t = (cum - total) / (double)(j + 1);
    if (sorted[j] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
}

inline DescentResult descend(std::vector<double> a, const SearchConfig& cfg, SearchEval& ev) {
  const int d = 2 * cfg.n;
  if ((int)a.size() != d) throw ShapeError("descent start has wrong length");
  project_simplex_into(cfg.n, a, ev.sorted);
  if (cfg.symmetric) {
    for (int i = 0; i < d / 2; ++i) {
      double avg = 0.5 * (a[(std::size_t)i] + a[(std::size_t)(d - 1 - i)]);
      a[(std::size_t)i] = avg;
      a[(std::size_t)(d - 1 - i)] = avg;
    }
  }

  DescentResult res;
  double f = ev.value(a);
  res.start_value = f;
  double step = cfg.schedule.initial;
  int iters = 0;
  while (step >= cfg.schedule.min_step && iters < cfg.max_iters) {
    ev.gradient(a, f, cfg.active_tol);
    if (cfg.symmetric) {
      for (int i = 0; i < d / 2; ++i) {
        double avg = 0.5 * (ev.grad[(std::size_t)i] + ev.grad[(std::size_t)(d - 1 - i)]);
        ev.grad[(std::size_t)i] = avg;
        ev.grad[(std::size_t)(d - 1 - i)] = avg;
      }
    }
    ev.cand = a;
    for (int i = 0; i < d; ++i) ev.cand[(std::size_t)i] -= step * ev.grad[(std::size_t)i];
    project_simplex_into(cfg.n, ev.cand, ev.sorted);
    double fc = ev.value(ev.cand);
    ++iters;
    if (fc < f) {
      a.swap(ev.cand);
      f = fc;
    } else {
      step *= cfg.schedule.decay;
    }
  }
  res.iterations = iters;
  res.value = f;
  res.profile.n = cfg.n;
  res.profile.coeffs = std::move(a);
  return res;
}

}  // namespace detail

inline void validate_config(const SearchConfig& cfg) {
  check_n(cfg.n);
  if (cfg.restarts < 1) throw DomainError("restarts must be >= 1");
  if (cfg.max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (cfg.threads < 0) throw DomainError("threads must be >= 0");
  if (!(cfg.schedule.initial > 0.0) || !(cfg.schedule.decay > 0.0) ||
      cfg.schedule.decay >= 1.0 || !(cfg.schedule.min_step > 0.0))
    throw DomainError("step schedule needs initial > 0, 0 < decay < 1, min_step > 0");
  if (!(cfg.active_tol >= 0.0)) throw DomainError("active_tol must be >= 0");
}

// Projected averaged-gradient descent with monotone acceptance and
// geometric step backoff.
inline DescentResult local_descent(const Profile& start, const SearchConfig& cfg) {
  validate_config(cfg);
  if (start.n != cfg.n) throw ShapeError("start profile n does not match config n");
  detail::SearchEval ev(cfg.n, cfg.mode);
  return detail::descend(start.coeffs, cfg, ev);
}

// Seeded multistart: restart r draws its start from restart_stream(seed, r),
// so the result is independent of thread count and repeatable by seed. The
// reported best is re-verified against the brute-force evaluator.
inline SearchResult multistart(const SearchConfig& cfg) {
  validate_config(cfg);
  SearchResult out;
  out.n = cfg.n;
  out.mode = cfg.mode;
  out.seed = cfg.seed;
  out.restarts = cfg.restarts;
  out.per_restart.resize((std::size_t)cfg.restarts);

  std::vector<Profile> profiles((std::size_t)cfg.restarts);
  int nthreads = cfg.threads == 0 ? (int)std::max(1u, std::thread::hardware_concurrency())
                                  : cfg.threads;
  nthreads = std::min(nthreads, cfg.restarts);

  std::atomic<int> next{0};
  auto worker = [&]() {
    detail::SearchEval ev(cfg.n, cfg.mode);
    for (;;) {
      int r = next.fetch_add(1, std::memory_order_relaxed);
      if (r >= cfg.restarts) break;
      auto g = restart_stream(cfg.seed, r);
      Profile start = random_profile(cfg.n, g);
      DescentResult dr = detail::descend(start.coeffs, cfg, ev);
      out.per_restart[(std::size_t)r] = {r, dr.start_value, dr.value, dr.iterations};
      profiles[(std::size_t)r] = std::move(dr.profile);
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve((std::size_t)nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r)
    if (out.per_restart[(std::size_t)r].final_value < out.per_restart[(std::size_t)best].final_value)
      best = r;
  out.best_restart = best;
  out.best_profile = std::move(profiles[(std::size_t)best]);
  out.best_value = out.per_restart[(std::size_t)best].final_value;
  out.best_step_sup = step_sup(out.best_profile);

  double brute = objective_bruteforce(out.best_profile, cfg.mode);
  if (std::fabs(brute - out.best_value) > 1e-9 * std::max(1.0, std::fabs(brute)))
    throw Error("fast and brute-force objective disagree on the search result");
  return out;
}

// Symmetrize and descend within the reflection-symmetric subspace.
inline Profile polish_symmetric(const Profile& p, const SearchConfig& cfg) {
  SearchConfig c = cfg;
  c.symmetric = true;
  validate_config(c);
  if (p.n != c.n) throw ShapeError("profile n does not match config n");
  detail::SearchEval ev(c.n, c.mode);
  return detail::descend(p.coeffs, c, ev).profile;
}

}  // namespace autoconv
