#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "autoconv/errors.hpp"
#include "autoconv/lattice.hpp"
#include "autoconv/rational.hpp"
#include "autoconv/version.hpp"
#include "autoconv/windows.hpp"

namespace autoconv {

enum class Method { global_lipschitz, cell_quadratic };

inline const char* to_string(Method m) {
  return m == Method::global_lipschitz ? "global-lipschitz" : "cell-quadratic";
}

inline Method method_from_string(const std::string& s) {
  if (s == "global-lipschitz") return Method::global_lipschitz;
  if (s == "cell-quadratic") return Method::cell_quadratic;
  throw DomainError("unknown method '" + s + "' (expected 'global-lipschitz' or 'cell-quadratic')");
}

// l1 Lipschitz constant of the objective on A_n. Each window value has
// gradient entries (2/(4 n l)) * (band sum of a) <= 2 * mass/(4 n l) = 2/l
// on the simplex, and l >= 2, so every window value, and hence their max,
// moves by at most the l1 distance. Independent of n.
inline double lipschitz_constant(int n) {
  check_n(n);
  return 1.0;
}

struct Certificate {
  int n = 0;
  long long m = 0;
  RangeMode mode = RangeMode::proof;
  Method method = Method::global_lipschitz;
  Rat lattice_min;                       // exact min of F over the mesh
  Rat certified;                         // exact certified lower bound
  std::vector<long long> argmin_counts;  // first minimizer in enumeration order
  unsigned long long points_evaluated = 0;
  double elapsed_s = 0.0;

  Rat error_term() const { return lattice_min - certified; }
};

// Mid-run state: enough to restart the sweep at the first unprocessed chunk
// of the current phase. Phase 0 is the lattice pass; phase t >= 1 is the
// level-t cell pass (cell_quadratic only); phase -1 is terminal and carries
// the finished certificate. State is kept as raw int64 fractions so it folds
// back in without any rounding question.
struct Checkpoint {
  std::string version = kVersion;
  int n = 0;
  long long m = 0;
  RangeMode mode = RangeMode::proof;
  Method method = Method::global_lipschitz;
  Rat margin;                     // cell candidate margin
  int phase = 0;
  long long next_first = 0;       // next unprocessed first coordinate
  long long lat_best_numer = -1;  // best max-window numerator N so far; -1 = none
  long long lat_best_ell = 1;
  std::vector<long long> lat_argmin;
  unsigned long long points_evaluated = 0;
  bool has_cell_best = false;
  long long cell_best_num = 0;  // min cell bound so far, as num/den
  long long cell_best_den = 1;
  std::optional<Certificate> final_cert;
};

struct CertifyOptions {
  int threads = 1;            // 0 = hardware concurrency
  Rat margin = Rat(1, 32);    // cell candidate near-max margin, in [0, 1)
  long long max_chunks = -1;  // stop (resumably) after this many chunk claims per phase
  double budget_s = -1.0;     // stop (resumably) after this much wall time
  double checkpoint_every_s = 30.0;
  std::function<void(const Checkpoint&)> save_checkpoint;  // called on progress and stop
};

struct CertifyOutcome {
  std::optional<Certificate> certificate;
  std::optional<Checkpoint> checkpoint;  // set iff the run stopped early
  bool complete() const { return certificate.has_value(); }
};

namespace detail {

struct ChunkResult {
  bool any = false;
  long long bestN = -1;  // max-window numerator of the chunk's minimizing point
  long long bestL = 1;
  std::vector<long long> argmin;
  unsigned long long npoints = 0;
  bool any_cell = false;
  long long cellNum = 0;  // min cell bound within the chunk
  long long cellDen = 1;
};

struct Slot {
  std::atomic<bool> done{false};
  ChunkResult r;
};

// Scratch buffers owned by one worker thread.
struct CertWorkspace {
  std::vector<long long> s;        // integer autoconvolution, length 4n-1
  std::vector<long long> P;        // prefix sums, length 4n
  std::vector<long long> vertexP;  // per-vertex prefix arrays, flattened
  std::vector<Window> candidates;
  LatticePoint point;
};

inline void int_autoconv(const std::vector<long long>& c, std::vector<long long>& s,
                         std::vector<long long>& P) {
  const int d = (int)c.size();
  s.assign((std::size_t)(2 * d - 1), 0);
  for (int i = 0; i < d; ++i) {
    const long long ci = c[(std::size_t)i];
    if (ci == 0) continue;
    for (int j = 0; j < d; ++j) s[(std::size_t)(i + j)] += ci * c[(std::size_t)j];
  }
  P.resize(s.size() + 1);
  P[0] = 0;
  for (std::size_t t = 0; t < s.size(); ++t) P[t + 1] = P[t] + s[t];
}

// max over windows of N_w / l_w as an exact fraction (bestN, bestL).
inline void exact_max_window(const std::vector<long long>& P, int n,
                             const std::vector<Window>& ws, long long& bestN, long long& bestL) {
  bestN = -1;
  bestL = 1;
  const int off = 2 * n;
  for (const Window& w : ws) {
    long long N = P[(std::size_t)(w.k + w.ell - 1 + off)] - P[(std::size_t)(w.k + off)];
    if ((__int128)N * bestL > (__int128)bestN * w.ell) {
      bestN = N;
      bestL = w.ell;
    }
  }
}

class CertifyDriver {
 public:
  CertifyDriver(const MeshSpec& mesh, RangeMode mode, Method method, const CertifyOptions& opt)
      : mesh_(mesh), mode_(mode), method_(method), opt_(opt), ws_(window_set(mesh.n, mode)) {
    if (mesh_.m > 1000000LL)
      throw DomainError("certify caps m at 1e6 so exact rationals stay inside 64 bits");
    if (!(opt_.margin >= Rat(0, 1) && opt_.margin < Rat(1, 1)))
      throw DomainError("candidate margin must lie in [0, 1)");
    cp_.n = mesh_.n;
    cp_.m = mesh_.m;
    cp_.mode = mode_;
    cp_.method = method_;
    cp_.margin = opt_.margin;
    cp_.phase = 0;
    cp_.next_first = 0;
  }

  // Continue from a previous checkpoint; the margin in the checkpoint wins.
  void load(const Checkpoint& cp) {
    if (cp.version != kVersion)
      throw CheckpointError("checkpoint written by version '" + cp.version +
                            "', this tool is '" + kVersion + "'");
    if (cp.n != mesh_.n || cp.m != mesh_.m || cp.mode != mode_ || cp.method != method_)
      throw CheckpointError("checkpoint does not match the requested run");
    int max_phase = method_ == Method::cell_quadratic ? level_cap() : 0;
    if (cp.phase != -1 && (cp.phase < 0 || cp.phase > max_phase))
      throw CheckpointError("checkpoint phase out of range");
    if (cp.phase != -1) {
      long long total = phase_mass(cp.phase);
      if (cp.next_first < 0 || cp.next_first > total + 1)
        throw CheckpointError("checkpoint frontier out of range");
      if (cp.lat_best_numer < -1 || cp.lat_best_ell < 1 ||
          (cp.lat_best_numer >= 0 && cp.lat_argmin.size() != (std::size_t)(2 * mesh_.n)))
        throw CheckpointError("checkpoint lattice state is inconsistent");
      if (cp.phase > 0 && cp.lat_best_numer < 0)
        throw CheckpointError("checkpoint is in a cell phase without a finished lattice pass");
      if (cp.has_cell_best && cp.cell_best_den < 1)
        throw CheckpointError("checkpoint cell state is inconsistent");
      if (!(cp.margin >= Rat(0, 1) && cp.margin < Rat(1, 1)))
        throw CheckpointError("checkpoint margin out of range");
    } else if (!cp.final_cert) {
      throw CheckpointError("terminal checkpoint is missing its certificate");
    }
    cp_ = cp;
    opt_.margin = cp.margin;
  }

  CertifyOutcome run() {
    start_time_ = std::chrono::steady_clock::now();
    if (cp_.phase == -1) return {cp_.final_cert, std::nullopt};

    const int last_phase = method_ == Method::cell_quadratic ? level_cap() : 0;
    for (int phase = cp_.phase; phase <= last_phase; ++phase) {
      if (phase != cp_.phase) {
        cp_.phase = phase;
        cp_.next_first = 0;
      }
      if (!run_phase(phase)) {
        if (opt_.save_checkpoint) opt_.save_checkpoint(cp_);
        return {std::nullopt, cp_};
      }
    }

    Certificate cert;
    cert.n = mesh_.n;
    cert.m = mesh_.m;
    cert.mode = mode_;
    cert.method = method_;
    cert.lattice_min = Rat::make((__int128)4 * mesh_.n * cp_.lat_best_numer,
                                 (__int128)cp_.lat_best_ell * mesh_.m * mesh_.m);
    cert.argmin_counts = cp_.lat_argmin;
    cert.points_evaluated = cp_.points_evaluated;
    if (method_ == Method::global_lipschitz) {
      cert.certified = cert.lattice_min - Rat(8LL * mesh_.n * mesh_.n, mesh_.m);
    } else {
      cert.certified = Rat::make(cp_.cell_best_num, cp_.cell_best_den);
    }
    cert.elapsed_s = elapsed_s();
    cp_.phase = -1;
    cp_.final_cert = cert;
    if (opt_.save_checkpoint) opt_.save_checkpoint(cp_);
    return {cert, std::nullopt};
  }

 private:
  int level_cap() const {
    long long cap = 2LL * mesh_.n;
    if (mesh_.m < cap) cap = mesh_.m;
    return (int)cap;
  }

  long long phase_mass(int phase) const { return phase == 0 ? mesh_.m : mesh_.m - phase; }

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time_).count();
  }

  // One phase = one sweep over first coordinates [next_first, phase_mass].
  // The range is cut into at most 65536 chunks of consecutive coordinates
  // (one coordinate per chunk on small meshes). Workers claim chunks in
  // ascending order and every claimed chunk runs to completion; the main
  // thread folds finished slots strictly in chunk order, so the fold result
  // does not depend on thread count or timing. Interruption discards chunks
  // beyond the contiguous frontier; resume recomputes them, reproducing the
  // identical fold. Returns false if interrupted.
  bool run_phase(int phase) {
    const long long total = phase_mass(phase);
    const long long start = cp_.next_first;
    if (start > total) return true;

    const long long span = total - start + 1;
    const long long bsize = (span + 65535) / 65536;  // coordinates per chunk
    const long long nblocks = (span + bsize - 1) / bsize;

    int nthreads = opt_.threads;
    if (nthreads < 0) throw DomainError("threads must be >= 0");
    if (nthreads == 0) nthreads = (int)std::max(1u, std::thread::hardware_concurrency());
    nthreads = (int)std::min<long long>(nthreads, nblocks);

    std::unique_ptr<Slot[]> slots(new Slot[(std::size_t)nblocks]);
    std::atomic<long long> next_take{0};
    std::atomic<long long> claims{0};
    std::atomic<bool> stop{false};
    std::atomic<int> alive{nthreads};

    auto worker = [&]() {
      CertWorkspace ws;
      for (;;) {
        if (stop.load(std::memory_order_relaxed)) break;
        if (opt_.max_chunks >= 0 &&
            claims.fetch_add(1, std::memory_order_relaxed) >= opt_.max_chunks) {
          stop.store(true, std::memory_order_relaxed);
          break;
        }
        long long b = next_take.fetch_add(1, std::memory_order_relaxed);
        if (b >= nblocks) break;
        const long long lo = start + b * bsize;
        const long long hi = std::min(lo + bsize - 1, total);
        Slot& slot = slots[(std::size_t)b];
        for (long long c0 = lo; c0 <= hi; ++c0) {
          if (phase == 0)
            lattice_chunk(c0, ws, slot.r);
          else
            cell_chunk(phase, c0, ws, slot.r);
        }
        slot.done.store(true, std::memory_order_release);
      }
      alive.fetch_sub(1, std::memory_order_release);
    };

    std::vector<std::thread> pool;
    pool.reserve((std::size_t)nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);

    long long frontier = 0;  // first unfolded chunk
    auto fold_ready = [&]() {
      while (frontier < nblocks) {
        Slot& slot = slots[(std::size_t)frontier];
        if (!slot.done.load(std::memory_order_acquire)) break;
        fold(phase, slot.r);
        slot.r = ChunkResult{};  // release folded buffers early
        ++frontier;
        cp_.next_first = std::min(start + frontier * bsize, total + 1);
      }
    };

    auto last_save = std::chrono::steady_clock::now();
    while (alive.load(std::memory_order_acquire) > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
      fold_ready();
      if (opt_.budget_s >= 0 && elapsed_s() > opt_.budget_s)
        stop.store(true, std::memory_order_relaxed);
      if (opt_.save_checkpoint && opt_.checkpoint_every_s > 0 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - last_save).count() >
              opt_.checkpoint_every_s) {
        opt_.save_checkpoint(cp_);
        last_save = std::chrono::steady_clock::now();
      }
    }
    for (auto& t : pool) t.join();
    fold_ready();
    return frontier == nblocks;
  }

  void fold(int phase, const ChunkResult& r) {
    if (phase == 0) {
      cp_.points_evaluated += r.npoints;
      if (r.any &&
          (cp_.lat_best_numer < 0 ||
           (__int128)r.bestN * cp_.lat_best_ell < (__int128)cp_.lat_best_numer * r.bestL)) {
        cp_.lat_best_numer = r.bestN;
        cp_.lat_best_ell = r.bestL;
        cp_.lat_argmin = r.argmin;
      }
    } else if (r.any_cell) {
      if (!cp_.has_cell_best || (__int128)r.cellNum * cp_.cell_best_den <
                                    (__int128)cp_.cell_best_num * r.cellDen) {
        cp_.has_cell_best = true;
        cp_.cell_best_num = r.cellNum;
        cp_.cell_best_den = r.cellDen;
      }
    }
  }

  // Minimize the max-window value over lattice points with first coordinate
  // c0, accumulating into r; ties keep the first point in enumeration order.
  void lattice_chunk(long long c0, CertWorkspace& w, ChunkResult& r) {
    ChunkCursor cur;
    cur.prefix = {c0};
    CompositionStream st(mesh_, cur);
    while (st.next(w.point)) {
      ++r.npoints;
      int_autoconv(w.point.counts, w.s, w.P);
      long long N, L;
      exact_max_window(w.P, mesh_.n, ws_, N, L);
      if (!r.any || (__int128)N * r.bestL < (__int128)r.bestN * L) {
        r.any = true;
        r.bestN = N;
        r.bestL = L;
        r.argmin = w.point.counts;
      }
    }
  }

  // Minimize the certified per-cell bound over level-t cells whose base
  // composition has first coordinate c0. For a cell with base q and level t,
  // a candidate window w = (k, l) gives the exact bound
  //   (4n * min_{vertices v} N_w(v) - 2 (l-1) t (2n-t)) / (l m^2):
  // the quadratic N_w dips below its vertex interpolation by at most
  // lambda_max/2 times the convex-combination variance, lambda_max <= l-1
  // (the band matrix splits into l-1 sub-permutation matrices) and the
  // variance is at most t(2n-t)/(2n) in h^2 units. Candidates are the
  // windows within `margin` of the representative vertex's max; each yields
  // a sound lower bound for the whole cell, so their max is sound. In proof
  // mode the all-pairs window is always a candidate: its numerator is m^2 at
  // every lattice point and its dip is zero (in-simplex displacements sum to
  // zero and annihilate the all-ones quadratic), so it contributes exactly 1.
  void cell_chunk(int t, long long c0, CertWorkspace& w, ChunkResult& r) {
    const int d = 2 * mesh_.n;
    const long long m = mesh_.m;

    std::vector<int> subset((std::size_t)t);
    std::vector<long long> vertex((std::size_t)d);
    const long long dipC = 2LL * t * (d - t);  // dip numerator per (l-1)
    const __int128 mden = opt_.margin.den;
    const __int128 mgap = opt_.margin.den - opt_.margin.num;
    const bool proof = mode_ == RangeMode::proof;
    const int off = d;

    auto process_base = [&](const std::vector<long long>& q) {
      // Representative vertex: bump the last t coordinates.
      for (int i = 0; i < d; ++i)
        vertex[(std::size_t)i] = q[(std::size_t)i] + (i >= d - t ? 1 : 0);
      int_autoconv(vertex, w.s, w.P);
      long long repN, repL;
      exact_max_window(w.P, mesh_.n, ws_, repN, repL);

      // Near-max candidate windows; the all-pairs window is handled exactly
      // and never needs vertex evaluation.
      w.candidates.clear();
      for (const Window& win : ws_) {
        if (win.k == -d && win.ell == 2 * d) continue;
        long long N = w.P[(std::size_t)(win.k + win.ell - 1 + off)] -
                      w.P[(std::size_t)(win.k + off)];
        if ((__int128)N * repL * mden >= (__int128)repN * win.ell * mgap)
          w.candidates.push_back(win);
      }

      bool cell_any = proof;  // all-pairs candidate contributes exactly 1
      long long cellNum = 1, cellDen = 1;

      if (!w.candidates.empty()) {
        // Prefix array of every cell vertex q + e_S, |S| = t.
        const std::size_t plen = w.P.size();
        w.vertexP.clear();
        std::size_t nverts = 0;
        for (int i = 0; i < t; ++i) subset[(std::size_t)i] = i;
        for (;;) {
          for (int i = 0; i < d; ++i) vertex[(std::size_t)i] = q[(std::size_t)i];
          for (int i = 0; i < t; ++i) vertex[(std::size_t)subset[(std::size_t)i]] += 1;
          int_autoconv(vertex, w.s, w.P);
          w.vertexP.insert(w.vertexP.end(), w.P.begin(), w.P.end());
          ++nverts;
          int pos = t - 1;
          while (pos >= 0 && subset[(std::size_t)pos] == d - t + pos) --pos;
          if (pos < 0) break;
          subset[(std::size_t)pos] += 1;
          for (int i = pos + 1; i < t; ++i)
            subset[(std::size_t)i] = subset[(std::size_t)(i - 1)] + 1;
        }

        for (const Window& win : w.candidates) {
          long long minN = -1;
          for (std::size_t v = 0; v < nverts; ++v) {
            const long long* P = w.vertexP.data() + v * plen;
            long long N = P[win.k + win.ell - 1 + off] - P[win.k + off];
            if (minN < 0 || N < minN) minN = N;
          }
          long long num = 4LL * mesh_.n * minN - dipC * (win.ell - 1);
          long long den = (long long)win.ell * m * m;
          if (!cell_any || (__int128)num * cellDen > (__int128)cellNum * den) {
            cell_any = true;
            cellNum = num;
            cellDen = den;
          }
        }
      }

      if (cell_any &&
          (!r.any_cell || (__int128)cellNum * r.cellDen < (__int128)r.cellNum * cellDen)) {
        r.any_cell = true;
        r.cellNum = cellNum;
        r.cellDen = cellDen;
      }
    };

    if (m - t == 0) {
      // Single base: the all-zero composition.
      if (c0 == 0) {
        w.point.counts.assign((std::size_t)d, 0);
        process_base(w.point.counts);
      }
    } else {
      ChunkCursor cur;
      cur.prefix = {c0};
      CompositionStream st(MeshSpec(mesh_.n, m - t), cur);
      while (st.next(w.point)) process_base(w.point.counts);
    }
  }

  MeshSpec mesh_;
  RangeMode mode_;
  Method method_;
  CertifyOptions opt_;
  std::vector<Window> ws_;
  Checkpoint cp_;
  std::chrono::steady_clock::time_point start_time_;
};

}  // namespace detail

inline CertifyOutcome certify_global(const MeshSpec& mesh, RangeMode mode,
                                     const CertifyOptions& opt = {}) {
  detail::CertifyDriver d(mesh, mode, Method::global_lipschitz, opt);
  return d.run();
}

inline CertifyOutcome certify_cells(const MeshSpec& mesh, RangeMode mode,
                                    const CertifyOptions& opt = {}) {
  detail::CertifyDriver d(mesh, mode, Method::cell_quadratic, opt);
  return d.run();
}

inline CertifyOutcome resume(const Checkpoint& cp, const CertifyOptions& opt = {}) {
  try {
    CertifyOptions o = opt;
    o.margin = cp.margin;
    detail::CertifyDriver d(MeshSpec(cp.n, cp.m), cp.mode, cp.method, o);
    d.load(cp);
    return d.run();
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
}

}  // namespace autoconv
