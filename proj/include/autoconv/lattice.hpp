#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "autoconv/errors.hpp"
#include "autoconv/profile.hpp"
#include "autoconv/rational.hpp"
#include "autoconv/windows.hpp"

namespace autoconv {

// Mesh of mass-quantum points: counts c_i >= 0 with sum c_i = m represent
// the profile a_i = 4n c_i / m, so the mesh spacing is h = 4n/m and h m = 4n
// exactly. m is capped so window numerators (<= m^2) stay inside int64.
struct MeshSpec {
  int n = 0;
  long long m = 0;

  MeshSpec() = default;
  MeshSpec(int n_, long long m_) : n(n_), m(m_) {
    check_n(n);
    if (m < 1) throw DomainError("mesh requires m >= 1, got " + std::to_string(m));
    if (m > 1000000000LL)
      throw DomainError("mesh m capped at 1e9 to keep exact arithmetic in range");
  }

  double h() const { return 4.0 * n / (double)m; }
  Rat h_rat() const { return Rat(4LL * n, m); }
};

struct LatticePoint {
  std::vector<long long> counts;

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) {
    return a.counts == b.counts;
  }
};

inline Profile profile_from_point(const MeshSpec& mesh, const LatticePoint& p) {
  if (p.counts.size() != (std::size_t)(2 * mesh.n))
    throw ShapeError("lattice point has " + std::to_string(p.counts.size()) +
                     " counts, mesh needs " + std::to_string(2 * mesh.n));
  std::vector<double> v(p.counts.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (p.counts[i] < 0) throw DomainError("lattice counts must be nonnegative");
    v[i] = 4.0 * mesh.n * (double)p.counts[i] / (double)mesh.m;
  }
  return make_profile(mesh.n, std::span<const double>(v.data(), v.size()));
}

// Number of compositions of total into `parts` nonnegative parts:
// C(total + parts - 1, parts - 1), exact, throwing if it leaves int64.
inline long long composition_count(long long total, int parts) {
  if (total < 0 || parts < 1) throw DomainError("composition_count needs total >= 0, parts >= 1");
  __int128 res = 1;
  const long long k = parts - 1;
  for (long long i = 1; i <= k; ++i) {
    res = res * (total + i) / i;  // partial binomials are integers
    if (res > (__int128)std::numeric_limits<long long>::max())
      throw OverflowError("composition_count exceeds 64-bit range");
  }
  return (long long)res;
}

// Fixed leading counts selecting a slice of the enumeration.
struct ChunkCursor {
  std::vector<long long> prefix;

  std::string encode() const {
    std::string s;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(prefix[i]);
    }
    return s;
  }

  static ChunkCursor decode(const std::string& s) {
    ChunkCursor c;
    if (s.empty()) throw CursorError("empty cursor string");
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t comma = s.find(',', pos);
      std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.empty()) throw CursorError("malformed cursor '" + s + "'");
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw CursorError("malformed cursor '" + s + "'");
        if (v < 0) throw CursorError("cursor counts must be nonnegative");
        c.prefix.push_back(v);
      } catch (const CursorError&) {
        throw;
      } catch (const std::exception&) {
        throw CursorError("malformed cursor '" + s + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return c;
  }

  void validate(const MeshSpec& mesh) const {
    if (prefix.empty() || prefix.size() > (std::size_t)(2 * mesh.n - 1))
      throw CursorError("cursor length must be in [1, 2n-1]");
    long long s = 0;
    for (long long v : prefix) {
      if (v < 0) throw CursorError("cursor counts must be nonnegative");
      s += v;
    }
    if (s > mesh.m) throw CursorError("cursor prefix mass exceeds m");
  }
};

// Lexicographically ascending stream of compositions of m into 2n parts,
// optionally restricted to a fixed prefix. Successor rule: find the largest
// position j < last with mass strictly to its right, increment c_j, zero the
// gap, and push the remainder to the last coordinate.
class CompositionStream {
 public:
  explicit CompositionStream(const MeshSpec& mesh) : CompositionStream(mesh, {}, 0) {}

  CompositionStream(const MeshSpec& mesh, const ChunkCursor& chunk)
      : CompositionStream(mesh, chunk.prefix, (int)chunk.prefix.size()) {
    chunk.validate(mesh);
  }

  bool next(LatticePoint& out) {
    if (done_) return false;
    if (first_) {
      first_ = false;
      out.counts = counts_;
      return true;
    }
    const int p = (int)counts_.size();
    int j = p - 2;
    long long suffix = counts_[(std::size_t)(p - 1)];  // mass strictly right of j
    while (j >= fixed_ && suffix == 0) {
      suffix += counts_[(std::size_t)j];
      --j;
    }
    if (j < fixed_) {
      done_ = true;
      return false;
    }
    counts_[(std::size_t)j] += 1;
    for (int i = j + 1; i < p - 1; ++i) counts_[(std::size_t)i] = 0;
    counts_[(std::size_t)(p - 1)] = suffix - 1;
    out.counts = counts_;
    return true;
  }

 private:
  CompositionStream(const MeshSpec& mesh, std::vector<long long> prefix, int fixed)
      : fixed_(fixed) {
    const int p = 2 * mesh.n;
    if ((int)prefix.size() > p - 1) throw CursorError("cursor longer than 2n-1");
    counts_.assign((std::size_t)p, 0);
    long long used = 0;
    for (int i = 0; i < fixed; ++i) {
      counts_[(std::size_t)i] = prefix[(std::size_t)i];
      used += prefix[(std::size_t)i];
    }
    if (used > mesh.m) throw CursorError("cursor prefix mass exceeds m");
    counts_[(std::size_t)(p - 1)] = mesh.m - used;
  }

  std::vector<long long> counts_;
  int fixed_ = 0;
  bool first_ = true;
  bool done_ = false;
};

inline std::vector<LatticePoint> enumerate_compositions(const MeshSpec& mesh) {
  std::vector<LatticePoint> out;
  out.reserve((std::size_t)composition_count(mesh.m, 2 * mesh.n));
  CompositionStream st(mesh);
  LatticePoint p;
  while (st.next(p)) out.push_back(p);
  return out;
}

// Every point of A_n is within this l1 distance of a lattice point: each of
// the 2n coordinates moves by less than h under round-and-repair, so
// r = 2n h = 8 n^2 / m. Returned as the exact value rounded up.
inline double covering_radius_l1(const MeshSpec& mesh) {
  return Rat(8LL * mesh.n * mesh.n, mesh.m).to_double_ceil();
}

// Round-and-repair: floor the count coordinates, then hand the remaining
// quanta to the largest fractional parts (ties to the lower index). The
// result is a feasible lattice point within the covering radius.
inline LatticePoint nearest_lattice_point(const MeshSpec& mesh, const Profile& p) {
  if (p.n != mesh.n) throw ShapeError("profile n does not match mesh n");
  if (!p.normalized())
    throw DomainError("nearest_lattice_point requires a normalized profile");
  const std::size_t d = p.coeffs.size();
  LatticePoint out;
  out.counts.assign(d, 0);
  std::vector<std::pair<double, std::size_t>> frac(d);
  long long used = 0;
  for (std::size_t i = 0; i < d; ++i) {
    double x = p.coeffs[i] * (double)mesh.m / (4.0 * mesh.n);
    double fl = std::floor(x);
    out.counts[i] = (long long)fl;
    used += out.counts[i];
    frac[i] = {x - fl, i};
  }
  long long deficit = mesh.m - used;
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::size_t idx = 0;
  while (deficit > 0 && idx < d) {
    out.counts[frac[idx].second] += 1;
    --deficit;
    ++idx;
  }
  // Float drift on a barely-normalized profile can leave residual quanta;
  // spread them while keeping counts nonnegative.
  idx = 0;
  while (deficit > 0) {
    out.counts[idx % d] += 1;
    --deficit;
    ++idx;
  }
  while (deficit < 0) {
    bool moved = false;
    for (std::size_t i = d; i > 0 && deficit < 0;) {
      --i;
      std::size_t at = frac[i].second;
      if (out.counts[at] > 0) {
        out.counts[at] -= 1;
        ++deficit;
        moved = true;
      }
    }
    if (!moved) throw DomainError("nearest_lattice_point: inconsistent mass");
  }
  return out;
}

// Exact band numerator N(w) = sum_{k <= i+j <= k+l-2} c_i c_j over count
// coordinates, via the integer autoconvolution. N <= m^2.
inline long long exact_window_numerator(const LatticePoint& pt, Window w) {
  const int d = (int)pt.counts.size();
  if (d < 2 || d % 2 != 0) throw ShapeError("lattice point needs an even number of counts");
  const int n = d / 2;
  check_window(n, RangeMode::proof, w);
  for (long long c : pt.counts)
    if (c < 0) throw DomainError("lattice counts must be nonnegative");
  std::vector<long long> s((std::size_t)(2 * d - 1), 0);
  for (int i = 0; i < d; ++i) {
    if (pt.counts[(std::size_t)i] == 0) continue;
    for (int j = 0; j < d; ++j)
      s[(std::size_t)(i + j)] += pt.counts[(std::size_t)i] * pt.counts[(std::size_t)j];
  }
  long long acc = 0;
  for (int mm = w.k; mm <= w.k + w.ell - 2; ++mm) acc += s[(std::size_t)(mm + 2 * n)];
  return acc;
}

}  // namespace autoconv
