#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <autoconv/certify.hpp>
#include <autoconv/io.hpp>
#include <autoconv/lattice.hpp>
#include <autoconv/objective.hpp>

#include "test_util.hpp"

using namespace autoconv;
using namespace testutil;

namespace {

Certificate run_global(int n, long long m, RangeMode mode = RangeMode::proof,
                       CertifyOptions opt = {}) {
  auto out = certify_global(MeshSpec(n, m), mode, opt);
  REQUIRE(out.complete());
  return *out.certificate;
}

Certificate run_cells(int n, long long m, RangeMode mode = RangeMode::proof,
                      CertifyOptions opt = {}) {
  auto out = certify_cells(MeshSpec(n, m), mode, opt);
  REQUIRE(out.complete());
  return *out.certificate;
}

void check_same_certificate(const Certificate& a, const Certificate& b) {
  CHECK(a.n == b.n);
  CHECK(a.m == b.m);
  CHECK(a.mode == b.mode);
  CHECK(a.method == b.method);
  CHECK(a.lattice_min == b.lattice_min);
  CHECK(a.certified == b.certified);
  CHECK(a.argmin_counts == b.argmin_counts);
  CHECK(a.points_evaluated == b.points_evaluated);
}

}  // namespace

TEST_CASE("lipschitz constant is 1 for every n") {
  for (int n = 1; n <= 6; ++n) CHECK(lipschitz_constant(n) == 1.0);
  CHECK_THROWS_AS(lipschitz_constant(0), DomainError);
}

TEST_CASE("method names round-trip") {
  CHECK(std::string(to_string(Method::global_lipschitz)) == "global-lipschitz");
  CHECK(std::string(to_string(Method::cell_quadratic)) == "cell-quadratic");
  CHECK(method_from_string("global-lipschitz") == Method::global_lipschitz);
  CHECK(method_from_string("cell-quadratic") == Method::cell_quadratic);
  CHECK_THROWS_AS(method_from_string("newton"), DomainError);
}

TEST_CASE("global certificates on frozen meshes") {
  {
    auto c = run_global(1, 4);
    CHECK(c.lattice_min == Rat(1, 1));
    CHECK(c.certified == Rat(-1, 1));
    CHECK(c.error_term() == Rat(2, 1));
    CHECK(c.argmin_counts == std::vector<long long>{2, 2});
    CHECK(c.points_evaluated == 5);
    CHECK(c.method == Method::global_lipschitz);
    CHECK(c.mode == RangeMode::proof);
  }
  {
    auto c = run_global(1, 64);
    CHECK(c.lattice_min == Rat(1, 1));
    CHECK(c.certified == Rat(7, 8));
    CHECK(c.error_term() == Rat(1, 8));
    CHECK(c.points_evaluated == 65);
  }
  {
    auto c = run_global(2, 16);
    CHECK(c.lattice_min == Rat(9, 8));
    CHECK(c.certified == Rat(-7, 8));
    CHECK(c.points_evaluated == 969);
  }
  {
    auto c = run_global(2, 64);
    CHECK(c.lattice_min == Rat(71, 64));
    CHECK(c.certified == Rat(39, 64));
    CHECK(c.error_term() == Rat(1, 2));
    CHECK(c.points_evaluated == 47905);
  }
}

TEST_CASE("cell certificates on frozen meshes") {
  struct Case {
    int n;
    long long m;
    Rat latmin, certified;
    unsigned long long points;
  };
  const Case cases[] = {
      {1, 4, Rat(1, 1), Rat(1, 1), 5},         {1, 8, Rat(1, 1), Rat(1, 1), 9},
      {2, 8, Rat(19, 16), Rat(1, 1), 165},     {2, 16, Rat(9, 8), Rat(1, 1), 969},
      {2, 32, Rat(571, 512), Rat(139, 128), 6545},
      {2, 64, Rat(71, 64), Rat(2239, 2048), 47905},
  };
  for (const Case& tc : cases) {
    INFO("n=" << tc.n << " m=" << tc.m);
    auto c = run_cells(tc.n, tc.m);
    CHECK(c.lattice_min == tc.latmin);
    CHECK(c.certified == tc.certified);
    CHECK(c.points_evaluated == tc.points);
    CHECK(c.method == Method::cell_quadratic);
    CHECK(c.error_term() >= Rat(0, 1));
  }
}

TEST_CASE("certified bound never exceeds the lattice minimum") {
  for (int n : {1, 2}) {
    for (long long m : {1LL, 2LL, 3LL, 5LL, 8LL, 13LL}) {
      for (RangeMode mode : {RangeMode::theorem, RangeMode::proof}) {
        INFO("n=" << n << " m=" << m << " mode=" << to_string(mode));
        auto g = run_global(n, m, mode);
        CHECK(g.certified <= g.lattice_min);
        auto c = run_cells(n, m, mode);
        CHECK(c.certified <= c.lattice_min);
        CHECK(c.lattice_min == g.lattice_min);
        CHECK(c.argmin_counts == g.argmin_counts);
      }
    }
  }
}

TEST_CASE("cell bounds dominate global bounds at equal mesh") {
  for (int n : {1, 2}) {
    for (long long m : {4LL, 8LL, 16LL, 32LL}) {
      INFO("n=" << n << " m=" << m);
      auto g = run_global(n, m);
      auto c = run_cells(n, m);
      CHECK(c.certified >= g.certified);
    }
  }
}

TEST_CASE("proof-mode cell certificates never fall below the floor") {
  for (int n : {1, 2}) {
    for (long long m : {1LL, 2LL, 5LL, 8LL, 16LL}) {
      INFO("n=" << n << " m=" << m);
      auto c = run_cells(n, m, RangeMode::proof);
      CHECK(c.certified >= Rat(1, 1));
    }
  }
}

TEST_CASE("reported argmin attains the lattice minimum") {
  for (auto [n, m] : {std::pair<int, long long>{1, 16}, {2, 16}, {2, 32}}) {
    for (RangeMode mode : {RangeMode::theorem, RangeMode::proof}) {
      INFO("n=" << n << " m=" << m << " mode=" << to_string(mode));
      auto c = run_global(n, m, mode);
      LatticePoint pt{c.argmin_counts};
      Profile p = profile_from_point(MeshSpec(n, m), pt);
      double val = objective(p, mode).value;
      CHECK(std::fabs(val - c.lattice_min.to_double()) <= 1e-12 * std::max(1.0, val));
    }
  }
}

TEST_CASE("mesh refinement does not loosen the lattice minimum") {
  for (int n : {1, 2}) {
    Rat prev;
    bool first = true;
    for (long long m : {8LL, 16LL, 32LL, 64LL}) {
      auto c = run_global(n, m);
      if (!first) CHECK(c.lattice_min <= prev);
      prev = c.lattice_min;
      first = false;
    }
  }
}

TEST_CASE("theorem-mode lattice minimum is at most the proof-mode one") {
  for (auto [n, m] : {std::pair<int, long long>{1, 8}, {2, 8}, {2, 16}}) {
    auto th = run_global(n, m, RangeMode::theorem);
    auto pf = run_global(n, m, RangeMode::proof);
    CHECK(th.lattice_min <= pf.lattice_min);
  }
}

TEST_CASE("certificates are sound against sampled profiles") {
  struct Probe {
    Certificate cert;
    RangeMode mode;
  };
  std::vector<Probe> probes;
  probes.push_back({run_cells(2, 32, RangeMode::proof), RangeMode::proof});
  probes.push_back({run_global(2, 64, RangeMode::proof), RangeMode::proof});
  probes.push_back({run_global(2, 8, RangeMode::theorem), RangeMode::theorem});
  probes.push_back({run_cells(1, 16, RangeMode::proof), RangeMode::proof});

  auto g = rng(991);
  for (int trial = 0; trial < 10000; ++trial) {
    int which = (int)(g() % probes.size());
    const Probe& pr = probes[(std::size_t)which];
    Profile p = random_normalized(pr.cert.n, g);
    double val = objective(p, pr.mode).value;
    REQUIRE(val >= pr.cert.certified.to_double_floor() - 1e-12);
  }
}

// For a cell with base q and level t, the certified per-window bound is
//   (4n * min_vertex N_w - 2 (l-1) t (2n-t)) / (l m^2).
// Sample random cells, windows, and convex combinations of the cell's
// vertices, and confirm the true window value never dips below the bound.
TEST_CASE("cell dip bound dominates sampled quadratic minima") {
  auto g = rng(7321);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + (int)(g() % 3);
    const int d = 2 * n;
    const long long m = 4 + (long long)(g() % 13);
    const int t = 1 + (int)(g() % std::min<long long>(d, m));

    std::vector<long long> q((std::size_t)d, 0);
    for (long long i = 0; i < m - t; ++i) q[(std::size_t)(g() % (std::uint64_t)d)] += 1;

    // All cell vertices q + e_S, |S| = t.
    std::vector<std::vector<long long>> verts;
    std::vector<int> subset((std::size_t)t);
    for (int i = 0; i < t; ++i) subset[(std::size_t)i] = i;
    for (;;) {
      std::vector<long long> v = q;
      for (int i = 0; i < t; ++i) v[(std::size_t)subset[(std::size_t)i]] += 1;
      verts.push_back(std::move(v));
      int pos = t - 1;
      while (pos >= 0 && subset[(std::size_t)pos] == d - t + pos) --pos;
      if (pos < 0) break;
      subset[(std::size_t)pos] += 1;
      for (int i = pos + 1; i < t; ++i) subset[(std::size_t)i] = subset[(std::size_t)(i - 1)] + 1;
    }

    const auto ws = window_set(n, RangeMode::proof);
    const MeshSpec mesh(n, m);
    for (int wi = 0; wi < 4; ++wi) {
      const Window win = ws[(std::size_t)(g() % (std::uint64_t)ws.size())];
      long long minN = -1;
      for (const auto& v : verts) {
        long long N = exact_window_numerator(LatticePoint{v}, win);
        if (minN < 0 || N < minN) minN = N;
      }
      const Rat bound = Rat::make(
          (__int128)4 * n * minN - (__int128)2 * (win.ell - 1) * t * (d - t),
          (__int128)win.ell * m * m);

      for (int s = 0; s < 8; ++s) {
        // Random convex combination of the vertices.
        std::vector<double> lam(verts.size());
        double tot = 0.0;
        for (double& L : lam) {
          L = -std::log(uniform01(g));
          tot += L;
        }
        std::vector<double> coeffs((std::size_t)d, 0.0);
        for (std::size_t v = 0; v < verts.size(); ++v)
          for (int i = 0; i < d; ++i)
            coeffs[(std::size_t)i] += (lam[v] / tot) * (double)verts[v][(std::size_t)i];
        for (double& x : coeffs) x *= 4.0 * n / (double)m;
        Profile p = make_profile(n, std::span<const double>(coeffs.data(), coeffs.size()));
        REQUIRE(window_value(autoconvolve(p), win) >= bound.to_double() - 1e-9);
      }
    }
  }
}

TEST_CASE("thread count does not change the certificate") {
  CertifyOptions o1, o4, o0;
  o1.threads = 1;
  o4.threads = 4;
  o0.threads = 0;
  {
    auto a = run_cells(2, 32, RangeMode::proof, o1);
    auto b = run_cells(2, 32, RangeMode::proof, o4);
    auto c = run_cells(2, 32, RangeMode::proof, o0);
    check_same_certificate(a, b);
    check_same_certificate(a, c);
    auto ja = certificate_to_json(a);
    auto jb = certificate_to_json(b);
    ja["elapsed_s"] = 0.0;
    jb["elapsed_s"] = 0.0;
    CHECK(ja.dump() == jb.dump());
  }
  {
    auto a = run_global(2, 64, RangeMode::proof, o1);
    auto b = run_global(2, 64, RangeMode::proof, o4);
    check_same_certificate(a, b);
  }
}

TEST_CASE("certificate JSON schema is pinned") {
  auto c = run_cells(2, 32);
  auto j = certificate_to_json(c);
  CHECK(j["schema_version"] == 1);
  CHECK(j["n"] == 2);
  CHECK(j["m"] == 32);
  CHECK(j["range_mode"] == "proof");
  CHECK(j["method"] == "cell-quadratic");
  CHECK(j["lattice_min"]["num"] == 571);
  CHECK(j["lattice_min"]["den"] == 512);
  CHECK(j["certified_bound"] == 1.0859375);       // 139/128 is exactly representable
  CHECK(j["error_term"] == 0.029296875);          // 15/512
  CHECK(j["points_evaluated"] == 6545);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"schema_version", "n", "m", "range_mode", "method",
                                         "lattice_min", "error_term", "certified_bound",
                                         "argmin_counts", "points_evaluated", "elapsed_s"});
}

TEST_CASE("interrupting after a fixed chunk budget leaves a deterministic frontier") {
  CertifyOptions opt;
  opt.max_chunks = 7;
  opt.threads = 2;
  bool saved = false;
  Checkpoint last;
  opt.save_checkpoint = [&](const Checkpoint& c) {
    saved = true;
    last = c;
  };
  auto out = certify_cells(MeshSpec(2, 32), RangeMode::proof, opt);
  REQUIRE_FALSE(out.complete());
  REQUIRE(out.checkpoint.has_value());
  REQUIRE(saved);
  CHECK(out.checkpoint->phase == 0);
  CHECK(out.checkpoint->next_first == 7);
  CHECK(out.checkpoint->points_evaluated > 0);
  CHECK(last.phase == 0);
  CHECK(last.next_first == 7);
}

TEST_CASE("resume in fixed budget steps reproduces the direct certificate") {
  for (Method method : {Method::global_lipschitz, Method::cell_quadratic}) {
    INFO(to_string(method));
    const MeshSpec mesh(2, 32);
    auto direct_out = method == Method::global_lipschitz
                          ? certify_global(mesh, RangeMode::proof)
                          : certify_cells(mesh, RangeMode::proof);
    REQUIRE(direct_out.complete());

    CertifyOptions opt;
    opt.max_chunks = 7;
    opt.threads = 2;
    auto cur = method == Method::global_lipschitz
                   ? certify_global(mesh, RangeMode::proof, opt)
                   : certify_cells(mesh, RangeMode::proof, opt);
    int rounds = 0;
    while (!cur.complete()) {
      REQUIRE(rounds++ < 200);
      // Round-trip the checkpoint through JSON on every hop.
      Checkpoint rt = checkpoint_from_json(checkpoint_to_json(*cur.checkpoint));
      cur = resume(rt, opt);
    }
    check_same_certificate(*cur.certificate, *direct_out.certificate);
  }
}

TEST_CASE("resuming a terminal checkpoint returns the stored certificate") {
  Checkpoint last;
  bool saved = false;
  CertifyOptions opt;
  opt.save_checkpoint = [&](const Checkpoint& c) {
    saved = true;
    last = c;
  };
  auto direct = run_global(2, 16, RangeMode::proof, opt);
  REQUIRE(saved);
  REQUIRE(last.phase == -1);
  REQUIRE(last.final_cert.has_value());

  auto again = resume(last);
  REQUIRE(again.complete());
  check_same_certificate(*again.certificate, direct);
  // The stored elapsed time comes back untouched, so the JSON is byte-identical.
  CHECK(certificate_to_json(*again.certificate).dump() == certificate_to_json(direct).dump());

  Checkpoint rt = checkpoint_from_json(checkpoint_to_json(last));
  auto third = resume(rt);
  REQUIRE(third.complete());
  CHECK(certificate_to_json(*third.certificate).dump() == certificate_to_json(direct).dump());
}

TEST_CASE("budget stop is resumable and converges to the direct result") {
  const MeshSpec mesh(1, 500000);
  auto direct = certify_global(mesh, RangeMode::proof, [] {
    CertifyOptions o;
    o.threads = 4;
    return o;
  }());
  REQUIRE(direct.complete());
  CHECK(direct.certificate->lattice_min == Rat(1, 1));
  CHECK(direct.certificate->certified == Rat(62499, 62500));  // 1 - 8/500000
  CHECK(direct.certificate->points_evaluated == 500001);

  CertifyOptions opt;
  opt.threads = 1;
  opt.budget_s = 0.0;
  auto cur = certify_global(mesh, RangeMode::proof, opt);
  int rounds = 0;
  while (!cur.complete()) {
    REQUIRE(rounds++ < 1000);
    CertifyOptions ro;
    ro.threads = 4;
    cur = resume(*cur.checkpoint, ro);
  }
  check_same_certificate(*cur.certificate, *direct.certificate);
}

TEST_CASE("checkpoint validation rejects corrupt or mismatched state") {
  // Produce a genuine mid-run checkpoint to mutate.
  CertifyOptions opt;
  opt.max_chunks = 5;
  auto out = certify_cells(MeshSpec(2, 16), RangeMode::proof, opt);
  REQUIRE_FALSE(out.complete());
  const Checkpoint good = *out.checkpoint;

  {
    Checkpoint bad = good;
    bad.version = "0.0.1";
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.phase = 99;
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.next_first = -1;
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.next_first = bad.m + 5;
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.phase = 2;
    bad.lat_best_numer = -1;
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.lat_best_numer = 5;
    bad.lat_argmin = {1, 2, 3};  // wrong length
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.margin = Rat(3, 2);
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.has_cell_best = true;
    bad.cell_best_den = 0;
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    Checkpoint bad = good;
    bad.phase = -1;
    bad.final_cert.reset();
    CHECK_THROWS_AS(resume(bad), CheckpointError);
  }
  {
    // Mismatched run parameters.
    detail::CertifyDriver drv(MeshSpec(2, 32), RangeMode::proof, Method::cell_quadratic, {});
    CHECK_THROWS_AS(drv.load(good), CheckpointError);
    detail::CertifyDriver drv2(MeshSpec(2, 16), RangeMode::theorem, Method::cell_quadratic, {});
    CHECK_THROWS_AS(drv2.load(good), CheckpointError);
    detail::CertifyDriver drv3(MeshSpec(2, 16), RangeMode::proof, Method::global_lipschitz, {});
    CHECK_THROWS_AS(drv3.load(good), CheckpointError);
  }
}

TEST_CASE("checkpoint JSON parsing rejects malformed input") {
  CertifyOptions opt;
  opt.max_chunks = 3;
  auto out = certify_cells(MeshSpec(2, 16), RangeMode::proof, opt);
  REQUIRE_FALSE(out.complete());
  auto j = checkpoint_to_json(*out.checkpoint);

  CHECK_THROWS_AS(checkpoint_from_json(nlohmann::json::array()), CheckpointError);
  {
    auto bad = j;
    bad["schema_version"] = 999;
    CHECK_THROWS_AS(checkpoint_from_json(bad), CheckpointError);
  }
  {
    auto bad = j;
    bad.erase("next_first");
    CHECK_THROWS_AS(checkpoint_from_json(bad), CheckpointError);
  }
  {
    auto bad = j;
    bad["points_evaluated"] = "lots";
    CHECK_THROWS_AS(checkpoint_from_json(bad), CheckpointError);
  }
  {
    auto bad = j;
    bad["margin"] = {{"num", 1}, {"den", 0}};
    CHECK_THROWS_AS(checkpoint_from_json(bad), CheckpointError);
  }
  {
    auto bad = j;
    bad.erase("final_certificate");
    CHECK_THROWS_AS(checkpoint_from_json(bad), CheckpointError);
  }
  CHECK_THROWS_AS(load_checkpoint_file("/nonexistent/path/cp.json"), CheckpointError);
  {
    const std::string path = "garbage_checkpoint_test.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_checkpoint_file(path), CheckpointError);
    std::remove(path.c_str());
  }
}

TEST_CASE("checkpoint JSON round-trips terminal state exactly") {
  Checkpoint last;
  CertifyOptions opt;
  opt.save_checkpoint = [&](const Checkpoint& c) { last = c; };
  auto direct = run_cells(2, 16, RangeMode::proof, opt);
  REQUIRE(last.phase == -1);
  Checkpoint rt = checkpoint_from_json(checkpoint_to_json(last));
  CHECK(rt.version == last.version);
  CHECK(rt.margin == last.margin);
  CHECK(rt.points_evaluated == last.points_evaluated);
  REQUIRE(rt.final_cert.has_value());
  check_same_certificate(*rt.final_cert, direct);
  CHECK(rt.final_cert->elapsed_s == last.final_cert->elapsed_s);
}

TEST_CASE("certify rejects bad options") {
  CHECK_THROWS_AS(certify_global(MeshSpec(1, 2000000), RangeMode::proof), DomainError);
  {
    CertifyOptions opt;
    opt.margin = Rat(1, 1);
    CHECK_THROWS_AS(certify_cells(MeshSpec(1, 4), RangeMode::proof, opt), DomainError);
  }
  {
    CertifyOptions opt;
    opt.margin = Rat(-1, 32);
    CHECK_THROWS_AS(certify_cells(MeshSpec(1, 4), RangeMode::proof, opt), DomainError);
  }
  {
    CertifyOptions opt;
    opt.threads = -1;
    CHECK_THROWS_AS(certify_global(MeshSpec(1, 4), RangeMode::proof, opt), DomainError);
  }
}

TEST_CASE("wider margins cannot weaken the cell certificate") {
  // Every candidate bound is sound, so admitting more candidates can only
  // raise the per-cell max.
  CertifyOptions narrow, wide;
  narrow.margin = Rat(1, 32);
  wide.margin = Rat(1, 4);
  auto a = run_cells(2, 32, RangeMode::proof, narrow);
  auto b = run_cells(2, 32, RangeMode::proof, wide);
  CHECK(b.certified >= a.certified);
}
