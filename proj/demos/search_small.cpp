// Multistart descent at n=2 and n=3: upper bounds for the mesh-free minimum,
// printed next to the certified lower bound from the m=64 cell pass.

#include <cstdio>

#include "autoconv/certify.hpp"
#include "autoconv/search.hpp"

int main() {
  using namespace autoconv;

  for (int n : {2, 3}) {
    SearchConfig cfg;
    cfg.n = n;
    cfg.mode = RangeMode::proof;
    cfg.seed = 2026;
    cfg.restarts = 400;
    cfg.threads = 0;
    SearchResult res = multistart(cfg);

    std::printf("n=%d, %d restarts (seed %llu)\n", n, cfg.restarts, (unsigned long long)cfg.seed);
    std::printf("  best value    = %.10f  (restart %d)\n", res.best_value, res.best_restart);
    std::printf("  step_sup      = %.10f\n", res.best_step_sup);
    std::printf("  best profile  =");
    for (double v : res.best_profile.coeffs) std::printf(" %.6g", v);
    std::printf("\n");

    auto out = certify_cells(MeshSpec(n, 64), RangeMode::proof);
    const Certificate& cert = *out.certificate;
    std::printf("  certified m=64 lower bound = %s\n", cert.certified.to_decimal_floor(6).c_str());
    std::printf("  bracket: %s <= min <= %.10f\n\n", cert.certified.to_decimal_floor(6).c_str(),
                res.best_value);
  }
  return 0;
}
