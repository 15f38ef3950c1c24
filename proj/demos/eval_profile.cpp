// Evaluate the objective for a few hand-picked profiles and print the
// maximizing windows.

#include <cstdio>

#include "autoconv/objective.hpp"

int main() {
  using namespace autoconv;

  struct Case {
    int n;
    std::vector<double> coeffs;
  };
  std::vector<Case> cases = {
      {1, {2, 2}},
      {1, {0, 4}},
      {2, {2, 2, 2, 2}},
      {2, {3, 1, 1, 3}},
  };

  for (const auto& c : cases) {
    Profile p = make_profile(c.n, std::span<const double>(c.coeffs.data(), c.coeffs.size()));
    std::printf("n=%d profile=(", c.n);
    for (std::size_t i = 0; i < c.coeffs.size(); ++i)
      std::printf("%s%g", i ? ", " : "", c.coeffs[i]);
    std::printf(")\n");
    for (auto mode : {RangeMode::theorem, RangeMode::proof}) {
      auto ev = objective(p, mode);
      std::printf("  %-7s objective = %.12g, argmax =", to_string(mode), ev.value);
      for (auto w : ev.argmax) std::printf(" (k=%d,l=%d)", w.k, w.ell);
      std::printf("\n");
    }
    if (p.normalized()) std::printf("  step_sup = %.12g\n", step_sup(p));
  }
  return 0;
}
