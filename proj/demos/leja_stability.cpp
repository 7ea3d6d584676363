// Prints the first Leja points on [-1,1] and the growth of their Lebesgue
// constants against the conjectured linear bound.

#include <cstdio>

#include "pss/interp.hpp"

int main() {
  const int k_max = 20;
  auto seq = pss::leja_sequence(k_max);
  std::printf("first %d Leja points (t0 = 1):\n", k_max + 1);
  for (int k = 0; k <= k_max; ++k) std::printf("  t_%-2d = %+.10f\n", k, seq.point(k));

  auto profile = pss::lebesgue_profile_1d(seq, k_max, 20001);
  std::printf("\n   k   lambda_k    1+k\n");
  for (int k = 0; k <= k_max; ++k)
    std::printf("  %2d   %8.4f   %4d\n", k, profile[static_cast<std::size_t>(k)], 1 + k);
  return 0;
}
