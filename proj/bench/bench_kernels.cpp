// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

// Serial vs. OpenMP timings for the data-parallel kernels. Each pair is also
// checked for bitwise agreement.
//
//   bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include "relicforge/kernels.hpp"

using namespace relicforge;
namespace ks = relicforge::kernels::serial;
namespace ko = relicforge::kernels::omp;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double omp_ms, bool same) {
  std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  kernels::configure_threads_from_env();
  std::printf("threads: %d, repeats: %d\n", kernels::max_threads(), repeats);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);

  TokenGrid grid(30, 52, 256);
  for (auto& v : grid.values) v = n(rng);
  for (const std::size_t f : {2u, 4u}) {
    TokenGrid a, b;
    const double s = best_of(repeats, [&] { a = ks::pool(grid, f); });
    const double o = best_of(repeats, [&] { b = ko::pool(grid, f); });
    report(("pool 30x52x256 /" + std::to_string(f)).c_str(), s, o, a == b);
  }

  const Eigen::Index q_rows = 1560, k_rows = 4000, d = 64;
  Matrix q(q_rows, d), k(k_rows, d), v(k_rows, d);
  for (Matrix* m : {&q, &k, &v})
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = n(rng);
  const RectMask all = RectMask::all(q_rows, k_rows);
  {
    Matrix a, b;
    const double s = best_of(repeats, [&] { a = ks::attend(q, k, v, all, 4); });
    const double o = best_of(repeats, [&] { b = ko::attend(q, k, v, all, 4); });
    report("attend 1560x4000, 4 heads", s, o, a == b);
  }

  std::vector<std::size_t> counts(64, 60);
  {
    Mask a, b;
    const double s = best_of(repeats, [&] { a = ks::block_causal(counts); });
    const double o = best_of(repeats, [&] { b = ko::block_causal(counts); });
    report("block-causal 64x60 tokens", s, o, a == b);
  }
  {
    Mask a, b;
    const double s = best_of(repeats, [&] { a = ks::hybrid_forcing(counts, 16); });
    const double o = best_of(repeats, [&] { b = ko::hybrid_forcing(counts, 16); });
    report("hybrid 64x60 tokens, K=16", s, o, a == b);
  }
  return 0;
}
