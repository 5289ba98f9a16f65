// Benchmark of the OpenMP kernels against their serial reference paths.
#include "curvflow/catalog.hpp"
#include "curvflow/max_principle.hpp"
#include "curvflow/parallel_for.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

using namespace curvflow;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double time_state_build(bool parallel, int res) {
  parallel_kernels() = parallel;
  BuiltInExample ex = make_example("cp2-geodesic-sphere", {});
  GridOptions opt;
  opt.res = res;
  auto im = ex.build(0.0, opt);
  const auto t0 = Clock::now();
  auto st = HypersurfaceState::fundamental_forms(im);
  st->second_order_fields();
  st->adaptedness_fields();
  return seconds_since(t0);
}

double time_heat(bool parallel, int n, int steps) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> cur(static_cast<size_t>(n) * n), nxt(cur.size());
  for (double& v : cur) v = uni(rng);
  const auto t0 = Clock::now();
  for (int s = 0; s < steps; ++s) {
    if (parallel) heat_step_parallel(cur, nxt, n, n, 0.2);
    else heat_step_serial(cur, nxt, n, n, 0.2);
    cur.swap(nxt);
  }
  return seconds_since(t0);
}

}  // namespace

int main() {
  std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");
  {
    const double ts = time_state_build(false, 20);
    const double tp = time_state_build(true, 20);
    std::printf("%-34s %10.3f %10.3f %8.2fx\n", "hypersurface state build (20^3)", ts,
                tp, ts / tp);
  }
  {
    const double ts = time_heat(false, 256, 2000);
    const double tp = time_heat(true, 256, 2000);
    std::printf("%-34s %10.3f %10.3f %8.2fx\n", "heat stencil 256^2 x 2000", ts, tp,
                ts / tp);
  }
  parallel_kernels() = true;
  return 0;
}
