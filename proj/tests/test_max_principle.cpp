#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvflow/max_principle.hpp"
#include "curvflow/operator_algebra.hpp"

#include <cmath>
#include <random>

using namespace curvflow;

namespace {
std::vector<double> random_field(int nx, int ny, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> f(static_cast<size_t>(nx) * ny);
  for (double& v : f) v = uni(rng);
  return f;
}
}  // namespace

TEST_CASE("serial and parallel kernels produce identical bytes") {
  const int n = 48;
  const std::vector<double> in = random_field(n, n, 7);
  std::vector<double> a, b;
  heat_step_serial(in, a, n, n, 0.2);
  heat_step_parallel(in, b, n, n, 0.2);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("zero stays zero") {
  const int n = 16;
  std::vector<double> zero(static_cast<size_t>(n) * n, 0.0);
  const MaxPrincipleResult r = max_principle_check(zero, n, n, 0.3, 40.0, 0.05);
  CHECK(r.bound_ok);
  CHECK(r.monotone_ok);
  CHECK(r.final_max_rho == 0.0);
}

TEST_CASE("constant data attains the exponential bound exactly") {
  const int n = 64;
  std::vector<double> flat(static_cast<size_t>(n) * n, 0.7);
  const double h = 2.0 * M_PI / n;
  const MaxPrincipleResult r = max_principle_check(flat, n, n, h, 40.0, 0.1);
  CHECK(r.bound_ok);
  CHECK(r.monotone_ok);
  CHECK(std::abs(r.final_max_rho - r.bound_at_end) / r.bound_at_end < 1e-12);
}

TEST_CASE("a bump decays strictly below the bound") {
  const int n = 64;
  std::vector<double> bump(static_cast<size_t>(n) * n, 0.0);
  for (int i = 28; i < 36; ++i)
    for (int j = 28; j < 36; ++j) bump[static_cast<size_t>(i) * n + j] = 1.0;
  const double h = 2.0 * M_PI / n;
  const MaxPrincipleResult r = max_principle_check(bump, n, n, h, 40.0, 0.1);
  CHECK(r.bound_ok);
  CHECK(r.monotone_ok);
  CHECK(r.worst_ratio <= 1.0);
  // strictly below the bound by the end (the plateau has fully decayed)
  CHECK(r.final_max_rho < r.bound_at_end * (1.0 - 1e-6));
}

TEST_CASE("random non-negative fields never violate the comparison bound") {
  const int n = 48;
  const double h = 2.0 * M_PI / n;
  const double c1 = c1_constant({2, 1.0, 1.0, 0.0});
  CHECK(c1 == doctest::Approx(40.0));
  for (int run = 0; run < 20; ++run) {
    const MaxPrincipleResult r =
        max_principle_check(random_field(n, n, 100 + run), n, n, h, c1, 0.05);
    CHECK(r.bound_ok);
    CHECK(r.monotone_ok);
  }
}

TEST_CASE("input validation") {
  const int n = 16;
  std::vector<double> f(static_cast<size_t>(n) * n, 1.0);
  CHECK_THROWS_AS(max_principle_check(f, n, n, 0.3, 40.0, 0.05, 1.5),
                  std::invalid_argument);  // CFL violation
  f[3] = -1.0;
  CHECK_THROWS_AS(max_principle_check(f, n, n, 0.3, 40.0, 0.05),
                  std::invalid_argument);
  std::vector<double> wrong(7, 1.0);
  CHECK_THROWS_AS(max_principle_check(wrong, n, n, 0.3, 40.0, 0.05),
                  std::invalid_argument);
}
