#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvflow/parallel.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace curvflow;

namespace {
std::mt19937_64 rng(991);
}

TEST_CASE("parallel eigenvalue: identity at r = 0 and euclidean offsets") {
  std::uniform_real_distribution<double> lam(-2.0, 2.0), nu(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double l = lam(rng), v = nu(rng);
    CHECK(parallel_eigenvalue(l, v, 0.0) == doctest::Approx(l).epsilon(1e-14));
  }
  // offset spheres in euclidean space: moving inward by r gives 1/(R0 - r)
  const double R0 = 1.0;
  for (double r : {0.1, 0.3, 0.6}) {
    CHECK(parallel_eigenvalue(1.0 / R0, 0.0, -r) ==
          doctest::Approx(1.0 / (R0 - r)).epsilon(1e-13));
    CHECK(parallel_eigenvalue(1.0 / R0, 0.0, +r) ==
          doctest::Approx(1.0 / (R0 + r)).epsilon(1e-13));
  }
}

TEST_CASE("parallel eigenvalue: sphere cotangent law and the Jacobi-ODE oracle") {
  // nu = 1, lambda = cot(r0): the offset at distance r is cot(r0 + r)
  const double r0 = 0.8;
  for (double r : {-0.3, -0.1, 0.2, 0.5}) {
    CHECK(parallel_eigenvalue(1.0 / std::tan(r0), 1.0, r) ==
          doctest::Approx(1.0 / std::tan(r0 + r)).epsilon(1e-12));
  }

  // oracle: integrate y'' = -nu y with y(0) = 1, y'(0) = lambda and compare
  // y'(r)/y(r); 100 samples across nu > 0, nu = 0, nu < 0 within 80% of the
  // focal distance.
  std::uniform_real_distribution<double> lam(-2.0, 2.0), nupos(0.2, 4.0);
  auto oracle = [](double l, double v, double r) {
    const int steps = 4000;
    const double dt = r / steps;
    double y = 1.0, yp = l;
    for (int s = 0; s < steps; ++s) {
      const double k1y = yp, k1p = -v * y;
      const double y2 = y + 0.5 * dt * k1y, p2 = yp + 0.5 * dt * k1p;
      const double k2y = p2, k2p = -v * y2;
      const double y3 = y + 0.5 * dt * k2y, p3 = yp + 0.5 * dt * k2p;
      const double k3y = p3, k3p = -v * y3;
      const double y4 = y + dt * k3y, p4 = yp + dt * k3p;
      const double k4y = p4, k4p = -v * y4;
      y += (dt / 6) * (k1y + 2 * k2y + 2 * k3y + k4y);
      yp += (dt / 6) * (k1p + 2 * k2p + 2 * k3p + k4p);
    }
    return yp / y;
  };
  int done = 0;
  while (done < 100) {
    const double l = lam(rng);
    double v;
    const int branch = done % 3;
    if (branch == 0) v = nupos(rng);
    else if (branch == 1) v = 0.0;
    else v = -nupos(rng);
    // nearest focal radius (denominator zero) in the positive direction
    double focal = -1.0;
    double prev = parallel_denominator(l, v, 0.0);
    for (double r = 1e-3; r < 50.0; r += 1e-3) {
      const double cur = parallel_denominator(l, v, r);
      if (prev * cur <= 0.0) {
        focal = r;
        break;
      }
      prev = cur;
    }
    const double r_max = focal > 0.0 ? 0.8 * focal : 2.0;
    std::uniform_real_distribution<double> rr(0.05 * r_max, r_max);
    const double r = rr(rng);
    const double num = oracle(l, v, r);
    const double ref = parallel_eigenvalue(l, v, r);
    CHECK(std::abs(num - ref) / std::max(1.0, std::abs(ref)) < 1e-8);
    ++done;
  }
}

TEST_CASE("cocycle property inside the focal-free interval") {
  std::uniform_real_distribution<double> lam(-1.5, 1.5), nu(-2.0, 2.0),
      rr(-0.2, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = lam(rng), v = nu(rng);
    const double r1 = rr(rng), r2 = rr(rng);
    double two_leg, direct;
    try {
      const double mid = parallel_eigenvalue(l, v, r1);
      two_leg = parallel_eigenvalue(mid, v, r2);
      direct = parallel_eigenvalue(l, v, r1 + r2);
    } catch (const focal_point_error&) {
      continue;
    }
    CHECK(std::abs(two_leg - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("spectrum transport: nu and multiplicities invariant") {
  const IsoparametricSpectrum s(
      {{1.0 / std::tan(0.7), 1.0, 2}, {2.0 / std::tan(1.4), 4.0, 1}});
  for (double r : {-0.2, 0.1, 0.3}) {
    const IsoparametricSpectrum t = jacobi_invariance(s, r);
    REQUIRE(t.entries().size() == 2);
    CHECK(t.entries()[0].nu == 1.0);
    CHECK(t.entries()[1].nu == 4.0);
    CHECK(t.entries()[0].mult == 2);
    CHECK(t.entries()[1].mult == 1);
    // tube law
    CHECK(t.entries()[0].lambda ==
          doctest::Approx(1.0 / std::tan(0.7 + r)).epsilon(1e-12));
    CHECK(t.entries()[1].lambda ==
          doctest::Approx(2.0 / std::tan(2.0 * (0.7 + r))).epsilon(1e-12));
  }
  const IsoparametricSpectrum id = jacobi_invariance(s, 0.0);
  CHECK(id.entries()[0].lambda == s.entries()[0].lambda);
}

TEST_CASE("mean curvature profiles") {
  // euclidean sphere, n = 2: inward H(r) = 2/(R0 - r)
  const ParallelFamily eu = make_family(IsoparametricSpectrum({{1.0, 0.0, 2}}));
  CHECK(mean_curvature_profile(eu, -0.25) ==
        doctest::Approx(2.0 / 0.75).epsilon(1e-13));
  // equatorial hypersphere: minimal
  const ParallelFamily eq = make_family(IsoparametricSpectrum({{0.0, 1.0, 2}}));
  CHECK(mean_curvature_profile(eq, 0.0) == doctest::Approx(0.0));
  // geodesic sphere in the complex projective plane
  const double r0 = 0.7;
  const ParallelFamily cp = make_family(IsoparametricSpectrum(
      {{1.0 / std::tan(r0), 1.0, 2}, {2.0 / std::tan(2 * r0), 4.0, 1}}));
  CHECK(mean_curvature_profile(cp, 0.0) ==
        doctest::Approx(2.0 / std::tan(r0) + 2.0 / std::tan(2 * r0)).epsilon(1e-13));
}

TEST_CASE("flow of the euclidean sphere reproduces the radius law") {
  const double R0 = 1.0;
  const int n = 2;
  const ParallelFamily fam = make_family(IsoparametricSpectrum({{1.0 / R0, 0.0, n}}));
  const SpectrumFlowResult flow =
      flow_ode(fam, 0.3, 1e-4, FlowDirection::Forward);
  REQUIRE(flow.collapsed);
  double worst = 0.0;
  for (const auto& s : flow.samples) {
    const double expect = std::sqrt(R0 * R0 - 2.0 * n * s.t);
    const double have = R0 + s.r;
    worst = std::max(worst, std::abs(have - expect) / expect);
  }
  CHECK(worst < 1e-6);
  CHECK(std::abs(flow.collapse_time - 0.25) < 1e-8);
  CHECK(flow.collapse_lo <= 0.25);
  CHECK(flow.collapse_hi >= 0.25);
  CHECK(flow.collapse_hi - flow.collapse_lo < 1e-8);

  // first integral of the radius law
  for (const auto& s : flow.samples) {
    const double inv = (R0 + s.r) * (R0 + s.r) + 2.0 * n * s.t;
    CHECK(std::abs(inv - R0 * R0) < 1e-6);
  }

  // independent quadrature route for the collapse time
  const auto quad = collapse_time_quadrature(fam, FlowDirection::Forward);
  REQUIRE(quad.has_value());
  CHECK(*quad == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("backward flow of the euclidean sphere grows") {
  const double R0 = 1.0;
  const int n = 2;
  const ParallelFamily fam = make_family(IsoparametricSpectrum({{1.0 / R0, 0.0, n}}));
  const SpectrumFlowResult flow =
      flow_ode(fam, 0.2, 1e-4, FlowDirection::Backward);
  CHECK(!flow.collapsed);
  double worst = 0.0;
  for (const auto& s : flow.samples) {
    const double expect = std::sqrt(R0 * R0 + 2.0 * n * s.t);
    worst = std::max(worst, std::abs((R0 + s.r) - expect) / expect);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("stationary equatorial hypersphere") {
  const ParallelFamily fam = make_family(IsoparametricSpectrum({{0.0, 1.0, 2}}));
  const SpectrumFlowResult flow = flow_ode(fam, 0.05, 1e-3, FlowDirection::Forward);
  CHECK(!flow.collapsed);
  for (const auto& s : flow.samples) CHECK(s.r == 0.0);
}

TEST_CASE("theorem-A monitor on the tube flow") {
  const double r0 = 0.7;
  const ParallelFamily fam = make_family(IsoparametricSpectrum(
      {{1.0 / std::tan(r0), 1.0, 2}, {2.0 / std::tan(2 * r0), 4.0, 1}}));
  const SpectrumFlowResult flow = flow_ode(fam, 0.2, 1e-4, FlowDirection::Forward);
  const TheoremAMonitor mon = theorem_a_monitor(fam, flow);
  CHECK(mon.max_rho == 0.0);
  CHECK(mon.nu_constant);
  CHECK(mon.mult_constant);
  REQUIRE(mon.nu_values.size() == 3);
  CHECK(mon.nu_values[0] == 1.0);
  CHECK(mon.nu_values[1] == 1.0);
  CHECK(mon.nu_values[2] == 4.0);
  // the small tube shrinks and collapses onto its centre before t = 0.2
  CHECK(flow.collapsed);
  CHECK(std::abs(flow.focal_radius + r0) < 1e-10);
}

TEST_CASE("mean-curvature evolution along the reduced flow follows the chain rule") {
  // along r(t): dH/dt = (dH/dr)(dr/dt) = -H dH/dr, where each principal
  // curvature obeys the Riccati law d lambda / dr = -(lambda^2 + nu)
  const double r0 = 0.7;
  const ParallelFamily fam = make_family(IsoparametricSpectrum(
      {{1.0 / std::tan(r0), 1.0, 2}, {2.0 / std::tan(2 * r0), 4.0, 1}}));
  const SpectrumFlowResult flow = flow_ode(fam, 0.05, 1e-4, FlowDirection::Forward);
  REQUIRE(flow.samples.size() > 10);
  for (size_t i = 5; i < flow.samples.size() - 5; i += 7) {
    const auto& sc = flow.samples[i];
    // Richardson-extrapolated time derivative of H along the samples
    const double d1 = (flow.samples[i + 1].h_value - flow.samples[i - 1].h_value) /
                      (flow.samples[i + 1].t - flow.samples[i - 1].t);
    const double d2 = (flow.samples[i + 2].h_value - flow.samples[i - 2].h_value) /
                      (flow.samples[i + 2].t - flow.samples[i - 2].t);
    const double dhdt = (4.0 * d1 - d2) / 3.0;
    double dhdr = 0.0;
    for (size_t q = 0; q < sc.lambda.size(); ++q)
      dhdr -= sc.lambda[q] * sc.lambda[q] + sc.nu[q];
    const double chain = -sc.h_value * dhdr;
    CHECK(std::abs(dhdt - chain) / std::max(1.0, std::abs(chain)) < 1e-8);
  }
}

TEST_CASE("focal guard raises informative errors") {
  CHECK_THROWS_AS(parallel_eigenvalue(1.0, 0.0, -1.0 + 1e-9), focal_point_error);
  try {
    parallel_eigenvalue(1.0, 0.0, -1.0 + 1e-9);
  } catch (const focal_point_error& e) {
    CHECK(e.r() == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("spectrum file round trip") {
  const IsoparametricSpectrum s({{0.5, 1.0, 2}, {-1.25, 4.0, 1}});
  const std::string text = format_spectrum(s);
  std::istringstream in(text);
  const IsoparametricSpectrum t = parse_spectrum(in);
  REQUIRE(t.entries().size() == 2);
  CHECK(t.entries()[0].lambda == 0.5);
  CHECK(t.entries()[1].mult == 1);
  CHECK(t.n() == 3);

  std::istringstream bare("0.5 1.0 2\n# comment\n-1.25 4.0 1\n");
  const IsoparametricSpectrum u = parse_spectrum(bare);
  CHECK(u.n() == 3);
}
