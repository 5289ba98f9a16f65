#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvflow/catalog.hpp"
#include "curvflow/flow.hpp"

#include <cmath>

using namespace curvflow;

TEST_CASE("a plane does not move") {
  BuiltInExample ex = make_example("plane-r3", {});
  GridOptions opt;
  opt.res = 9;
  auto im = ex.build(0.0, opt);
  auto next = step_immersion(*im, 1e-3, FlowDirection::Forward, TimeStepper::Euler);
  for (size_t i = 0; i < im->points().size(); ++i)
    CHECK((next->points()[i] - im->points()[i]).norm() < 1e-14);
}

TEST_CASE("one Euler step of the round sphere changes the radius at rate n/R") {
  ExampleParams p;
  p.R0 = 1.0;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 65;
  auto im = ex.build(0.0, opt);
  const double dt = 1e-5;
  auto fwd = step_immersion(*im, dt, FlowDirection::Forward, TimeStepper::Euler);
  auto bwd = step_immersion(*im, dt, FlowDirection::Backward, TimeStepper::Euler);
  const size_t c = im->grid().flat(32, 32, 0);
  const double r0 = im->points()[c].norm();
  const double rf = fwd->points()[c].norm();
  const double rb = bwd->points()[c].norm();
  CHECK(rf - r0 == doctest::Approx(-2.0 * dt).epsilon(5e-3));  // n/R = 2
  CHECK(rb - r0 == doctest::Approx(+2.0 * dt).epsilon(5e-3));
}

TEST_CASE("stability guard rejects oversized steps") {
  ExampleParams p;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 33;
  auto im = ex.build(0.0, opt);
  CHECK_THROWS_AS(step_immersion(*im, 0.5, FlowDirection::Forward, TimeStepper::Euler),
                  std::invalid_argument);
}

TEST_CASE("evolution residuals on the shrinking sphere") {
  ExampleParams p;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 33;
  opt.patch = true;
  auto im = ex.build(0.0, opt);
  FlowTrace tr =
      run_pde_flow(im, 2, 3e-5, FlowDirection::Forward, TimeStepper::Midpoint, false);
  tr.margin = 8;

  // analytic cross-check of the mean-curvature equation: both sides equal
  // n^2 / R^3 on the unit sphere
  const size_t c = im->grid().flat(16, 16, 0);
  HypersurfaceState& mid = *tr.states[1];
  const double lhs = (tr.states[2]->mean[c] - tr.states[0]->mean[c]) /
                     (tr.times[2] - tr.times[0]);
  CHECK(lhs == doctest::Approx(4.0).epsilon(2e-2));
  CHECK(mid.mean[c] == doctest::Approx(2.0).epsilon(1e-3));

  for (EquationTag tag : all_equation_tags()) {
    const double r = residual_check(tr, tag, 1);
    INFO(display_tag(tag));
    CHECK(r < 2e-3);
  }
  CHECK(pushforward_derivative_check(tr, 0, 1) < 1e-3);
  CHECK(pushforward_derivative_check(tr, 1, 1) < 1e-3);
}

TEST_CASE("evolution residuals hold on a non-adapted flow") {
  ExampleParams p;
  p.amplitude = 0.08;
  BuiltInExample ex = make_example("cp2-perturbed", p);
  GridOptions opt;
  opt.res = 17;
  opt.patch = true;
  auto im = ex.build(0.0, opt);
  FlowTrace tr =
      run_pde_flow(im, 2, 1e-5, FlowDirection::Forward, TimeStepper::Midpoint, false);
  tr.margin = 4;
  // coarse-level sanity: every display holds to the stencil scale
  CHECK(residual_check(tr, EquationTag::Metric, 1) < 5e-3);
  CHECK(residual_check(tr, EquationTag::Normal, 1) < 5e-3);
  CHECK(residual_check(tr, EquationTag::Shape, 1) < 0.5);
  CHECK(residual_check(tr, EquationTag::Mean, 1) < 5e-2);
  CHECK(residual_check(tr, EquationTag::Jacobi, 1) < 0.5);
  CHECK(residual_check(tr, EquationTag::Commutator, 1) < 1.0);
  CHECK(residual_check(tr, EquationTag::Gap, 1) < 1.0);
}

TEST_CASE("backward flow reverses the evolution displays") {
  ExampleParams p;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 33;
  opt.patch = true;
  auto im = ex.build(0.0, opt);
  FlowTrace tr =
      run_pde_flow(im, 2, 3e-5, FlowDirection::Backward, TimeStepper::Midpoint, false);
  tr.margin = 8;
  CHECK(residual_check(tr, EquationTag::Metric, 1) < 2e-3);
  CHECK(residual_check(tr, EquationTag::Mean, 1) < 2e-3);
}

TEST_CASE("gap monitor and the corollary-E gate") {
  ExampleParams p;
  {
    BuiltInExample ex = make_example("sphere-r3", p);
    GridOptions opt;
    opt.res = 17;
    opt.patch = true;
    auto im = ex.build(0.0, opt);
    FlowTrace tr =
        run_pde_flow(im, 3, 3e-5, FlowDirection::Forward, TimeStepper::Midpoint, true);
    tr.margin = 4;
    const double tol = default_rho_tol(tr);
    CHECK(tol > 0.0);
    const GapMonitorReport gm = gap_monitor(tr, tol);
    CHECK(!gm.t_min.has_value());  // stays curvature-adapted
    const CorollaryEReport ce = corollary_e_gate(tr, tol);
    CHECK(ce.pairing_nonneg);
    CHECK(ce.rho_within_tol);
    CHECK(trace_c1(tr, ex.model.r_norm()) > 0.0);
  }
  {
    p.amplitude = 0.08;
    BuiltInExample ex = make_example("cp2-perturbed", p);
    GridOptions opt;
    opt.res = 11;
    opt.patch = true;
    auto im = ex.build(0.0, opt);
    FlowTrace tr =
        run_pde_flow(im, 2, 1e-5, FlowDirection::Forward, TimeStepper::Midpoint, true);
    tr.margin = 3;
    const GapMonitorReport gm = gap_monitor(tr, 1e-6);
    REQUIRE(gm.t_min.has_value());
    CHECK(*gm.t_min == 0.0);  // already not curvature-adapted at t = 0
    CHECK(gm.max_rho_overall > 0.1);
  }
}

TEST_CASE("equation tags cover the display set") {
  const auto tags = all_equation_tags();
  CHECK(tags.size() == 7);
  CHECK(std::string(display_tag(EquationTag::Metric)) == "Lemma 2.1");
  CHECK(std::string(display_tag(EquationTag::Gap)) == "Lemma 4.3");
}
