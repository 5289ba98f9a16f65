#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvflow/catalog.hpp"
#include "curvflow/immersion.hpp"

#include <cmath>
#include <sstream>

using namespace curvflow;

namespace {

std::vector<double> sorted_shape_eigs(const HypersurfaceState& st, size_t idx) {
  const MetricPoint mp(st.g[idx]);
  // similarity transform into the orthonormal frame makes A symmetric
  const Matrix f = mp.orthonormal_frame();
  const Matrix a_on = f.inverse() * st.shape[idx] * f;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a_on + a_on.transpose()));
  std::vector<double> out(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

size_t center_of(const GridSpec& g) {
  return g.flat(g.size[0] / 2, g.size[1] / 2, g.size[2] / 2);
}

}  // namespace

TEST_CASE("plane: flat data") {
  BuiltInExample ex = make_example("plane-r3", {});
  GridOptions opt;
  opt.res = 17;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  st->second_order_fields();
  st->for_interior(3, [&](size_t i) {
    CHECK(st->shape[i].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(st->mean[i]) < 1e-12);
    CHECK(st->rho[i] == 0.0);
  });
  const GaussCodazziReport gc = gauss_codazzi_residual(*st, 3);
  CHECK(gc.gauss < 1e-12);
  CHECK(gc.codazzi < 1e-12);
}

TEST_CASE("round sphere: shape operator, mean curvature, orientation") {
  ExampleParams p;
  p.R0 = 1.0;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 65;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  const size_t c = center_of(st->grid());
  // A = (1/R0) Id and H = 2/R0 under the outward orientation
  const auto eigs = sorted_shape_eigs(*st, c);
  CHECK(eigs[0] == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(eigs[1] == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(st->mean[c] == doctest::Approx(2.0).epsilon(5e-3));
  // g-symmetry of A and of the normal Jacobi operator before differencing
  st->for_interior(1, [&](size_t i) {
    const MetricPoint mp(st->g[i]);
    CHECK(mp.is_symmetric(st->shape[i], 1e-10));
    CHECK(mp.is_symmetric(st->jac[i], 1e-10));
  });
}

TEST_CASE("round sphere: parallel shape operator and Codazzi symmetry") {
  ExampleParams p;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 33;
  opt.patch = true;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  st->covariant_derivatives();
  double grad_a_max = 0.0, codazzi = 0.0;
  st->for_interior(4, [&](size_t i) {
    grad_a_max = std::max(grad_a_max, st->grad_a[i].max_abs());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k)
          codazzi = std::max(codazzi, std::abs(st->grad_a[i].at(a, b, k) -
                                               st->grad_a[i].at(b, a, k)));
  });
  CHECK(grad_a_max < 5e-4);  // A is parallel on the round sphere
  CHECK(codazzi < 1e-10);    // Codazzi symmetry in a flat ambient
}

TEST_CASE("hyperbolic geodesic sphere") {
  ExampleParams p;
  p.R0 = 1.0;
  BuiltInExample ex = make_example("hyperbolic-sphere-h3", p);
  GridOptions opt;
  opt.res = 65;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  const size_t c = center_of(st->grid());
  CHECK(st->mean[c] == doctest::Approx(2.0 / std::tanh(1.0)).epsilon(5e-3));
  // normal Jacobi operator is c Id = -Id
  CHECK((st->jac[c] + Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("geodesic sphere in the complex projective plane") {
  ExampleParams p;
  p.r0 = 0.7;
  BuiltInExample ex = make_example("cp2-geodesic-sphere", p);
  GridOptions opt;
  opt.res = 17;
  opt.patch = true;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  const size_t c = center_of(st->grid());

  const auto eigs = sorted_shape_eigs(*st, c);
  CHECK(eigs[0] == doctest::Approx(2.0 / std::tan(1.4)).epsilon(3e-3));
  CHECK(eigs[1] == doctest::Approx(1.0 / std::tan(0.7)).epsilon(3e-3));
  CHECK(eigs[2] == doctest::Approx(1.0 / std::tan(0.7)).epsilon(3e-3));

  // normal Jacobi eigenvalues {1, 1, 4}
  const MetricPoint mp(st->g[c]);
  const Matrix f = mp.orthonormal_frame();
  const Matrix j_on = f.inverse() * st->jac[c] * f;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (j_on + j_on.transpose()));
  CHECK(es.eigenvalues()(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(es.eigenvalues()(2) == doctest::Approx(4.0).epsilon(1e-8));

  // curvature-adapted: the gap function vanishes to round-off
  double max_rho = 0.0;
  st->for_interior(3, [&](size_t i) { max_rho = std::max(max_rho, st->rho[i]); });
  CHECK(max_rho < 1e-18);

  // gap via the algebra layer equals the direct commutator norm
  st->for_interior(3, [&](size_t i) {
    const MetricPoint m(st->g[i]);
    const double direct = m.norm2(commutator(st->shape[i], st->jac[i]));
    CHECK(std::abs(st->rho[i] - direct) <= 1e-12 * std::max(1.0, direct));
  });
}

TEST_CASE("structural identities converge at second order on patches") {
  struct Row {
    const char* name;
    double tol_fine[6];  // gauss, codazzi, 3.8, 3.10, 3.11, L3.2
  };
  ExampleParams p;
  for (const char* name : {"sphere-r3", "cp2-geodesic-sphere", "cp2-perturbed"}) {
    BuiltInExample ex = make_example(name, p);
    double prev[6] = {0, 0, 0, 0, 0, 0};
    double cur[6];
    for (int level = 0; level < 2; ++level) {
      GridOptions opt;
      opt.res = level == 0 ? 9 : 17;
      opt.patch = true;
      auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
      st->second_order_fields();
      const int margin = (opt.res - 1) / 4;
      const GaussCodazziReport gc = gauss_codazzi_residual(*st, margin);
      const SecondOrderReport so = second_order_identities(*st, margin);
      cur[0] = gc.gauss;
      cur[1] = gc.codazzi;
      cur[2] = so.transport;
      cur[3] = so.second_deriv;
      cur[4] = so.traced_laplace;
      cur[5] = so.gradient_trace;
      if (level == 1) {
        for (int q = 0; q < 6; ++q) {
          if (prev[q] < 1e-10) {
            CHECK(cur[q] < 1e-9);  // identically-satisfied case
          } else {
            // ratios above 4 happen when the coarse level is preasymptotic
            const double ratio = prev[q] / cur[q];
            INFO(name, " identity ", q, " ratio ", ratio);
            CHECK(ratio > 3.2);
          }
        }
      }
      for (int q = 0; q < 6; ++q) prev[q] = cur[q];
    }
  }
}

TEST_CASE("obstruction tensor vanishes on the Hopf example, not generically") {
  ExampleParams p;
  BuiltInExample hopf = make_example("cp2-geodesic-sphere", p);
  double prev = 0.0;
  for (int level = 0; level < 2; ++level) {
    GridOptions opt;
    opt.res = level == 0 ? 9 : 17;
    opt.patch = true;
    auto st = HypersurfaceState::fundamental_forms(hopf.build(0.0, opt));
    const AdaptednessReport rep = adaptedness_report(*st, (opt.res - 1) / 4);
    if (level == 1) {
      CHECK(prev / rep.max_s_hat > 3.2);  // converges to zero at order ~2
      CHECK(rep.max_s_hat < 3e-2);
      CHECK(rep.max_skew_defect < 5e-2);  // skewness holds in the limit
    }
    prev = rep.max_s_hat;
  }

  p.amplitude = 0.08;
  BuiltInExample gen = make_example("cp2-perturbed", p);
  GridOptions opt;
  opt.res = 13;
  opt.patch = true;
  auto st = HypersurfaceState::fundamental_forms(gen.build(0.0, opt));
  const AdaptednessReport rep = adaptedness_report(*st, 3);
  CHECK(rep.max_rho > 0.1);  // generically not curvature-adapted
}

TEST_CASE("space-form slot tensors vanish") {
  ExampleParams p;
  BuiltInExample ex = make_example("clifford-torus-s3", p);
  GridOptions opt;
  opt.res = 32;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  double r3max = 0.0, r1max = 0.0;
  st->for_interior(1, [&](size_t i) {
    r3max = std::max(r3max, st->r3[i].max_abs());
    r1max = std::max(r1max, st->r1[i].max_abs());
  });
  CHECK(r3max < 1e-10);
  CHECK(r1max < 1e-10);
  // minimal: H vanishes up to the stencil error
  const size_t c = center_of(st->grid());
  CHECK(std::abs(st->mean[c]) < 2e-2);
  const auto eigs = sorted_shape_eigs(*st, c);
  CHECK(eigs[0] == doctest::Approx(-1.0).epsilon(2e-2));
  CHECK(eigs[1] == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("slot tensors carry their structural invariants on geometric data") {
  ExampleParams p;
  p.amplitude = 0.08;
  BuiltInExample ex = make_example("cp2-perturbed", p);
  // g-symmetry of the grad-A slices holds to stencil order
  double defects[2];
  for (int level = 0; level < 2; ++level) {
    GridOptions opt;
    opt.res = level == 0 ? 11 : 21;
    opt.patch = true;
    auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
    st->covariant_derivatives();
    double worst = 0.0;
    st->for_interior((opt.res - 1) / 4, [&](size_t i) {
      const MetricPoint mp(st->g[i]);
      for (int a = 0; a < 3; ++a) {
        const Matrix s = st->grad_a[i].slice_first(a);
        worst = std::max(worst, (mp.adjoint(s) - s).cwiseAbs().maxCoeff());
      }
      // r3 is antisymmetric in its two input slots, exactly
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int k = 0; k < 3; ++k)
            CHECK(std::abs(st->r3[i].at(a, b, k) + st->r3[i].at(b, a, k)) < 1e-10);
    });
    defects[level] = worst;
  }
  CHECK(defects[0] / defects[1] > 3.0);
  CHECK(defects[1] < 2.5e-3);
}

TEST_CASE("equator hypersphere: minimal and totally geodesic") {
  BuiltInExample ex = make_example("equator-s3", {});
  GridOptions opt;
  opt.res = 33;
  opt.patch = true;
  auto st = HypersurfaceState::fundamental_forms(ex.build(0.0, opt));
  const size_t c = center_of(st->grid());
  CHECK(st->shape[c].cwiseAbs().maxCoeff() < 5e-4);  // zero up to stencil error
  CHECK(std::abs(st->mean[c]) < 5e-4);
  // the normal Jacobi operator of the unit-curvature ambient is the identity
  CHECK((st->jac[c] - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("seeded perturbations are deterministic") {
  ExampleParams p;
  p.seed = 9001;
  p.amplitude = 0.07;
  BuiltInExample ex = make_example("cp2-perturbed", p);
  GridOptions opt;
  opt.res = 9;
  opt.patch = true;
  auto a = ex.build(0.0, opt);
  auto b = make_example("cp2-perturbed", p).build(0.0, opt);
  for (size_t i = 0; i < a->points().size(); ++i)
    CHECK((a->points()[i] - b->points()[i]).norm() == 0.0);
  // a different seed gives a different surface
  p.seed = 9002;
  auto cdiff = make_example("cp2-perturbed", p).build(0.0, opt);
  double diff = 0.0;
  for (size_t i = 0; i < a->points().size(); ++i)
    diff = std::max(diff, (a->points()[i] - cdiff->points()[i]).norm());
  CHECK(diff > 1e-6);
}

TEST_CASE("grid file round trip") {
  ExampleParams p;
  BuiltInExample ex = make_example("sphere-r3", p);
  GridOptions opt;
  opt.res = 9;
  opt.patch = true;
  auto im = ex.build(0.0, opt);

  std::ostringstream os;
  os << "# tabulated immersion\n";
  os.precision(17);
  const GridSpec& g = im->grid();
  for (int i = 0; i < g.size[0]; ++i)
    for (int j = 0; j < g.size[1]; ++j) {
      os << i << " " << j;
      const Vector& x = im->points()[g.flat(i, j, 0)];
      for (int d = 0; d < 3; ++d) os << " " << x(d);
      os << "\n";
    }
  std::istringstream in(os.str());
  ParametrizedImmersion loaded = load_immersion_grid(
      in, im->model(), g.spacing, g.periodic, im->orientation());
  CHECK(loaded.grid().size[0] == g.size[0]);
  auto st0 = HypersurfaceState::fundamental_forms(im);
  auto st1 = HypersurfaceState::fundamental_forms(
      std::make_shared<ParametrizedImmersion>(loaded));
  const size_t c = center_of(g);
  CHECK(std::abs(st0->mean[c] - st1->mean[c]) < 1e-9);
}

TEST_CASE("degenerate immersions are rejected") {
  const AmbientModel m = AmbientModel::euclidean(3);
  GridSpec g;
  g.n = 2;
  g.size = {8, 8, 1};
  g.spacing = {0.1, 0.1, 1.0};
  std::vector<Vector> pts(g.count(), Vector::Zero(3));  // everything collapsed
  ParametrizedImmersion im(m, g, std::move(pts));
  auto shared = std::make_shared<ParametrizedImmersion>(im);
  CHECK_THROWS_AS(HypersurfaceState::fundamental_forms(shared), std::runtime_error);

  // grids below stencil width are rejected outright
  GridSpec small;
  small.n = 2;
  small.size = {3, 3, 1};
  std::vector<Vector> pts2(small.count(), Vector::Zero(3));
  CHECK_THROWS_AS(ParametrizedImmersion(m, small, std::move(pts2)),
                  std::invalid_argument);
}
