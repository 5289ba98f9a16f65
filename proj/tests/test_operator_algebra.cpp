#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvflow/operator_algebra.hpp"

#include <random>

using namespace curvflow;

namespace {

std::mt19937_64 rng(20240817);

Matrix random_matrix(int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m;
}

Matrix random_spd(int n) {
  const Matrix m = random_matrix(n);
  return Matrix(m * m.transpose() + 0.5 * n * Matrix::Identity(n, n));
}

Matrix sym_part(const MetricPoint& mp, const Matrix& x) {
  return 0.5 * (x + mp.adjoint(x));
}

TensorSlot3 random_slot3(int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  TensorSlot3 t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) t.at(i, j, k) = g(rng);
  return t;
}

}  // namespace

TEST_CASE("commutator: frozen values and antisymmetry") {
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a.diagonal() << 1, 2;
  b.diagonal() << 3, 4;
  CHECK(commutator(a, b).norm() == 0.0);  // diagonal operators commute

  b << 0, 1, 1, 0;
  Matrix expect(2, 2);
  expect << 0, -1, 1, 0;
  CHECK((commutator(a, b) - expect).norm() == doctest::Approx(0.0).epsilon(1e-14));

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(3), y = random_matrix(3);
    CHECK((commutator(x, y) + commutator(y, x)).norm() < 1e-12);
  }

  CHECK_THROWS_AS(commutator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("commutator of g-symmetric operators is g-skew") {
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const MetricPoint mp(random_spd(n));
    const Matrix a = sym_part(mp, random_matrix(n));
    const Matrix b = sym_part(mp, random_matrix(n));
    const Matrix s = commutator(a, b);
    CHECK((mp.adjoint(s) + s).norm() < 1e-12 * std::max(1.0, s.norm()));
  }
}

TEST_CASE("gap: frozen values, positivity, two evaluation routes") {
  const MetricPoint id2(Matrix::Identity(2, 2));
  CHECK(gap(Matrix::Zero(2, 2), id2) == 0.0);

  Matrix s(2, 2);
  s << 0, -1, 1, 0;
  CHECK(gap(s, id2) == doctest::Approx(2.0).epsilon(1e-15));

  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const MetricPoint mp(random_spd(n));
    const Matrix a = sym_part(mp, random_matrix(n));
    const Matrix b = sym_part(mp, random_matrix(n));
    const Matrix sc = commutator(a, b);
    const double rho = gap(sc, mp);
    CHECK(rho >= 0.0);
    CHECK(rho == doctest::Approx(mp.norm2(sc)).epsilon(1e-12));
  }
}

TEST_CASE("trace over the Cholesky frame equals the metric contraction") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const MetricPoint mp(random_spd(n));
    const TensorSlot3 t = random_slot3(n);
    const Vector via_frame = t.trace_12(mp);
    Vector direct = Vector::Zero(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k) direct(k) += mp.g_inv()(a, b) * t.at(a, b, k);
    CHECK((via_frame - direct).norm() < 1e-12 * std::max(1.0, direct.norm()));
  }
}

TEST_CASE("obstruction tensor vanishes when every summand has a zero factor") {
  const int n = 3;
  const MetricPoint mp(random_spd(n));
  const Matrix a = sym_part(mp, random_matrix(n));
  const Matrix j = sym_part(mp, random_matrix(n));
  const TensorSlot3 zero(n);
  CHECK(obstruction_tensor(a, j, zero, zero, Matrix::Zero(n, n), zero, mp).norm() ==
        0.0);

  // geodesic sphere in a space form: a, j multiples of the identity,
  // parallel, with vanishing curvature action
  const Matrix a2 = 0.7 * Matrix::Identity(n, n);
  const Matrix j2 = -0.3 * Matrix::Identity(n, n);
  CHECK(obstruction_tensor(a2, j2, zero, zero, Matrix::Zero(n, n), zero, mp).norm() ==
        0.0);

  CHECK_THROWS_AS(
      obstruction_tensor(random_matrix(n) + 5.0 * Matrix::Ones(n, n), j2, zero, zero,
                         Matrix::Zero(n, n), zero, mp),
      std::invalid_argument);
}

TEST_CASE("mu: degenerate case, normalisation, scaling invariance") {
  const int n = 3;
  const MetricPoint mp(random_spd(n));
  const Matrix zero = Matrix::Zero(n, n);
  CHECK(mu(random_matrix(n), zero, mp) == 0.0);

  const Matrix a = sym_part(mp, random_matrix(n));
  const Matrix b = sym_part(mp, random_matrix(n));
  const Matrix s = commutator(a, b);
  CHECK(mu(s, s, mp) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(mu(2.0 * s, s, mp) == doctest::Approx(-2.0).epsilon(1e-12));

  std::uniform_real_distribution<double> uni(0.1, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double kappa = uni(rng);
    const Matrix sh = 0.5 * (random_matrix(n) - mp.adjoint(random_matrix(n)));
    const double m1 = mu(sh, s, mp);
    const double m2 = mu(kappa * sh, kappa * s, mp);
    CHECK(m1 == doctest::Approx(m2).epsilon(1e-10));
  }
}

TEST_CASE("reaction term: zero-commutator cases") {
  const int n = 3;
  const MetricPoint mp(random_spd(n));
  const TensorSlot3 zero(n);

  // commuting a, j: P(S) collapses to the obstruction input
  const Matrix a = sym_part(mp, random_matrix(n));
  const Matrix s = Matrix::Zero(n, n);
  const Matrix sh = 0.5 * (random_matrix(n) - mp.adjoint(random_matrix(n)));
  const Matrix p = reaction_term(a, a, s, sh, 0.4, (a * a).trace(), a.trace(), 2.0, mp);
  CHECK((p - sh).norm() < 1e-12 * std::max(1.0, sh.norm()));

  const Matrix id = Matrix::Identity(n, n);
  const Matrix p2 = reaction_term(id, id, Matrix::Zero(n, n), Matrix::Zero(n, n), 1.0,
                                  3.0, 3.0, 5.0, mp);
  CHECK(p2.norm() == 0.0);
}

TEST_CASE("reaction term agrees with the evolution-display route") {
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const MetricPoint mp(random_spd(n));
    const Matrix a = sym_part(mp, random_matrix(n));
    const Matrix j = sym_part(mp, random_matrix(n));
    const Matrix s = commutator(a, j);
    const Matrix sh = 0.5 * (random_matrix(n) - mp.adjoint(random_matrix(n)));
    const double h = a.trace();
    const double scal = 4.0 * n * (n + 1);
    const Matrix p1 = reaction_term(a, j, s, sh, h, (a * a).trace(), j.trace(), scal, mp);
    const Matrix p2 =
        reaction_term_reference(a, j, s, sh, h, (a * a).trace(), j.trace(), scal, mp);
    const double scale = std::max(1.0, p1.norm());
    CHECK((p1 - p2).norm() < 1e-12 * scale);
  }

  // s must match [a, j]
  const MetricPoint mp(random_spd(3));
  const Matrix a = sym_part(mp, random_matrix(3));
  const Matrix j = sym_part(mp, random_matrix(3));
  CHECK_THROWS_AS(reaction_term(a, j, Matrix::Ones(3, 3) + commutator(a, j),
                                Matrix::Zero(3, 3), 0, 0, 0, 0, mp),
                  std::invalid_argument);
}

TEST_CASE("trace estimates: zero commutator, exact identities, bounds") {
  const int n = 3;
  const MetricPoint mp(random_spd(n));
  {
    const Matrix a = sym_part(mp, random_matrix(n));
    const TraceEstimates te =
        trace_estimates(a, a, Matrix::Zero(n, n), a.trace(), 1.0, mp);
    CHECK(te.rho == 0.0);
    CHECK(te.v15 == 0.0);
    CHECK(te.v16 == 0.0);
    CHECK(te.v17 == 0.0);
    CHECK(te.v18 == 0.0);
    CHECK(te.v19 == 0.0);
    CHECK(te.v20 == 0.0);
    CHECK(te.all_ok);
  }

  // space form, c = 1, n = 3: Tr(j^2) = 3 <= 3 ||R||^2 with j = Id
  {
    const MetricPoint id3(Matrix::Identity(3, 3));
    const Matrix j = Matrix::Identity(3, 3);
    CHECK((j * j).trace() == doctest::Approx(3.0));
    CHECK((j * j).trace() <= 3.0 * 1.0 * 1.0 + 1e-15);
  }

  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = sym_part(mp, random_matrix(n));
    const Matrix j = sym_part(mp, random_matrix(n));
    const Matrix s = commutator(a, j);
    const TraceEstimates te = trace_estimates(a, j, s, a.trace(), 2.0, mp);
    // (4.16) is exact for any inputs
    CHECK(std::abs(te.v16) < 1e-10 * std::max(1.0, te.rho));
    // chain identity: Tr([a, j^2] s) = 2 Tr(s^2 j) for s = [a, j]
    const double lhs = (commutator(a, j * j) * s).trace();
    const double rhs = 2.0 * (s * s * j).trace();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    // the -2H Tr([a^2, j] s) = -4H Tr(a s^2) rewriting
    const double h = a.trace();
    CHECK(-2.0 * h * (commutator(a * a, j) * s).trace() ==
          doctest::Approx(-4.0 * h * (a * s * s).trace()).epsilon(1e-9));
  }
}

TEST_CASE("c1 constant") {
  CHECK(c1_constant({2, 1.0, 1.0, 0.0}) == doctest::Approx(40.0));
  CHECK(c1_constant({3, 0.0, 0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(c1_constant({2, 1.0, 1.0, 5.0}) == doctest::Approx(50.0));
  CHECK_THROWS_AS(c1_constant({2, -1.0, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(c1_constant({2, 1.0, -1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("metric point rejects bad metrics") {
  Matrix bad(2, 2);
  bad << 1, 0.5, -0.5, 1;
  CHECK_THROWS_AS(MetricPoint{bad}, std::invalid_argument);
  Matrix neg(2, 2);
  neg << 1, 0, 0, -1;
  CHECK_THROWS_AS(MetricPoint{neg}, std::invalid_argument);
}
