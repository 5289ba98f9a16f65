#include "curvflow/immersion.hpp"

#include "curvflow/parallel_for.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvflow {

bool& parallel_kernels() {
  static bool enabled = true;
  return enabled;
}

namespace detail {
void parallel_for_impl(std::int64_t n, void (*body)(std::int64_t, void*), void* ctx,
                       bool parallel) {
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i, ctx);
    return;
  }
#else
  (void)parallel;
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i, ctx);
}
}  // namespace detail

bool GridSpec::shift(int axis, int delta, int i, int j, int k, size_t* out) const {
  int c[3] = {i, j, k};
  c[axis] += delta;
  if (c[axis] < 0 || c[axis] >= size[axis]) {
    if (!periodic[axis]) return false;
    c[axis] = ((c[axis] % size[axis]) + size[axis]) % size[axis];
  }
  *out = flat(c[0], c[1], c[2]);
  return true;
}

int GridSpec::margin_distance(int i, int j, int k) const {
  int m = 1 << 28;
  const int c[3] = {i, j, k};
  for (int a = 0; a < 3; ++a) {
    if (size[a] <= 1 || periodic[a]) continue;
    m = std::min({m, c[a], size[a] - 1 - c[a]});
  }
  return m;
}

ParametrizedImmersion::ParametrizedImmersion(AmbientModel model, GridSpec grid,
                                             std::vector<Vector> points,
                                             double orientation, double degeneracy_eps)
    : model_(std::move(model)),
      grid_(grid),
      pts_(std::move(points)),
      orient_(orientation),
      eps_(degeneracy_eps) {
  if (pts_.size() != grid_.count())
    throw std::invalid_argument("ParametrizedImmersion: point count mismatch");
  if (grid_.n < 2 || grid_.n > 3)
    throw std::invalid_argument("ParametrizedImmersion: n must be 2 or 3");
  if (model_.dim() != grid_.n + 1)
    throw std::invalid_argument("ParametrizedImmersion: ambient dim must be n + 1");
  for (int a = 0; a < grid_.n; ++a)
    if (grid_.size[a] < 5)
      throw std::invalid_argument("ParametrizedImmersion: grid too small for stencils");
}

ParametrizedImmersion load_immersion_grid(std::istream& in, const AmbientModel& model,
                                          const std::array<double, 3>& spacing,
                                          const std::array<bool, 3>& periodic,
                                          double orientation) {
  struct Row {
    int idx[3];
    Vector x;
  };
  std::vector<Row> rows;
  int n_param = -1;
  std::string line;
  const int dim = model.dim();
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) continue;
    const int n_here = static_cast<int>(vals.size()) - dim;
    if (n_here != 2 && n_here != 3)
      throw std::invalid_argument("grid file: bad column count");
    if (n_param < 0) n_param = n_here;
    if (n_here != n_param) throw std::invalid_argument("grid file: inconsistent rows");
    Row r;
    r.idx[0] = static_cast<int>(vals[0]);
    r.idx[1] = static_cast<int>(vals[1]);
    r.idx[2] = n_param == 3 ? static_cast<int>(vals[2]) : 0;
    r.x = Vector(dim);
    for (int d = 0; d < dim; ++d) r.x(d) = vals[n_param + d];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("grid file: empty");

  GridSpec g;
  g.n = n_param;
  g.spacing = spacing;
  g.periodic = periodic;
  for (const auto& r : rows)
    for (int a = 0; a < 3; ++a) g.size[a] = std::max(g.size[a], r.idx[a] + 1);
  std::vector<Vector> pts(g.count(), Vector::Zero(dim));
  std::vector<char> seen(g.count(), 0);
  for (const auto& r : rows) {
    const size_t f = g.flat(r.idx[0], r.idx[1], r.idx[2]);
    pts[f] = r.x;
    seen[f] = 1;
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("grid file: missing grid points");
  return ParametrizedImmersion(model, g, std::move(pts), orientation);
}

namespace {

// First derivative of a field along an axis, second order, one-sided at
// non-periodic edges.
template <class T, class Field>
T fd1(const GridSpec& g, const Field& f, int axis, int i, int j, int k) {
  const double h = g.spacing[axis];
  size_t p1, m1;
  const bool hp = g.shift(axis, +1, i, j, k, &p1);
  const bool hm = g.shift(axis, -1, i, j, k, &m1);
  if (hp && hm) return (f(p1) - f(m1)) / (2.0 * h);
  const size_t c = g.flat(i, j, k);
  if (hp) {
    size_t p2;
    if (!g.shift(axis, +2, i, j, k, &p2))
      throw std::runtime_error("fd1: stencil exceeds grid");
    return (-3.0 * f(c) + 4.0 * f(p1) - f(p2)) / (2.0 * h);
  }
  size_t m2;
  if (!hm || !g.shift(axis, -2, i, j, k, &m2))
    throw std::runtime_error("fd1: stencil exceeds grid");
  return (3.0 * f(c) - 4.0 * f(m1) + f(m2)) / (2.0 * h);
}

// Second derivative along one axis, second order, one-sided at edges.
template <class T, class Field>
T fd2(const GridSpec& g, const Field& f, int axis, int i, int j, int k) {
  const double h2 = g.spacing[axis] * g.spacing[axis];
  size_t p1, m1;
  const bool hp = g.shift(axis, +1, i, j, k, &p1);
  const bool hm = g.shift(axis, -1, i, j, k, &m1);
  const size_t c = g.flat(i, j, k);
  if (hp && hm) return (f(p1) - 2.0 * f(c) + f(m1)) / h2;
  if (hp) {
    size_t p2, p3;
    if (!g.shift(axis, +2, i, j, k, &p2) || !g.shift(axis, +3, i, j, k, &p3))
      throw std::runtime_error("fd2: stencil exceeds grid");
    return (2.0 * f(c) - 5.0 * f(p1) + 4.0 * f(p2) - f(p3)) / h2;
  }
  size_t m2, m3;
  if (!hm || !g.shift(axis, -2, i, j, k, &m2) || !g.shift(axis, -3, i, j, k, &m3))
    throw std::runtime_error("fd2: stencil exceeds grid");
  return (2.0 * f(c) - 5.0 * f(m1) + 4.0 * f(m2) - f(m3)) / h2;
}

Vector cofactor_normal(const Matrix& t) {
  const int dim = static_cast<int>(t.rows());
  const int n = static_cast<int>(t.cols());
  Vector v(dim);
  Matrix minor(n, n);
  for (int k = 0; k < dim; ++k) {
    int r = 0;
    for (int row = 0; row < dim; ++row) {
      if (row == k) continue;
      minor.row(r++) = t.row(row);
    }
    v(k) = ((k % 2) == 0 ? 1.0 : -1.0) * minor.determinant();
  }
  return v;
}

}  // namespace

std::shared_ptr<HypersurfaceState> HypersurfaceState::fundamental_forms(
    std::shared_ptr<const ParametrizedImmersion> im) {
  auto st = std::shared_ptr<HypersurfaceState>(new HypersurfaceState());
  st->im_ = im;
  const GridSpec& gr = im->grid();
  const AmbientModel& model = im->model();
  const int n = gr.n;
  const int dim = model.dim();
  const size_t cnt = gr.count();
  const std::vector<Vector>& pts = im->points();
  auto pt_field = [&](size_t idx) -> const Vector& { return pts[idx]; };

  st->tangents.assign(cnt, Matrix());
  parallel_for(cnt, [&](std::int64_t idx) {
    int i, j, k;
    gr.unflat(idx, &i, &j, &k);
    Matrix t(dim, n);
    for (int a = 0; a < n; ++a) t.col(a) = fd1<Vector>(gr, pt_field, a, i, j, k);
    st->tangents[idx] = std::move(t);
  });

  st->g.assign(cnt, Matrix());
  st->ginv.assign(cnt, Matrix());
  st->xi.assign(cnt, Vector());
  st->h2.assign(cnt, Matrix());
  st->shape.assign(cnt, Matrix());
  st->mean.assign(cnt, 0.0);
  st->jac.assign(cnt, Matrix());
  st->r1.assign(cnt, TensorSlot3(n));
  st->r3.assign(cnt, TensorSlot3(n));
  st->s_op.assign(cnt, Matrix());
  st->rho.assign(cnt, 0.0);

  std::vector<char> degenerate(cnt, 0);
  parallel_for(cnt, [&](std::int64_t idx) {
    int i, j, k;
    gr.unflat(idx, &i, &j, &k);
    const Vector& x = pts[idx];
    const Matrix gamb = model.metric(x);
    const std::vector<Matrix> chr = model.christoffel(x);
    const Matrix& t = st->tangents[idx];

    Matrix g = t.transpose() * gamb * t;
    g = 0.5 * (g + g.transpose());
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success ||
        g.determinant() < im->degeneracy_eps()) {
      degenerate[idx] = 1;
      return;
    }
    const Matrix ginv = llt.solve(Matrix::Identity(n, n));

    Vector nrm = gamb.ldlt().solve(cofactor_normal(t));
    const double nn = std::sqrt(nrm.dot(gamb * nrm));
    nrm = (im->orientation() / nn) * nrm;

    // Ambient Hessian of the immersion; symmetric stencils keep h exactly
    // symmetric.
    Matrix h(n, n);
    auto tang_col = [&](int b) {
      return [&, b](size_t q) -> Vector { return st->tangents[q].col(b); };
    };
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        Vector d2;
        if (a == b) d2 = fd2<Vector>(gr, pt_field, a, i, j, k);
        else d2 = fd1<Vector>(gr, tang_col(b), a, i, j, k);
        Vector cov = d2 + AmbientModel::christoffel_apply(chr, t.col(a), t.col(b));
        h(a, b) = -nrm.dot(gamb * cov);
        h(b, a) = h(a, b);
      }

    const Matrix shape = ginv * h;
    Matrix jform(n, n);
    for (int b = 0; b < n; ++b) {
      const Vector q = model.curvature(x, t.col(b), nrm, nrm);
      for (int c = 0; c < n; ++c) jform(c, b) = q.dot(gamb * t.col(c));
    }
    jform = 0.5 * (jform + jform.transpose());
    const Matrix jac = ginv * jform;

    TensorSlot3 r1(n), r3(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const Vector q1 = model.curvature(x, nrm, t.col(a), t.col(b));
        const Vector q3 = model.curvature(x, t.col(a), t.col(b), nrm);
        Vector c1v(n), c3v(n);
        for (int c = 0; c < n; ++c) {
          c1v(c) = q1.dot(gamb * t.col(c));
          c3v(c) = q3.dot(gamb * t.col(c));
        }
        const Vector r1c = ginv * c1v, r3c = ginv * c3v;
        for (int kk = 0; kk < n; ++kk) {
          r1.at(a, b, kk) = r1c(kk);
          r3.at(a, b, kk) = r3c(kk);
        }
      }

    st->g[idx] = g;
    st->ginv[idx] = ginv;
    st->xi[idx] = nrm;
    st->h2[idx] = h;
    st->shape[idx] = shape;
    st->mean[idx] = shape.trace();
    st->jac[idx] = jac;
    st->r1[idx] = std::move(r1);
    st->r3[idx] = std::move(r3);
    st->s_op[idx] = shape * jac - jac * shape;
    const double r = -(st->s_op[idx] * st->s_op[idx]).trace();
    st->rho[idx] = r <= 0.0 ? 0.0 : r;
  });
  for (size_t idx = 0; idx < cnt; ++idx)
    if (degenerate[idx])
      throw std::runtime_error("fundamental_forms: degenerate immersion");

  st->level_ = 1;
  return st;
}

void HypersurfaceState::covariant_derivatives() {
  if (level_ < 1) throw std::logic_error("covariant_derivatives: need level 1");
  if (level_ >= 2) return;
  const GridSpec& gr = grid();
  const int n = gr.n;
  const size_t cnt = count();

  gamma.assign(cnt, {});
  auto g_field = [&](size_t q) -> const Matrix& { return g[q]; };
  parallel_for(cnt, [&](std::int64_t idx) {
    int i, j, k;
    gr.unflat(idx, &i, &j, &k);
    std::vector<Matrix> dg(n);
    for (int a = 0; a < n; ++a) dg[a] = fd1<Matrix>(gr, g_field, a, i, j, k);
    std::vector<Matrix> gm(n, Matrix::Zero(n, n));
    for (int kk = 0; kk < n; ++kk)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b) {
          double v = 0.0;
          for (int l = 0; l < n; ++l)
            v += ginv[idx](kk, l) * (dg[a](b, l) + dg[b](a, l) - dg[l](a, b));
          gm[kk](a, b) = 0.5 * v;
          gm[kk](b, a) = 0.5 * v;
        }
    gamma[idx] = std::move(gm);
  });

  auto cov_grad = [&](const std::vector<Matrix>& field, std::vector<TensorSlot3>* out) {
    out->assign(cnt, TensorSlot3(n));
    auto f = [&](size_t q) -> const Matrix& { return field[q]; };
    parallel_for(cnt, [&](std::int64_t idx) {
      int i, j, k;
      gr.unflat(idx, &i, &j, &k);
      TensorSlot3 t(n);
      for (int a = 0; a < n; ++a) {
        Matrix d = fd1<Matrix>(gr, f, a, i, j, k);
        Matrix ga(n, n);  // (ga)^k_m = Gamma^k_{a m}
        for (int kk = 0; kk < n; ++kk)
          for (int mm = 0; mm < n; ++mm) ga(kk, mm) = gamma[idx][kk](a, mm);
        d += ga * field[idx] - field[idx] * ga;
        for (int jj = 0; jj < n; ++jj)
          for (int kk = 0; kk < n; ++kk) t.at(a, jj, kk) = d(kk, jj);
      }
      (*out)[idx] = std::move(t);
    });
  };
  cov_grad(shape, &grad_a);
  cov_grad(jac, &grad_j);
  cov_grad(s_op, &grad_s);

  trace_grad_a.assign(cnt, Vector());
  grad_mean.assign(cnt, Vector());
  auto mean_field = [&](size_t q) { return mean[q]; };
  parallel_for(cnt, [&](std::int64_t idx) {
    int i, j, k;
    gr.unflat(idx, &i, &j, &k);
    trace_grad_a[idx] = grad_a[idx].trace_12(MetricPoint(g[idx]));
    Vector dh(n);
    for (int a = 0; a < n; ++a) dh(a) = fd1<double>(gr, mean_field, a, i, j, k);
    grad_mean[idx] = ginv[idx] * dh;
  });

  level_ = 2;
}

void HypersurfaceState::second_order_fields() {
  if (level_ < 2) covariant_derivatives();
  if (level_ >= 3) return;
  const GridSpec& gr = grid();
  const int n = gr.n;
  const size_t cnt = count();

  // Intrinsic curvature from derivatives of the Christoffel field.
  riem.assign(cnt, Tensor4(n));
  parallel_for(cnt, [&](std::int64_t idx) {
    int i, j, k;
    gr.unflat(idx, &i, &j, &k);
    Tensor4 r(n);
    std::vector<Matrix> dgam(n);  // dgam[a] stacked as dgam[a].block: use per-k below
    for (int a = 0; a < n; ++a) {
      for (int kk = 0; kk < n; ++kk) {
        auto gam_k = [&, kk](size_t q) -> const Matrix& { return gamma[q][kk]; };
        const Matrix d = fd1<Matrix>(gr, gam_k, a, i, j, k);
        if (dgam[a].size() == 0) dgam[a] = Matrix::Zero(n * n, n);
        dgam[a].block(kk * n, 0, n, n) = d;
      }
    }
    auto dG = [&](int a, int kk, int b, int l) { return dgam[a](kk * n + b, l); };
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int l = 0; l < n; ++l)
          for (int kk = 0; kk < n; ++kk) {
            double v = dG(a, kk, b, l) - dG(b, kk, a, l);
            for (int mm = 0; mm < n; ++mm)
              v += gamma[idx][kk](a, mm) * gamma[idx][mm](b, l) -
                   gamma[idx][kk](b, mm) * gamma[idx][mm](a, l);
            r.at(a, b, l, kk) = v;
          }
    riem[idx] = std::move(r);
  });

  // Second covariant derivatives and Laplacians of operator fields.
  auto gmat = [&](size_t idx, int a) {
    Matrix ga(n, n);
    for (int kk = 0; kk < n; ++kk)
      for (int mm = 0; mm < n; ++mm) ga(kk, mm) = gamma[idx][kk](a, mm);
    return ga;
  };
  auto second = [&](const std::vector<TensorSlot3>& gradf, std::vector<Matrix>* lap,
                    std::vector<std::array<Matrix, 3>>* diag) {
    lap->assign(cnt, Matrix());
    if (diag) diag->assign(cnt, {});
    parallel_for(cnt, [&](std::int64_t idx) {
      int i, j, k;
      gr.unflat(idx, &i, &j, &k);
      Matrix acc = Matrix::Zero(n, n);
      std::array<Matrix, 3> dd;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          auto slice_b = [&, b](size_t q) { return gradf[q].slice_first(b); };
          Matrix m = fd1<Matrix>(gr, slice_b, a, i, j, k);
          const Matrix ga = gmat(idx, a);
          const Matrix ub = gradf[idx].slice_first(b);
          m += ga * ub - ub * ga;
          for (int mm = 0; mm < n; ++mm)
            m -= gamma[idx][mm](a, b) * gradf[idx].slice_first(mm);
          acc += ginv[idx](a, b) * m;
          if (diag && a == b) dd[a] = m;
        }
      }
      (*lap)[idx] = acc;
      if (diag) (*diag)[idx] = dd;
    });
  };
  second(grad_j, &lap_j, &d2j_diag);
  second(grad_a, &lap_a, nullptr);
  second(grad_s, &lap_s, nullptr);

  // Scalar Laplacians of H and rho.
  auto scalar_lap = [&](const std::vector<double>& f, std::vector<double>* out) {
    out->assign(cnt, 0.0);
    std::vector<Vector> df(cnt);
    auto f_field = [&](size_t q) { return f[q]; };
    parallel_for(cnt, [&](std::int64_t idx) {
      int i, j, k;
      gr.unflat(idx, &i, &j, &k);
      Vector d(n);
      for (int a = 0; a < n; ++a) d(a) = fd1<double>(gr, f_field, a, i, j, k);
      df[idx] = d;
    });
    parallel_for(cnt, [&](std::int64_t idx) {
      int i, j, k;
      gr.unflat(idx, &i, &j, &k);
      double acc = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double hess;
          if (a == b) hess = fd2<double>(gr, f_field, a, i, j, k);
          else {
            auto df_b = [&, b](size_t q) { return df[q](b); };
            hess = fd1<double>(gr, df_b, a, i, j, k);
          }
          double corr = 0.0;
          for (int c = 0; c < n; ++c) corr += gamma[idx][c](a, b) * df[idx](c);
          acc += ginv[idx](a, b) * (hess - corr);
        }
      (*out)[idx] = acc;
    });
  };
  scalar_lap(mean, &lap_mean);
  scalar_lap(rho, &lap_rho);

  level_ = 3;
}

void HypersurfaceState::adaptedness_fields() {
  if (level_ < 3) second_order_fields();
  if (!s_hat.empty()) return;
  const size_t cnt = count();
  s_hat.assign(cnt, Matrix());
  mu_val.assign(cnt, 0.0);
  s_hat_norm.assign(cnt, 0.0);
  parallel_for(cnt, [&](std::int64_t idx) {
    const MetricPoint mp(g[idx]);
    const Matrix ct = curvature_action_trace(riem[idx], shape[idx], mp);
    TensorSlot3 phi = r3[idx];
    phi -= r1[idx];
    const Matrix sh =
        obstruction_tensor(shape[idx], jac[idx], grad_a[idx], grad_j[idx], ct, phi, mp);
    s_hat[idx] = sh;
    s_hat_norm[idx] = std::sqrt(std::max(0.0, mp.norm2(sh)));
    mu_val[idx] = mu(sh, s_op[idx], mp);
  });
}

GaussCodazziReport gauss_codazzi_residual(const HypersurfaceState& st, int margin) {
  if (st.level() < 3)
    throw std::logic_error("gauss_codazzi_residual: need second-order fields");
  const int n = st.n();
  const AmbientModel& model = st.immersion().model();
  GaussCodazziReport rep;
  st.for_interior(margin, [&](size_t idx) {
    const Matrix& t = st.tangents[idx];
    const Vector& x = st.immersion().points()[idx];
    const Matrix gamb = model.metric(x);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          const Vector q = model.curvature(x, t.col(a), t.col(b), t.col(c));
          Vector comp(n);
          for (int d = 0; d < n; ++d) comp(d) = q.dot(gamb * t.col(d));
          Vector lhs = st.ginv[idx] * comp;
          for (int kk = 0; kk < n; ++kk) lhs(kk) -= st.riem[idx].at(a, b, c, kk);
          lhs -= st.h2[idx](a, c) * st.shape[idx].col(b);
          lhs += st.h2[idx](b, c) * st.shape[idx].col(a);
          rep.gauss = std::max(rep.gauss, lhs.cwiseAbs().maxCoeff());
        }
        for (int kk = 0; kk < n; ++kk) {
          const double v = st.r3[idx].at(a, b, kk) -
                           (st.grad_a[idx].at(a, b, kk) - st.grad_a[idx].at(b, a, kk));
          rep.codazzi = std::max(rep.codazzi, std::abs(v));
        }
      }
  });
  return rep;
}

SecondOrderReport second_order_identities(const HypersurfaceState& st, int margin) {
  if (st.level() < 3)
    throw std::logic_error("second_order_identities: need second-order fields");
  const int n = st.n();
  SecondOrderReport rep;
  st.for_interior(margin, [&](size_t idx) {
    const MetricPoint mp(st.g[idx]);
    const Matrix& a = st.shape[idx];
    const Matrix& j = st.jac[idx];
    const Matrix& h = st.h2[idx];
    const Matrix a2 = a * a;
    TensorSlot3 phi = st.r3[idx];
    phi -= st.r1[idx];

    // (3.8)
    for (int ax = 0; ax < n; ++ax) {
      const Matrix lhs = st.grad_j[idx].slice_first(ax);
      const Matrix rhs = phi.eval_slot2(a.col(ax));
      rep.transport = std::max(rep.transport, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    // (3.10), one residual per coordinate direction
    for (int ax = 0; ax < n; ++ax) {
      const Vector u = a.col(ax);
      Matrix rhs = (j * a).col(ax) * h.row(ax);          // h(X,.) J(AX)
      rhs -= 2.0 * (h.row(ax) * a.col(ax)).value() * j;  // -2 h(X,AX) J
      Vector w(n);
      for (int kk = 0; kk < n; ++kk) w(kk) = st.grad_a[idx].at(ax, ax, kk);
      rhs += phi.eval_slot2(w);
      Matrix curv(n, n);
      for (int y = 0; y < n; ++y) {
        Vector col = Vector::Zero(n);
        for (int b = 0; b < n; ++b) col += u(b) * (st.riem[idx].apply(y, b) * u);
        curv.col(y) = 2.0 * col;
      }
      rhs += curv;
      rhs -= 2.0 * (u.dot(h * u)) * a;                      // -2 h(AX,AX) A
      rhs += 2.0 * (a2.col(ax)) * (h * u).transpose();      // +2 h(.,AX) A^2 X
      rhs += u * (st.g[idx] * (j * u)).transpose();         // g(J(AX), .) AX
      const Matrix lhs = st.d2j_diag[idx][ax];
      rep.second_deriv = std::max(rep.second_deriv, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    // (3.11)
    {
      const double tr_a2 = a2.trace();
      const double tr_a3 = (a2 * a).trace();
      Matrix rhs = j * a2 + a2 * j - 2.0 * tr_a2 * j;
      rhs += phi.eval_slot2(st.trace_grad_a[idx]);
      rhs += 2.0 * curvature_jacobi_trace(st.riem[idx], a, mp);
      rhs += 2.0 * a2 * a2 - 2.0 * tr_a3 * a;
      rep.traced_laplace =
          std::max(rep.traced_laplace, (st.lap_j[idx] - rhs).cwiseAbs().maxCoeff());
    }

    // Lemma 3.2
    rep.gradient_trace =
        std::max(rep.gradient_trace,
                 (st.grad_mean[idx] - st.trace_grad_a[idx]).cwiseAbs().maxCoeff());
  });
  return rep;
}

AdaptednessReport adaptedness_report(HypersurfaceState& st, int margin) {
  st.adaptedness_fields();
  AdaptednessReport rep;
  size_t cnt = 0;
  double sum_rho = 0.0, sum_sh = 0.0;
  st.for_interior(margin, [&](size_t idx) {
    ++cnt;
    sum_rho += st.rho[idx];
    sum_sh += st.s_hat_norm[idx];
    rep.max_rho = std::max(rep.max_rho, st.rho[idx]);
    rep.max_s_hat = std::max(rep.max_s_hat, st.s_hat_norm[idx]);
    rep.sup_mu = std::max(rep.sup_mu, st.mu_val[idx]);
    const MetricPoint mp(st.g[idx]);
    const Matrix defect = mp.adjoint(st.s_hat[idx]) + st.s_hat[idx];
    rep.max_skew_defect = std::max(rep.max_skew_defect, defect.cwiseAbs().maxCoeff());
  });
  if (cnt > 0) {
    rep.mean_rho = sum_rho / static_cast<double>(cnt);
    rep.mean_s_hat = sum_sh / static_cast<double>(cnt);
  }
  return rep;
}

}  // namespace curvflow
