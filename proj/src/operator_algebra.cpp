#include "curvflow/operator_algebra.hpp"

#include <cmath>

namespace curvflow {

namespace {
double frob(const Matrix& m) { return m.norm(); }
}  // namespace

MetricPoint::MetricPoint(Matrix g) : g_(std::move(g)) {
  if (g_.rows() != g_.cols() || g_.rows() < 1)
    throw std::invalid_argument("MetricPoint: g must be square");
  const double scale = std::max(1.0, frob(g_));
  if ((g_ - g_.transpose()).norm() > 1e-12 * scale)
    throw std::invalid_argument("MetricPoint: g must be symmetric");
  g_ = 0.5 * (g_ + g_.transpose());
  Eigen::LLT<Matrix> llt(g_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("MetricPoint: g must be positive definite");
  Matrix l = llt.matrixL();
  ginv_ = llt.solve(Matrix::Identity(g_.rows(), g_.cols()));
  // e_i = columns of L^{-T}: e_i^T g e_j = delta_ij.
  frame_ = l.transpose()
               .triangularView<Eigen::Upper>()
               .solve(Matrix::Identity(g_.rows(), g_.cols()));
}

bool MetricPoint::is_symmetric(const Matrix& op, double tol) const {
  const double scale = std::max(1.0, frob(op));
  return (adjoint(op) - op).norm() <= tol * scale;
}

bool MetricPoint::is_skew(const Matrix& op, double tol) const {
  const double scale = std::max(1.0, frob(op));
  return (adjoint(op) + op).norm() <= tol * scale;
}

double MetricPoint::inner(const Matrix& a, const Matrix& b) const {
  return (adjoint(a) * b).trace();
}

double MetricPoint::vec_norm(const Vector& x) const {
  return std::sqrt(std::max(0.0, vec_inner(x, x)));
}

Matrix TensorSlot3::slice_first(int i) const {
  Matrix out(n_, n_);
  for (int k = 0; k < n_; ++k)
    for (int j = 0; j < n_; ++j) out(k, j) = at(i, j, k);
  return out;
}

Matrix TensorSlot3::eval_slot2(const Vector& w) const {
  Matrix out = Matrix::Zero(n_, n_);
  for (int x = 0; x < n_; ++x)
    for (int j = 0; j < n_; ++j) {
      const double wj = w(j);
      if (wj == 0.0) continue;
      for (int k = 0; k < n_; ++k) out(k, x) += at(x, j, k) * wj;
    }
  return out;
}

Vector TensorSlot3::trace_12(const MetricPoint& m) const {
  // sum_i T(e_i, e_i) over the Cholesky orthonormal frame.
  const Matrix& f = m.orthonormal_frame();
  Vector out = Vector::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    for (int a = 0; a < n_; ++a) {
      const double fa = f(a, i);
      if (fa == 0.0) continue;
      for (int b = 0; b < n_; ++b) {
        const double w = fa * f(b, i);
        for (int k = 0; k < n_; ++k) out(k) += w * at(a, b, k);
      }
    }
  }
  return out;
}

TensorSlot3& TensorSlot3::operator+=(const TensorSlot3& o) {
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

TensorSlot3& TensorSlot3::operator-=(const TensorSlot3& o) {
  for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

double TensorSlot3::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

Matrix Tensor4::apply(int i, int j) const {
  Matrix out(n_, n_);
  for (int l = 0; l < n_; ++l)
    for (int k = 0; k < n_; ++k) out(k, l) = at(i, j, l, k);
  return out;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: dimension mismatch");
  return a * b - b * a;
}

double gap(const Matrix& s, const MetricPoint& m) {
  if (s.rows() != m.dim() || s.cols() != m.dim())
    throw std::invalid_argument("gap: dimension mismatch");
  const double rho = -(s * s).trace();
  return rho <= 0.0 ? 0.0 : rho;
}

Matrix curvature_action_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m) {
  const int n = m.dim();
  const Matrix& f = m.orthonormal_frame();
  Matrix out = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    Vector col = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      Matrix rx = Matrix::Zero(n, n);
      for (int b = 0; b < n; ++b) {
        const double fb = f(b, i);
        if (fb != 0.0) rx += fb * r.apply(x, b);
      }
      col += (rx * a - a * rx) * f.col(i);
    }
    out.col(x) = col;
  }
  return out;
}

Matrix curvature_jacobi_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m) {
  const int n = m.dim();
  // sum_i R(X, a e_i)(a e_i) = sum_bc W_bc R(X, d_b) d_c with W = a g^{-1} a^T.
  const Matrix w = a * m.g_inv() * a.transpose();
  Matrix out = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    Vector col = Vector::Zero(n);
    for (int b = 0; b < n; ++b) col += r.apply(x, b) * w.row(b).transpose();
    out.col(x) = col;
  }
  return out;
}

Matrix curvature_mixed_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m) {
  const int n = m.dim();
  // sum_i R(X, e_i)(a e_i) = sum_bc g^{bc} R(X, d_b)(a d_c).
  const Matrix w = a * m.g_inv();
  Matrix out = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    Vector col = Vector::Zero(n);
    for (int b = 0; b < n; ++b) col += r.apply(x, b) * w.col(b);
    out.col(x) = col;
  }
  return out;
}

Matrix curvature_ricci_trace(const Tensor4& r, const MetricPoint& m) {
  const int n = m.dim();
  const Matrix& gi = m.g_inv();
  Matrix out = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    Vector col = Vector::Zero(n);
    for (int b = 0; b < n; ++b) col += r.apply(x, b) * gi.col(b);
    out.col(x) = col;
  }
  return out;
}

Matrix obstruction_tensor(const Matrix& a, const Matrix& j,
                          const TensorSlot3& grad_a, const TensorSlot3& grad_j,
                          const Matrix& curv_trace, const TensorSlot3& r3_minus_r1,
                          const MetricPoint& m) {
  if (!m.is_symmetric(a, 1e-8) || !m.is_symmetric(j, 1e-8))
    throw std::invalid_argument("obstruction_tensor: a and j must be g-symmetric");
  const int n = m.dim();
  const Matrix& f = m.orthonormal_frame();

  Matrix out = 2.0 * commutator(a * a + j, curv_trace);

  const Vector w = grad_a.trace_12(m);
  out += 2.0 * commutator(a, r3_minus_r1.eval_slot2(w));

  for (int i = 0; i < n; ++i) {
    Matrix da = Matrix::Zero(n, n), dj = Matrix::Zero(n, n);
    for (int d = 0; d < n; ++d) {
      const double fd = f(d, i);
      if (fd == 0.0) continue;
      da += fd * grad_a.slice_first(d);
      dj += fd * grad_j.slice_first(d);
    }
    out += 2.0 * commutator(da, dj);
  }
  return out;
}

double mu(const Matrix& s_hat, const Matrix& s, const MetricPoint& m) {
  const double s2 = m.norm2(s);
  if (s2 < 1e-18 * m.dim()) return 0.0;
  return -m.inner(s_hat, s) / s2;
}

Matrix reaction_term(const Matrix& a, const Matrix& j, const Matrix& s,
                     const Matrix& s_hat, double h, double tr_a2, double tr_j,
                     double scal, const MetricPoint& m) {
  (void)scal;  // enters the display only through terms that cancel
  const double scale = std::max({1.0, frob(a), frob(j)});
  if ((s - commutator(a, j)).norm() > 1e-8 * scale * scale * std::sqrt(m.dim()))
    throw std::invalid_argument("reaction_term: s must equal [a, j]");
  const Matrix a2 = a * a;
  Matrix p = s_hat;
  p -= (tr_a2 + tr_j) * s;
  p -= h * commutator(a, s);
  p -= 2.0 * h * commutator(a2, j);
  p += s * a2;
  p -= 2.0 * (a2 * s);
  p += 2.0 * (s * j);
  p -= commutator(a, j * j);
  return p;
}

Matrix reaction_term_reference(const Matrix& a, const Matrix& j, const Matrix& s,
                               const Matrix& s_hat, double h, double tr_a2,
                               double tr_j, double scal, const MetricPoint& m) {
  // Minus the right-hand side of the commutator evolution, assembled in
  // display order.  The two scalar-curvature multiples cancel; both are kept
  // so the route mirrors the display.
  const double nn = m.dim() + 1;  // ambient dimension (Einstein constant)
  const Matrix a2 = a * a;
  const Matrix j2 = j * j;
  Matrix rhs = (tr_a2 + tr_j - 2.0 * scal / nn) * s;
  rhs += h * (a * s - s * a);
  rhs += 2.0 * h * (a2 * j - j * a2);
  rhs -= s * a2;
  rhs += 2.0 * a2 * s;
  rhs -= 2.0 * s * j;
  rhs += a * j2 - j2 * a;
  rhs += (2.0 * scal / nn) * s;
  rhs -= s_hat;
  return -rhs;
}

TraceEstimates trace_estimates(const Matrix& a, const Matrix& j, const Matrix& s,
                               double h, double r_norm, const MetricPoint& m) {
  const int n = m.dim();
  TraceEstimates out;
  out.rho = gap(s, m);
  const double a_norm2 = m.norm2(a);
  const Matrix a2 = a * a;
  const Matrix j2 = j * j;

  const double tol = 1e-9 * std::max(1.0, out.rho) *
                     std::max(1.0, a_norm2 + n * std::abs(r_norm));

  out.v15 = (a2.trace() + j.trace()) * out.rho;
  out.b15 = (a_norm2 + n * r_norm) * out.rho;

  out.v16 = (commutator(a, s) * s).trace();

  out.v17 = -2.0 * h * (commutator(a2, j) * s).trace();
  out.b17 = 4.0 * n * a_norm2 * out.rho;

  out.v18 = -(a2 * s * s).trace();
  out.b18 = a_norm2 * out.rho;

  out.v19 = (j * s * s).trace();
  out.b19 = n * r_norm * out.rho;

  out.v20 = -(commutator(a, j2) * s).trace();
  out.b20 = 2.0 * n * r_norm * out.rho;

  auto check = [&](double v, double b, const char* tag) {
    if (v > b + tol) {
      out.all_ok = false;
      out.violations.emplace_back(tag);
    }
  };
  check(out.v15, out.b15, "(4.15)");
  if (std::abs(out.v16) > tol) {
    out.all_ok = false;
    out.violations.emplace_back("(4.16)");
  }
  check(out.v17, out.b17, "(4.17)");
  check(out.v18, out.b18, "(4.18)");
  check(out.v19, out.b19, "(4.19)");
  check(out.v20, out.b20, "(4.20)");
  return out;
}

double c1_constant(const BoundInputs& b) {
  if (b.c_a < 0.0 || b.r_norm < 0.0)
    throw std::invalid_argument("c1_constant: c_a and r_norm must be non-negative");
  return 4.0 * (2.0 * b.n + 1.0) * b.c_a * b.c_a + 10.0 * b.n * b.r_norm +
         2.0 * b.sup_mu;
}

}  // namespace curvflow
