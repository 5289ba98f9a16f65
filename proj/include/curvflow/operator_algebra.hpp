#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace curvflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Inner-product data of a single tangent space, held in a working frame that
// is not assumed orthonormal.  Adjoints and traces always go through g.
class MetricPoint {
public:
  // g must be symmetric positive definite; throws std::invalid_argument otherwise.
  explicit MetricPoint(Matrix g);

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix& g() const { return g_; }
  const Matrix& g_inv() const { return ginv_; }

  // Columns form a g-orthonormal frame (inverse transpose of the Cholesky factor).
  const Matrix& orthonormal_frame() const { return frame_; }

  // Adjoint of an operator with respect to g.
  Matrix adjoint(const Matrix& op) const { return ginv_ * op.transpose() * g_; }

  bool is_symmetric(const Matrix& op, double tol) const;
  bool is_skew(const Matrix& op, double tol) const;

  // <a, b> = Tr(a* b), adjoint taken in g.
  double inner(const Matrix& a, const Matrix& b) const;
  double norm2(const Matrix& op) const { return inner(op, op); }

  double vec_inner(const Vector& x, const Vector& y) const { return x.dot(g_ * y); }
  double vec_norm(const Vector& x) const;

private:
  Matrix g_, ginv_, frame_;
};

// Trilinear slot tensor (X, Y) -> vector, stored densely.
// entry(i, j, k) is the k-th component of T(d_i, d_j) in the working frame.
// Houses covariant derivatives of operators and the normal-curvature slot data.
class TensorSlot3 {
public:
  TensorSlot3() : n_(0) {}
  explicit TensorSlot3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double& at(int i, int j, int k) { return v_[idx(i, j, k)]; }
  double at(int i, int j, int k) const { return v_[idx(i, j, k)]; }

  // Operator Y -> T(d_i, Y).
  Matrix slice_first(int i) const;
  // Operator X -> T(X, w).
  Matrix eval_slot2(const Vector& w) const;
  // Sum of T(e, e) over a g-orthonormal frame; a vector.
  Vector trace_12(const MetricPoint& m) const;

  TensorSlot3& operator+=(const TensorSlot3& o);
  TensorSlot3& operator-=(const TensorSlot3& o);

  // Largest |entry|; used for tolerances and reports.
  double max_abs() const;

private:
  size_t idx(int i, int j, int k) const {
    return (static_cast<size_t>(i) * n_ + j) * n_ + k;
  }
  int n_;
  std::vector<double> v_;
};

// Rank-4 curvature storage: entry(i, j, l, k) is the k-th component of
// R(d_i, d_j) d_l.
class Tensor4 {
public:
  Tensor4() : n_(0) {}
  explicit Tensor4(int n) : n_(n), v_(static_cast<size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }
  double& at(int i, int j, int l, int k) { return v_[idx(i, j, l, k)]; }
  double at(int i, int j, int l, int k) const { return v_[idx(i, j, l, k)]; }

  // The endomorphism Z -> R(d_i, d_j) Z.
  Matrix apply(int i, int j) const;

private:
  size_t idx(int i, int j, int l, int k) const {
    return ((static_cast<size_t>(i) * n_ + j) * n_ + l) * n_ + k;
  }
  int n_;
  std::vector<double> v_;
};

// ab - ba.  Throws std::invalid_argument on dimension mismatch.
Matrix commutator(const Matrix& a, const Matrix& b);

// Gap function of a commutator s of two g-symmetric operators:
// rho = -Tr(s^2) = ||s||^2 >= 0.  Clamped at zero against round-off.
double gap(const Matrix& s, const MetricPoint& m);

// Trace of the curvature action on an operator:  X -> sum_e [R(X,e), a](e)
// over a g-orthonormal frame e.
Matrix curvature_action_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m);

// Jacobi-type curvature trace:  X -> sum_e R(X, a e)(a e).
Matrix curvature_jacobi_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m);

// Mixed curvature trace:  X -> sum_e R(X, e)(a e).
Matrix curvature_mixed_trace(const Tensor4& r, const Matrix& a, const MetricPoint& m);

// Plain Ricci-type trace:  X -> sum_e R(X, e) e.
Matrix curvature_ricci_trace(const Tensor4& r, const MetricPoint& m);

// Obstruction tensor assembled from pointwise data:
//   2 [a^2 + j, curv_trace]
// + 2 [a, (r3 - r1)( . , Tr(grad_a))]
// + 2 sum_e [grad_a(e), grad_j(e)]
// curv_trace must be curvature_action_trace(R, a, m) of the intrinsic curvature.
// Throws std::invalid_argument when a or j is not g-symmetric.
Matrix obstruction_tensor(const Matrix& a, const Matrix& j,
                          const TensorSlot3& grad_a, const TensorSlot3& grad_j,
                          const Matrix& curv_trace, const TensorSlot3& r3_minus_r1,
                          const MetricPoint& m);

// Normalised pairing -<s_hat, s>/||s||^2, zero below the degeneracy threshold
// ||s||^2 < 1e-18 * n.
double mu(const Matrix& s_hat, const Matrix& s, const MetricPoint& m);

// Reaction term of the commutator evolution:
//   P(s) = s_hat - (tr_a2 + tr_j) s - h [a, s] - 2 h [a^2, j]
//          + s a^2 - 2 a^2 s + 2 s j - [a, j^2].
// Preconditions: s = [a, j] within tolerance (throws otherwise), tr_a2 = Tr(a^2),
// tr_j = Tr(j), scal = ambient scalar curvature (enters only through terms that
// cancel; kept so both assembly routes share one signature).
Matrix reaction_term(const Matrix& a, const Matrix& j, const Matrix& s,
                     const Matrix& s_hat, double h, double tr_a2, double tr_j,
                     double scal, const MetricPoint& m);

// Same quantity assembled as the (-1)-multiple of the evolution right-hand
// side, term by term in the order the evolution display lists them.  Kept as
// an independent code path for consistency checks.
Matrix reaction_term_reference(const Matrix& a, const Matrix& j, const Matrix& s,
                               const Matrix& s_hat, double h, double tr_a2,
                               double tr_j, double scal, const MetricPoint& m);

// Left-hand sides and bounds of the pointwise trace estimates feeding the
// C1 constant.  A violated bound is reported, not thrown.
struct TraceEstimates {
  double rho = 0.0;
  // values, keyed by display tag
  double v15 = 0.0, v16 = 0.0, v17 = 0.0, v18 = 0.0, v19 = 0.0, v20 = 0.0;
  // bounds for the inequality rows (v16 is an exact identity)
  double b15 = 0.0, b17 = 0.0, b18 = 0.0, b19 = 0.0, b20 = 0.0;
  bool all_ok = true;
  std::vector<std::string> violations;  // display tags, e.g. "(4.17)"
};

TraceEstimates trace_estimates(const Matrix& a, const Matrix& j, const Matrix& s,
                               double h, double r_norm, const MetricPoint& m);

struct BoundInputs {
  int n = 0;
  double c_a = 0.0;    // max of ||A|| over the horizon
  double r_norm = 0.0; // ambient curvature norm
  double sup_mu = 0.0; // sup of mu over the horizon
};

// 4(2n+1) c_a^2 + 10 n r_norm + 2 sup_mu.
// Throws std::invalid_argument on negative c_a or r_norm.
double c1_constant(const BoundInputs& b);

}  // namespace curvflow
