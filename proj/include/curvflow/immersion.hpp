#pragma once

#include "curvflow/ambient.hpp"
#include "curvflow/operator_algebra.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

namespace curvflow {

// Rectangular parameter lattice; unused trailing axes have size 1.
struct GridSpec {
  int n = 2;
  std::array<int, 3> size{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<bool, 3> periodic{false, false, false};

  size_t count() const {
    return static_cast<size_t>(size[0]) * size[1] * size[2];
  }
  size_t flat(int i, int j, int k) const {
    return (static_cast<size_t>(i) * size[1] + j) * size[2] + k;
  }
  void unflat(size_t f, int* i, int* j, int* k) const {
    *k = static_cast<int>(f % size[2]);
    *j = static_cast<int>((f / size[2]) % size[1]);
    *i = static_cast<int>(f / (static_cast<size_t>(size[1]) * size[2]));
  }
  // Index shifted along axis by delta; false when it falls off a
  // non-periodic edge.
  bool shift(int axis, int delta, int i, int j, int k, size_t* out) const;
  // Distance to the nearest non-periodic edge (large when all axes wrap).
  int margin_distance(int i, int j, int k) const;
};

class ParametrizedImmersion {
public:
  ParametrizedImmersion(AmbientModel model, GridSpec grid, std::vector<Vector> points,
                        double orientation = 1.0, double degeneracy_eps = 1e-12);

  const AmbientModel& model() const { return model_; }
  const GridSpec& grid() const { return grid_; }
  const std::vector<Vector>& points() const { return pts_; }
  std::vector<Vector>& mutable_points() { return pts_; }
  double orientation() const { return orient_; }
  double degeneracy_eps() const { return eps_; }

private:
  AmbientModel model_;
  GridSpec grid_;
  std::vector<Vector> pts_;
  double orient_;
  double eps_;
};

// Tabulated grid file: one point per line, "i j [k] x_1 ... x_dim",
// whitespace separated, '#' comments.  Sizes are inferred from the indices.
ParametrizedImmersion load_immersion_grid(std::istream& in, const AmbientModel& model,
                                          const std::array<double, 3>& spacing,
                                          const std::array<bool, 3>& periodic,
                                          double orientation = 1.0);

// All pointwise geometric data of an immersion on its grid.  Fields are
// filled in stages; level records how far construction has run:
//   1: first/second fundamental data and normal-curvature slots
//   2: intrinsic Christoffel symbols and first covariant derivatives
//   3: intrinsic curvature, second covariant derivatives, Laplacians
// plus the adaptedness fields (s, rho, s_hat, mu).
class HypersurfaceState {
public:
  static std::shared_ptr<HypersurfaceState> fundamental_forms(
      std::shared_ptr<const ParametrizedImmersion> im);

  void covariant_derivatives();  // level 2
  void second_order_fields();    // level 3
  void adaptedness_fields();     // s_hat and mu (requires level 3)

  int level() const { return level_; }
  const ParametrizedImmersion& immersion() const { return *im_; }
  const GridSpec& grid() const { return im_->grid(); }
  size_t count() const { return grid().count(); }
  int n() const { return grid().n; }

  MetricPoint metric_point(size_t idx) const { return MetricPoint(g[idx]); }

  // level 1
  std::vector<Matrix> tangents;  // dim x n, columns are coordinate tangents
  std::vector<Matrix> g, ginv;   // n x n
  std::vector<Vector> xi;        // unit normal, chart components
  std::vector<Matrix> h2;        // second fundamental form for -xi
  std::vector<Matrix> shape;     // A = ginv h2
  std::vector<double> mean;      // H = Tr A
  std::vector<Matrix> jac;       // normal Jacobi operator
  std::vector<TensorSlot3> r1, r3;
  std::vector<Matrix> s_op;      // [A, J]
  std::vector<double> rho;

  // level 2
  std::vector<std::vector<Matrix>> gamma;  // gamma[idx][k](i,j)
  std::vector<TensorSlot3> grad_a, grad_j, grad_s;
  std::vector<Vector> trace_grad_a;  // Tr (grad A), a vector field
  std::vector<Vector> grad_mean;     // grad H (index raised)

  // level 3
  std::vector<Tensor4> riem;
  std::vector<Matrix> lap_a, lap_j, lap_s;
  std::vector<std::array<Matrix, 3>> d2j_diag;  // second covariant derivative of J along each axis
  std::vector<double> lap_mean, lap_rho;

  // adaptedness
  std::vector<Matrix> s_hat;
  std::vector<double> mu_val, s_hat_norm;

  // Interior points for residual maxima: margin away from non-periodic edges.
  template <class F>
  void for_interior(int margin, F&& f) const {
    const GridSpec& gr = grid();
    for (size_t idx = 0; idx < count(); ++idx) {
      int i, j, k;
      gr.unflat(idx, &i, &j, &k);
      if (gr.margin_distance(i, j, k) >= margin) f(idx);
    }
  }

private:
  HypersurfaceState() = default;
  std::shared_ptr<const ParametrizedImmersion> im_;
  int level_ = 0;
};

struct GaussCodazziReport {
  double gauss = 0.0;    // (2.2)
  double codazzi = 0.0;  // (3.2)
};
GaussCodazziReport gauss_codazzi_residual(const HypersurfaceState& st, int margin = 3);

struct SecondOrderReport {
  double transport = 0.0;        // (3.8)
  double second_deriv = 0.0;     // (3.10)
  double traced_laplace = 0.0;   // (3.11)
  double gradient_trace = 0.0;   // Lemma 3.2
};
SecondOrderReport second_order_identities(const HypersurfaceState& st, int margin = 3);

struct AdaptednessReport {
  double max_rho = 0.0, mean_rho = 0.0;
  double max_s_hat = 0.0, mean_s_hat = 0.0;
  double sup_mu = 0.0;
  double max_skew_defect = 0.0;  // reported, not asserted
};
AdaptednessReport adaptedness_report(HypersurfaceState& st, int margin = 3);

}  // namespace curvflow
