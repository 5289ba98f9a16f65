#pragma once

#include "curvflow/operator_algebra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace curvflow {

enum class AmbientKind {
  Euclidean,
  Sphere,
  Hyperbolic,
  ComplexProjective,
  ComplexHyperbolic,
};

std::string to_string(AmbientKind k);

// Thrown when a geodesic leaves the chart domain; carries the exit parameter.
class chart_exit_error : public std::runtime_error {
public:
  chart_exit_error(double t_exit, const std::string& what)
      : std::runtime_error(what), t_exit_(t_exit) {}
  double t_exit() const { return t_exit_; }

private:
  double t_exit_;
};

// Integrated geodesic with parallel-transported frames at every node.
// frame[i] maps initial-point coordinates to parallel-transported vectors at
// node i (frame[0] is the identity).
struct GeodesicSegment {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> v;
  std::vector<Matrix> frame;

  double max_speed_drift = 0.0;  // |  ||v||_g - ||v(0)||_g  | over nodes
  double max_frame_drift = 0.0;  // worst Gram-matrix deviation over nodes

  size_t steps() const { return t.size(); }
  // Parallel transport of an initial-point vector to node i.
  Vector transport(const Vector& w, size_t i) const { return frame[i] * w; }
};

// cos(t sqrt(nu)) continued through nu <= 0 (cosh branch).
double jacobi_cos(double nu, double t);
// sin(t sqrt(nu))/sqrt(nu) continued through nu <= 0 (sinh / linear branches).
double jacobi_sinc(double nu, double t);
// Scalar Jacobi coefficient jacobi_cos(nu,t) - lambda * jacobi_sinc(nu,t).
double jacobi_closed_form(double lambda, double nu, double t);

// Locally symmetric model space in a global-minus-measure-zero chart with
// closed-form metric, Christoffel symbols and curvature.
class AmbientModel {
public:
  static AmbientModel euclidean(int dim);
  static AmbientModel sphere(int dim, double c);
  static AmbientModel hyperbolic(int dim, double c);
  static AmbientModel complex_projective(int complex_dim, double c);
  static AmbientModel complex_hyperbolic(int complex_dim, double c);

  AmbientKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int complex_dim() const { return cdim_; }
  double curvature_param() const { return c_; }
  double scal() const { return scal_; }
  // Cached bound on ||R(v1,v2)v3|| over unit triples.
  double r_norm() const { return r_norm_; }

  bool in_domain(const Vector& p) const;

  Matrix metric(const Vector& p) const;
  // gamma[k](i, j) = Gamma^k_ij.
  std::vector<Matrix> christoffel(const Vector& p) const;
  // dg[k](i, j) = d g_ij / d x_k.
  std::vector<Matrix> metric_deriv(const Vector& p) const;

  // R(x, y) z at p, sign fixed so the unit sphere has R(x, xi) xi = x for
  // orthonormal x, xi.
  Vector curvature(const Vector& p, const Vector& x, const Vector& y,
                   const Vector& z) const;

  // Gamma(a, b)^k = Gamma^k_ij a^i b^j, with gamma = christoffel(p).
  static Vector christoffel_apply(const std::vector<Matrix>& gamma,
                                  const Vector& a, const Vector& b);

  // Complex structure in chart coordinates (complex space forms only).
  Matrix complex_structure() const;

  struct NormalJacobiData {
    Matrix basis;   // dim x (dim-1); columns = g-orthonormal basis of xi-perp
    Matrix op;      // normal Jacobi operator in that basis
    TensorSlot3 r1; // tangential part of R(xi, X) Y
    TensorSlot3 r3; // R(X, Y) xi
  };
  // Requires ||xi||_g = 1 within 1e-10; throws std::invalid_argument otherwise.
  NormalJacobiData normal_jacobi(const Vector& p, const Vector& xi) const;

  struct SymmetryResiduals {
    double nabla_r = 0.0;           // max |(nabla R) components| by central FD
    double einstein_ambient = 0.0;  // ||Ric - (scal/dim) id||
    double einstein_hyplike = 0.0;  // same with dim-1 in place of dim
  };
  SymmetryResiduals local_symmetry_check(const Vector& p, double h) const;

  // RK4 geodesic from p with initial velocity v, plus parallel transport.
  // Throws chart_exit_error if the geodesic leaves the chart before t_max.
  GeodesicSegment geodesic(const Vector& p, const Vector& v, double t_max,
                           double dt) const;

  // Descriptor in run-config key = value form.
  std::string config_string() const;

private:
  AmbientModel(AmbientKind kind, int dim, int cdim, double c);
  double compute_r_norm() const;

  AmbientKind kind_;
  int dim_;
  int cdim_;
  double c_;
  double scal_;
  double r_norm_;
};

}  // namespace curvflow
