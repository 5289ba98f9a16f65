#include "curvflow/ambient.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

namespace curvflow {

namespace {

using Complexd = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;

// Conformal chart data for real space forms: g = exp(2u) * delta.
struct ConformalChart {
  double u;
  Vector du;   // du_i
  Matrix d2u;  // d2u_ij (unused unless second derivatives are needed)
};

ConformalChart conformal_sphere(const Vector& p, double a) {
  // lambda = 2a / (1 + |p|^2)
  const double w = 1.0 + p.squaredNorm();
  ConformalChart c;
  c.u = std::log(2.0 * a) - std::log(w);
  c.du = -2.0 * p / w;
  c.d2u = Matrix::Identity(p.size(), p.size()) * (-2.0 / w) +
          4.0 * p * p.transpose() / (w * w);
  return c;
}

ConformalChart conformal_hyperbolic(const Vector& p, double a) {
  // lambda = 2a / (1 - |p|^2), |p| < 1
  const double w = 1.0 - p.squaredNorm();
  ConformalChart c;
  c.u = std::log(2.0 * a) - std::log(w);
  c.du = 2.0 * p / w;
  c.d2u = Matrix::Identity(p.size(), p.size()) * (2.0 / w) +
          4.0 * p * p.transpose() / (w * w);
  return c;
}

// Hermitian metric of a complex space form in affine coordinates, with
// holomorphic and antiholomorphic first derivatives.
struct HermitianChart {
  MatrixXc h;
  std::vector<MatrixXc> dh_z;     // d h / d z_c
  std::vector<MatrixXc> dh_zbar;  // d h / d zbar_c
};

HermitianChart hermitian_chart(const Vector& p, int m, double c, bool projective) {
  Eigen::VectorXcd z(m);
  for (int a = 0; a < m; ++a) z(a) = Complexd(p(2 * a), p(2 * a + 1));
  const double s = 4.0 / std::abs(c);
  const double sgn = projective ? 1.0 : -1.0;  // w = 1 + sgn |z|^2
  const double w = 1.0 + sgn * z.squaredNorm();
  const double w2 = w * w, w3 = w2 * w;

  HermitianChart out;
  out.h = MatrixXc::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Complexd v = (a == b ? Complexd(1.0 / w) : Complexd(0.0));
      v -= sgn * std::conj(z(a)) * z(b) / w2;
      out.h(a, b) = s * v;
    }
  out.dh_z.assign(m, MatrixXc::Zero(m, m));
  out.dh_zbar.assign(m, MatrixXc::Zero(m, m));
  for (int cc = 0; cc < m; ++cc) {
    const Complexd zc = z(cc), zcb = std::conj(z(cc));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        // dw/dz_c = sgn * conj(z_c), dw/dzbar_c = sgn * z_c
        Complexd dz{0.0, 0.0}, dzb{0.0, 0.0};
        if (a == b) {
          dz -= sgn * zcb / w2;
          dzb -= sgn * zc / w2;
        }
        if (b == cc) dz -= sgn * std::conj(z(a)) / w2;
        if (a == cc) dzb -= sgn * z(b) / w2;
        dz += 2.0 * std::conj(z(a)) * z(b) * zcb / w3;
        dzb += 2.0 * std::conj(z(a)) * z(b) * zc / w3;
        out.dh_z[cc](a, b) = s * dz;
        out.dh_zbar[cc](a, b) = s * dzb;
      }
  }
  return out;
}

// Real symmetric metric block from a Hermitian matrix.
Matrix hermitian_to_real(const MatrixXc& h) {
  const int m = static_cast<int>(h.rows());
  Matrix g(2 * m, 2 * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double re = h(a, b).real(), im = h(a, b).imag();
      g(2 * a, 2 * b) = re;
      g(2 * a, 2 * b + 1) = im;
      g(2 * a + 1, 2 * b) = -im;
      g(2 * a + 1, 2 * b + 1) = re;
    }
  return 0.5 * (g + g.transpose());
}

}  // namespace

std::string to_string(AmbientKind k) {
  switch (k) {
    case AmbientKind::Euclidean: return "euclidean";
    case AmbientKind::Sphere: return "sphere";
    case AmbientKind::Hyperbolic: return "hyperbolic";
    case AmbientKind::ComplexProjective: return "cp";
    case AmbientKind::ComplexHyperbolic: return "ch";
  }
  return "?";
}

double jacobi_cos(double nu, double t) {
  const double q = nu * t * t;
  if (std::abs(q) < 1e-8) return 1.0 - q / 2.0 + q * q / 24.0;
  if (nu > 0.0) return std::cos(t * std::sqrt(nu));
  return std::cosh(t * std::sqrt(-nu));
}

double jacobi_sinc(double nu, double t) {
  const double q = nu * t * t;
  if (std::abs(q) < 1e-8) return t * (1.0 - q / 6.0 + q * q / 120.0);
  if (nu > 0.0) {
    const double s = std::sqrt(nu);
    return std::sin(t * s) / s;
  }
  const double s = std::sqrt(-nu);
  return std::sinh(t * s) / s;
}

double jacobi_closed_form(double lambda, double nu, double t) {
  return jacobi_cos(nu, t) - lambda * jacobi_sinc(nu, t);
}

AmbientModel::AmbientModel(AmbientKind kind, int dim, int cdim, double c)
    : kind_(kind), dim_(dim), cdim_(cdim), c_(c) {
  switch (kind_) {
    case AmbientKind::Euclidean: scal_ = 0.0; break;
    case AmbientKind::Sphere:
    case AmbientKind::Hyperbolic: scal_ = dim_ * (dim_ - 1) * c_; break;
    case AmbientKind::ComplexProjective:
    case AmbientKind::ComplexHyperbolic: scal_ = cdim_ * (cdim_ + 1) * c_; break;
  }
  r_norm_ = compute_r_norm();
}

AmbientModel AmbientModel::euclidean(int dim) {
  if (dim < 2) throw std::invalid_argument("euclidean: dim >= 2 required");
  return AmbientModel(AmbientKind::Euclidean, dim, 0, 0.0);
}

AmbientModel AmbientModel::sphere(int dim, double c) {
  if (dim < 2 || c <= 0.0) throw std::invalid_argument("sphere: need dim >= 2, c > 0");
  return AmbientModel(AmbientKind::Sphere, dim, 0, c);
}

AmbientModel AmbientModel::hyperbolic(int dim, double c) {
  if (dim < 2 || c >= 0.0)
    throw std::invalid_argument("hyperbolic: need dim >= 2, c < 0");
  return AmbientModel(AmbientKind::Hyperbolic, dim, 0, c);
}

AmbientModel AmbientModel::complex_projective(int complex_dim, double c) {
  if (complex_dim < 1 || c <= 0.0)
    throw std::invalid_argument("complex_projective: need m >= 1, c > 0");
  return AmbientModel(AmbientKind::ComplexProjective, 2 * complex_dim, complex_dim, c);
}

AmbientModel AmbientModel::complex_hyperbolic(int complex_dim, double c) {
  if (complex_dim < 1 || c >= 0.0)
    throw std::invalid_argument("complex_hyperbolic: need m >= 1, c < 0");
  return AmbientModel(AmbientKind::ComplexHyperbolic, 2 * complex_dim, complex_dim, c);
}

bool AmbientModel::in_domain(const Vector& p) const {
  if (p.size() != dim_) return false;
  switch (kind_) {
    case AmbientKind::Euclidean: return true;
    case AmbientKind::Sphere:
    case AmbientKind::ComplexProjective: return p.norm() < 1e6;
    case AmbientKind::Hyperbolic:
    case AmbientKind::ComplexHyperbolic: return p.squaredNorm() < 1.0 - 1e-12;
  }
  return false;
}

Matrix AmbientModel::metric(const Vector& p) const {
  switch (kind_) {
    case AmbientKind::Euclidean: return Matrix::Identity(dim_, dim_);
    case AmbientKind::Sphere: {
      const double a = 1.0 / std::sqrt(c_);
      const ConformalChart c = conformal_sphere(p, a);
      return std::exp(2.0 * c.u) * Matrix::Identity(dim_, dim_);
    }
    case AmbientKind::Hyperbolic: {
      const double a = 1.0 / std::sqrt(-c_);
      const ConformalChart c = conformal_hyperbolic(p, a);
      return std::exp(2.0 * c.u) * Matrix::Identity(dim_, dim_);
    }
    case AmbientKind::ComplexProjective:
    case AmbientKind::ComplexHyperbolic: {
      const bool proj = kind_ == AmbientKind::ComplexProjective;
      return hermitian_to_real(hermitian_chart(p, cdim_, c_, proj).h);
    }
  }
  return Matrix();
}

std::vector<Matrix> AmbientModel::metric_deriv(const Vector& p) const {
  std::vector<Matrix> dg(dim_, Matrix::Zero(dim_, dim_));
  switch (kind_) {
    case AmbientKind::Euclidean: break;
    case AmbientKind::Sphere:
    case AmbientKind::Hyperbolic: {
      const double a = 1.0 / std::sqrt(std::abs(c_));
      const ConformalChart c = kind_ == AmbientKind::Sphere
                                   ? conformal_sphere(p, a)
                                   : conformal_hyperbolic(p, a);
      const double e2u = std::exp(2.0 * c.u);
      for (int k = 0; k < dim_; ++k)
        dg[k] = 2.0 * c.du(k) * e2u * Matrix::Identity(dim_, dim_);
      break;
    }
    case AmbientKind::ComplexProjective:
    case AmbientKind::ComplexHyperbolic: {
      const bool proj = kind_ == AmbientKind::ComplexProjective;
      const HermitianChart hc = hermitian_chart(p, cdim_, c_, proj);
      for (int cc = 0; cc < cdim_; ++cc) {
        const MatrixXc dx = hc.dh_z[cc] + hc.dh_zbar[cc];
        const MatrixXc dy = Complexd(0.0, 1.0) * (hc.dh_z[cc] - hc.dh_zbar[cc]);
        dg[2 * cc] = hermitian_to_real(dx);
        dg[2 * cc + 1] = hermitian_to_real(dy);
      }
      break;
    }
  }
  return dg;
}

std::vector<Matrix> AmbientModel::christoffel(const Vector& p) const {
  std::vector<Matrix> gamma(dim_, Matrix::Zero(dim_, dim_));
  if (kind_ == AmbientKind::Euclidean) return gamma;
  if (kind_ == AmbientKind::Sphere || kind_ == AmbientKind::Hyperbolic) {
    const double a = 1.0 / std::sqrt(std::abs(c_));
    const ConformalChart c = kind_ == AmbientKind::Sphere
                                 ? conformal_sphere(p, a)
                                 : conformal_hyperbolic(p, a);
    // Gamma^k_ij = delta_ki u_j + delta_kj u_i - delta_ij u_k
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
          double v = 0.0;
          if (k == i) v += c.du(j);
          if (k == j) v += c.du(i);
          if (i == j) v -= c.du(k);
          gamma[k](i, j) = v;
        }
    return gamma;
  }
  const std::vector<Matrix> dg = metric_deriv(p);
  const Matrix ginv = metric(p).inverse();
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j) {
        double v = 0.0;
        for (int l = 0; l < dim_; ++l)
          v += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma[k](i, j) = 0.5 * v;
        gamma[k](j, i) = 0.5 * v;
      }
  return gamma;
}

Vector AmbientModel::christoffel_apply(const std::vector<Matrix>& gamma,
                                       const Vector& a, const Vector& b) {
  const int n = static_cast<int>(gamma.size());
  Vector out(n);
  for (int k = 0; k < n; ++k) out(k) = a.dot(gamma[k] * b);
  return out;
}

Matrix AmbientModel::complex_structure() const {
  if (kind_ != AmbientKind::ComplexProjective &&
      kind_ != AmbientKind::ComplexHyperbolic)
    throw std::logic_error("complex_structure: not a complex space form");
  Matrix jmat = Matrix::Zero(dim_, dim_);
  for (int a = 0; a < cdim_; ++a) {
    jmat(2 * a + 1, 2 * a) = 1.0;   // J dx_a = dy_a
    jmat(2 * a, 2 * a + 1) = -1.0;  // J dy_a = -dx_a
  }
  return jmat;
}

Vector AmbientModel::curvature(const Vector& p, const Vector& x, const Vector& y,
                               const Vector& z) const {
  if (!in_domain(p)) throw std::invalid_argument("curvature: point outside chart");
  switch (kind_) {
    case AmbientKind::Euclidean: return Vector::Zero(dim_);
    case AmbientKind::Sphere:
    case AmbientKind::Hyperbolic: {
      const Matrix g = metric(p);
      return c_ * ((y.dot(g * z)) * x - (x.dot(g * z)) * y);
    }
    case AmbientKind::ComplexProjective:
    case AmbientKind::ComplexHyperbolic: {
      const Matrix g = metric(p);
      const Matrix jm = complex_structure();
      const Vector jx = jm * x, jy = jm * y, jz = jm * z;
      Vector out = (y.dot(g * z)) * x - (x.dot(g * z)) * y;
      out += (jy.dot(g * z)) * jx - (jx.dot(g * z)) * jy;
      out -= 2.0 * (jx.dot(g * y)) * jz;
      return (c_ / 4.0) * out;
    }
  }
  return Vector();
}

AmbientModel::NormalJacobiData AmbientModel::normal_jacobi(const Vector& p,
                                                           const Vector& xi) const {
  const Matrix g = metric(p);
  const double nrm = std::sqrt(xi.dot(g * xi));
  if (std::abs(nrm - 1.0) > 1e-10)
    throw std::invalid_argument("normal_jacobi: xi must be a unit vector");

  // g-orthonormal basis of the orthocomplement by Gram-Schmidt over the
  // Cholesky frame, skipping the direction closest to xi.
  const int n = dim_ - 1;
  MetricPoint mp(g);
  const Matrix& cand = mp.orthonormal_frame();
  Matrix basis(dim_, n);
  int have = 0;
  for (int i = 0; i < dim_ && have < n; ++i) {
    Vector v = cand.col(i);
    v -= (v.dot(g * xi)) * xi;
    for (int j = 0; j < have; ++j) v -= (v.dot(g * basis.col(j))) * basis.col(j);
    const double vn = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (vn < 0.3) continue;  // nearly parallel to xi
    basis.col(have++) = v / vn;
  }
  if (have != n) throw std::runtime_error("normal_jacobi: basis construction failed");

  NormalJacobiData out;
  out.basis = basis;
  out.op = Matrix::Zero(n, n);
  out.r1 = TensorSlot3(n);
  out.r3 = TensorSlot3(n);
  for (int j = 0; j < n; ++j) {
    const Vector rj = curvature(p, basis.col(j), xi, xi);
    for (int i = 0; i < n; ++i) out.op(i, j) = rj.dot(g * basis.col(i));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vector q1 = curvature(p, xi, basis.col(i), basis.col(j));
      const Vector q3 = curvature(p, basis.col(i), basis.col(j), xi);
      for (int k = 0; k < n; ++k) {
        out.r1.at(i, j, k) = q1.dot(g * basis.col(k));
        out.r3.at(i, j, k) = q3.dot(g * basis.col(k));
      }
    }
  return out;
}

AmbientModel::SymmetryResiduals AmbientModel::local_symmetry_check(const Vector& p,
                                                                   double h) const {
  SymmetryResiduals out;
  const std::vector<Matrix> gamma = christoffel(p);

  auto basis_vec = [&](int i) {
    Vector e = Vector::Zero(dim_);
    e(i) = 1.0;
    return e;
  };

  for (int w = 0; w < dim_; ++w) {
    Vector pp = p, pm = p;
    pp(w) += h;
    pm(w) -= h;
    if (!in_domain(pp) || !in_domain(pm))
      throw std::invalid_argument("local_symmetry_check: step leaves chart");
    const Vector ew = basis_vec(w);
    for (int x = 0; x < dim_; ++x)
      for (int y = 0; y < dim_; ++y)
        for (int z = 0; z < dim_; ++z) {
          const Vector ex = basis_vec(x), ey = basis_vec(y), ez = basis_vec(z);
          Vector d = (curvature(pp, ex, ey, ez) - curvature(pm, ex, ey, ez)) / (2.0 * h);
          const Vector rxyz = curvature(p, ex, ey, ez);
          d += christoffel_apply(gamma, ew, rxyz);
          d -= curvature(p, christoffel_apply(gamma, ew, ex), ey, ez);
          d -= curvature(p, ex, christoffel_apply(gamma, ew, ey), ez);
          d -= curvature(p, ex, ey, christoffel_apply(gamma, ew, ez));
          out.nabla_r = std::max(out.nabla_r, d.cwiseAbs().maxCoeff());
        }
  }

  // Einstein residuals from the algebraic curvature.
  const Matrix g = metric(p);
  MetricPoint mp(g);
  const Matrix& f = mp.orthonormal_frame();
  Matrix ric = Matrix::Zero(dim_, dim_);
  for (int x = 0; x < dim_; ++x) {
    Vector col = Vector::Zero(dim_);
    Vector ex = basis_vec(x);
    for (int i = 0; i < dim_; ++i) col += curvature(p, ex, f.col(i), f.col(i));
    ric.col(x) = col;
  }
  const Matrix id = Matrix::Identity(dim_, dim_);
  out.einstein_ambient = (ric - (scal_ / dim_) * id).cwiseAbs().maxCoeff();
  out.einstein_hyplike = (ric - (scal_ / (dim_ - 1.0)) * id).cwiseAbs().maxCoeff();
  return out;
}

GeodesicSegment AmbientModel::geodesic(const Vector& p, const Vector& v,
                                       double t_max, double dt) const {
  if (!in_domain(p)) throw std::invalid_argument("geodesic: start outside chart");
  GeodesicSegment seg;
  const int steps = static_cast<int>(std::ceil(t_max / dt - 1e-12));
  seg.t.reserve(steps + 1);
  seg.x.reserve(steps + 1);
  seg.v.reserve(steps + 1);
  seg.frame.reserve(steps + 1);

  Vector x = p, vel = v;
  Matrix fr = Matrix::Identity(dim_, dim_);
  const double speed0 = std::sqrt(v.dot(metric(p) * v));
  const Matrix gram0 = metric(p);

  auto record = [&](double tt) {
    seg.t.push_back(tt);
    seg.x.push_back(x);
    seg.v.push_back(vel);
    seg.frame.push_back(fr);
    const Matrix g = metric(x);
    seg.max_speed_drift = std::max(seg.max_speed_drift,
                                   std::abs(std::sqrt(vel.dot(g * vel)) - speed0));
    seg.max_frame_drift = std::max(
        seg.max_frame_drift,
        (fr.transpose() * g * fr - gram0).cwiseAbs().maxCoeff());
  };
  record(0.0);

  struct Deriv {
    Vector dx, dv;
    Matrix df;
  };
  auto rhs = [&](const Vector& xx, const Vector& vv, const Matrix& ff) {
    const std::vector<Matrix> gamma = christoffel(xx);
    Deriv d;
    d.dx = vv;
    d.dv = -christoffel_apply(gamma, vv, vv);
    d.df.resize(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
      d.df.col(j) = -christoffel_apply(gamma, vv, ff.col(j));
    return d;
  };

  double t = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double hstep = std::min(dt, t_max - t);
    const Deriv k1 = rhs(x, vel, fr);
    const Deriv k2 = rhs(x + 0.5 * hstep * k1.dx, vel + 0.5 * hstep * k1.dv,
                         fr + 0.5 * hstep * k1.df);
    const Deriv k3 = rhs(x + 0.5 * hstep * k2.dx, vel + 0.5 * hstep * k2.dv,
                         fr + 0.5 * hstep * k2.df);
    const Deriv k4 = rhs(x + hstep * k3.dx, vel + hstep * k3.dv, fr + hstep * k3.df);
    x += (hstep / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    vel += (hstep / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    fr += (hstep / 6.0) * (k1.df + 2.0 * k2.df + 2.0 * k3.df + k4.df);
    t += hstep;
    if (!in_domain(x)) throw chart_exit_error(t, "geodesic: left chart domain");
    record(t);
  }
  return seg;
}

double AmbientModel::compute_r_norm() const {
  if (kind_ == AmbientKind::Euclidean) return 0.0;
  // Constrained maximisation of ||R(v1,v2)v3|| over g-unit triples at the
  // chart origin: block coordinate ascent, each block solved exactly as a
  // generalized top singular vector; deterministic multistart.
  const Vector p0 = Vector::Zero(dim_);
  const Matrix g = metric(p0);

  auto basis_vec = [&](int i) {
    Vector e = Vector::Zero(dim_);
    e(i) = 1.0;
    return e;
  };

  auto normalize = [&](Vector v) {
    const double n = std::sqrt(std::max(v.dot(g * v), 1e-300));
    return Vector(v / n);
  };

  auto value = [&](const Vector& a, const Vector& b, const Vector& cvec) {
    const Vector r = curvature(p0, a, b, cvec);
    return std::sqrt(std::max(0.0, r.dot(g * r)));
  };

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&]() {
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = gauss(rng);
    return normalize(v);
  };

  double best = 0.0;
  for (int start = 0; start < 40; ++start) {
    Vector a = random_unit(), b = random_unit(), cvec = random_unit();
    double prev = -1.0;
    for (int it = 0; it < 60; ++it) {
      for (int slot = 0; slot < 3; ++slot) {
        Matrix lin(dim_, dim_);
        for (int i = 0; i < dim_; ++i) {
          const Vector e = basis_vec(i);
          Vector col;
          if (slot == 0) col = curvature(p0, e, b, cvec);
          else if (slot == 1) col = curvature(p0, a, e, cvec);
          else col = curvature(p0, a, b, e);
          lin.col(i) = col;
        }
        const Matrix q = lin.transpose() * g * lin;
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()), g);
        Vector top = es.eigenvectors().col(dim_ - 1);
        top = normalize(top);
        if (slot == 0) a = top;
        else if (slot == 1) b = top;
        else cvec = top;
      }
      const double cur = value(a, b, cvec);
      if (std::abs(cur - prev) < 1e-13) break;
      prev = cur;
    }
    best = std::max(best, prev);
  }
  return best;
}

std::string AmbientModel::config_string() const {
  std::ostringstream os;
  os << "model.kind = " << to_string(kind_) << "\n";
  os << "model.dim = " << dim_ << "\n";
  os << "model.curvature = " << c_ << "\n";
  if (cdim_ > 0) os << "model.complex_dim = " << cdim_ << "\n";
  return os.str();
}

}  // namespace curvflow
