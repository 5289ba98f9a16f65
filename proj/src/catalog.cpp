#include "curvflow/catalog.hpp"

#include <cmath>
#include <random>

namespace curvflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

using MapFn = std::function<Vector(double, double, double)>;

struct Box {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
  std::array<int, 3> sz{1, 1, 1};
  std::array<bool, 3> per{false, false, false};
};

std::shared_ptr<ParametrizedImmersion> sample_grid(const AmbientModel& model, int n,
                                                   const Box& box, const MapFn& map,
                                                   const Vector& hint_dir,
                                                   const std::array<double, 3>& hint_uv) {
  GridSpec g;
  g.n = n;
  for (int a = 0; a < n; ++a) {
    g.size[a] = box.sz[a];
    g.periodic[a] = box.per[a];
    const double span = box.hi[a] - box.lo[a];
    g.spacing[a] = box.per[a] ? span / box.sz[a] : span / (box.sz[a] - 1);
  }
  std::vector<Vector> pts(g.count());
  for (int i = 0; i < g.size[0]; ++i)
    for (int j = 0; j < g.size[1]; ++j)
      for (int k = 0; k < g.size[2]; ++k) {
        const double u0 = box.lo[0] + i * g.spacing[0];
        const double u1 = box.lo[1] + j * g.spacing[1];
        const double u2 = g.n == 3 ? box.lo[2] + k * g.spacing[2] : 0.0;
        pts[g.flat(i, j, k)] = map(u0, u1, u2);
      }

  // Orientation: pick the cofactor-normal sign that points along the family
  // direction at one probe parameter.
  double orient = 1.0;
  {
    const double e = 1e-5;
    const int dim = model.dim();
    Matrix t(dim, n);
    const double u0 = hint_uv[0], u1 = hint_uv[1], u2 = hint_uv[2];
    t.col(0) = (map(u0 + e, u1, u2) - map(u0 - e, u1, u2)) / (2 * e);
    t.col(1) = (map(u0, u1 + e, u2) - map(u0, u1 - e, u2)) / (2 * e);
    if (n == 3) t.col(2) = (map(u0, u1, u2 + e) - map(u0, u1, u2 - e)) / (2 * e);
    Vector cof(dim);
    Matrix minor(n, n);
    for (int kk = 0; kk < dim; ++kk) {
      int rr = 0;
      for (int row = 0; row < dim; ++row) {
        if (row == kk) continue;
        minor.row(rr++) = t.row(row);
      }
      cof(kk) = ((kk % 2) == 0 ? 1.0 : -1.0) * minor.determinant();
    }
    const Vector x = map(u0, u1, u2);
    const Matrix gamb = model.metric(x);
    const Vector pre = gamb.ldlt().solve(cof);
    orient = pre.dot(gamb * hint_dir) >= 0.0 ? 1.0 : -1.0;
  }
  return std::make_shared<ParametrizedImmersion>(model, g, std::move(pts), orient);
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

Vector vec4(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

Vector hopf_dir(double eta, double p1, double p2) {
  return vec4(std::cos(eta) * std::cos(p1), std::cos(eta) * std::sin(p1),
              std::sin(eta) * std::cos(p2), std::sin(eta) * std::sin(p2));
}

}  // namespace

std::vector<CatalogRow> catalog_listing() {
  std::vector<CatalogRow> rows;
  auto add = [&](const char* name, const char* status, const char* params) {
    rows.push_back({name, status, params});
  };
  add("plane-r3", "curvature-adapted (trivially)", "-");
  add("sphere-r3", "curvature-adapted (trivially)", "R0");
  add("clifford-torus-s3", "curvature-adapted (trivially); minimal", "-");
  add("equator-s3", "curvature-adapted (trivially); minimal", "-");
  add("hyperbolic-sphere-h3", "curvature-adapted (trivially)", "R0");
  add("cp2-geodesic-sphere", "curvature-adapted (Hopf)", "r0");
  add("cp2-perturbed", "generically not curvature-adapted", "r0, seed, amplitude");
  return rows;
}

BuiltInExample make_example(const std::string& name, const ExampleParams& params) {
  BuiltInExample ex;
  ex.name = name;

  if (name == "plane-r3") {
    ex.model = AmbientModel::euclidean(3);
    ex.n = 2;
    ex.status = "curvature-adapted (trivially)";
    ex.spectrum = IsoparametricSpectrum({{0.0, 0.0, 2}});
    ex.build = [](double r, const GridOptions& opt) {
      Box box;
      const int res = opt.res > 0 ? opt.res : 64;
      const double w = opt.patch ? opt.patch_extent : 1.0;
      box.lo = {-w, -w, 0};
      box.hi = {w, w, 0};
      box.sz = {res, res, 1};
      auto map = [r](double u, double v, double) { return vec3(u, v, r); };
      return sample_grid(AmbientModel::euclidean(3), 2, box, map, vec3(0, 0, 1),
                         {0.1, 0.05, 0});
    };
    return ex;
  }

  if (name == "sphere-r3" || name == "hyperbolic-sphere-h3" || name == "equator-s3") {
    ex.n = 2;
    double R0 = params.R0;
    AmbientModel model = AmbientModel::euclidean(3);
    if (name == "sphere-r3") {
      model = AmbientModel::euclidean(3);
      ex.status = "curvature-adapted (trivially)";
      ex.spectrum = IsoparametricSpectrum({{1.0 / R0, 0.0, 2}});
    } else if (name == "hyperbolic-sphere-h3") {
      model = AmbientModel::hyperbolic(3, -1.0);
      ex.status = "curvature-adapted (trivially)";
      ex.spectrum = IsoparametricSpectrum({{1.0 / std::tanh(R0), -1.0, 2}});
    } else {
      model = AmbientModel::sphere(3, 1.0);
      ex.status = "curvature-adapted (trivially); minimal";
      R0 = kPi / 2.0;
      ex.spectrum = IsoparametricSpectrum({{0.0, 1.0, 2}});
    }
    ex.model = model;
    const std::string which = name;
    ex.build = [which, R0, model](double r, const GridOptions& opt) {
      const int res = opt.res > 0 ? opt.res : 64;
      Box box;
      if (opt.patch) {
        const double w = opt.patch_extent;
        box.lo = {kPi / 2 - 0.3 - w, 0.7 - w, 0};
        box.hi = {kPi / 2 - 0.3 + w, 0.7 + w, 0};
        box.sz = {res, res, 1};
      } else {
        box.lo = {0.35, 0.0, 0};
        box.hi = {kPi - 0.35, 2.0 * kPi, 0};
        box.sz = {res, res, 1};
        box.per = {false, true, false};
      }
      auto chart_radius = [which, R0](double r_off) {
        const double u = R0 + r_off;
        if (which == "sphere-r3") return u;
        if (which == "hyperbolic-sphere-h3") return std::tanh(u / 2.0);
        return std::tan(u / 2.0);  // unit-curvature sphere chart
      };
      const double rho_c = chart_radius(r);
      auto map = [rho_c](double th, double ph, double) {
        return vec3(rho_c * std::sin(th) * std::cos(ph),
                    rho_c * std::sin(th) * std::sin(ph), rho_c * std::cos(th));
      };
      const double thc = kPi / 2 - 0.3, phc = 0.7;
      const Vector hint =
          vec3(std::sin(thc) * std::cos(phc), std::sin(thc) * std::sin(phc),
               std::cos(thc));
      return sample_grid(model, 2, box, map, hint, {thc, phc, 0});
    };
    return ex;
  }

  if (name == "clifford-torus-s3") {
    ex.model = AmbientModel::sphere(3, 1.0);
    ex.n = 2;
    ex.status = "curvature-adapted (trivially); minimal";
    ex.spectrum = IsoparametricSpectrum({{1.0, 1.0, 1}, {-1.0, 1.0, 1}});
    ex.build = [](double r, const GridOptions& opt) {
      const int res = opt.res > 0 ? opt.res : 48;
      Box box;
      if (opt.patch) {
        const double w = opt.patch_extent;
        box.lo = {0.7 - w, 1.3 - w, 0};
        box.hi = {0.7 + w, 1.3 + w, 0};
        box.sz = {res, res, 1};
      } else {
        box.lo = {0, 0, 0};
        box.hi = {2 * kPi, 2 * kPi, 0};
        box.sz = {res, res, 1};
        box.per = {true, true, false};
      }
      const double beta = kPi / 4 + r;
      auto chart = [](const Vector& p4) {
        return vec3(p4(0) / (1 - p4(3)), p4(1) / (1 - p4(3)), p4(2) / (1 - p4(3)));
      };
      auto map = [beta, chart](double u, double v, double) {
        return chart(vec4(std::cos(beta) * std::cos(u), std::cos(beta) * std::sin(u),
                          std::sin(beta) * std::cos(v), std::sin(beta) * std::sin(v)));
      };
      // family direction: d/d beta through the chart
      const double e = 1e-6, uc = 0.7, vc = 1.3;
      auto at_beta = [&](double b) {
        return chart(vec4(std::cos(b) * std::cos(uc), std::cos(b) * std::sin(uc),
                          std::sin(b) * std::cos(vc), std::sin(b) * std::sin(vc)));
      };
      const Vector hint = (at_beta(beta + e) - at_beta(beta - e)) / (2 * e);
      return sample_grid(AmbientModel::sphere(3, 1.0), 2, box, map, hint, {uc, vc, 0});
    };
    return ex;
  }

  if (name == "cp2-geodesic-sphere" || name == "cp2-perturbed") {
    ex.model = AmbientModel::complex_projective(2, 4.0);
    ex.n = 3;
    const double r0 = params.r0;
    if (name == "cp2-geodesic-sphere") {
      ex.status = "curvature-adapted (Hopf)";
      ex.spectrum = IsoparametricSpectrum(
          {{1.0 / std::tan(r0), 1.0, 2}, {2.0 / std::tan(2.0 * r0), 4.0, 1}});
    } else {
      ex.status = "generically not curvature-adapted";
    }
    const bool perturbed = name == "cp2-perturbed";
    const std::uint64_t seed = params.seed;
    const double amp = params.amplitude;
    ex.build = [r0, perturbed, seed, amp](double r, const GridOptions& opt) {
      const int res = opt.res > 0 ? opt.res : 24;
      Box box;
      if (opt.patch) {
        const double w = opt.patch_extent;
        box.lo = {0.8 - w, 0.7 - w, 1.1 - w};
        box.hi = {0.8 + w, 0.7 + w, 1.1 + w};
        box.sz = {res, res, res};
      } else {
        box.lo = {0.3, 0.0, 0.0};
        box.hi = {kPi / 2 - 0.3, 2 * kPi, 2 * kPi};
        box.sz = {res, res, res};
        box.per = {false, true, true};
      }
      // Seeded quadratic form on the direction sphere.
      std::array<double, 10> coef{};
      if (perturbed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (double& c : coef) c = uni(rng);
      }
      auto radius = [&, r0, amp, perturbed](const Vector& d) {
        if (!perturbed) return r0;
        double q = 0.0;
        int idx = 0;
        for (int i = 0; i < 4; ++i)
          for (int j = i; j < 4; ++j) q += coef[idx++] * d(i) * d(j);
        return r0 * (1.0 + amp * q);
      };
      auto map = [&, r](double eta, double p1, double p2) {
        const Vector d = hopf_dir(eta, p1, p2);
        return Vector(std::tan(radius(d) + r) * d);
      };
      const Vector hint = hopf_dir(0.8, 0.7, 1.1);
      return sample_grid(AmbientModel::complex_projective(2, 4.0), 3, box, map, hint,
                         {0.8, 0.7, 1.1});
    };
    return ex;
  }

  throw std::invalid_argument("make_example: unknown example '" + name + "'");
}

}  // namespace curvflow
