#include "curvflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

namespace curvflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// 16-point Gauss-Legendre nodes/weights on [0, 1].
const double kGLNode[16] = {
    0.0052995325041750333, 0.0277124884633837046, 0.0671843988060841224,
    0.1222977958224984868, 0.1910618777986781147, 0.2709916111713863151,
    0.3591982246103705422, 0.4524937450811812866, 0.5475062549188187134,
    0.6408017753896294578, 0.7290083888286136849, 0.8089381222013218853,
    0.8777022041775015132, 0.9328156011939158776, 0.9722875115366162954,
    0.9947004674958249667};
const double kGLWeight[16] = {
    0.0135762297058770482, 0.0311267619693239468, 0.0475792558412463928,
    0.0623144856277669384, 0.0747979944082883680, 0.0845782596975012679,
    0.0913017075224617918, 0.0947253052275342510, 0.0947253052275342510,
    0.0913017075224617918, 0.0845782596975012679, 0.0747979944082883680,
    0.0623144856277669384, 0.0475792558412463928, 0.0311267619693239468,
    0.0135762297058770482};
}  // namespace

IsoparametricSpectrum::IsoparametricSpectrum(std::vector<SpectrumEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty())
    throw std::invalid_argument("IsoparametricSpectrum: empty spectrum");
  for (const auto& e : entries_)
    if (e.mult < 1)
      throw std::invalid_argument("IsoparametricSpectrum: multiplicities must be positive");
}

int IsoparametricSpectrum::n() const {
  int s = 0;
  for (const auto& e : entries_) s += e.mult;
  return s;
}

IsoparametricSpectrum parse_spectrum(std::istream& in) {
  std::vector<SpectrumEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == '(' || c == ')' || c == ',') c = ' ';
    std::istringstream ls(line);
    SpectrumEntry e;
    if (ls >> e.lambda >> e.nu >> e.mult) entries.push_back(e);
  }
  return IsoparametricSpectrum(std::move(entries));
}

std::string format_spectrum(const IsoparametricSpectrum& s) {
  std::ostringstream os;
  for (const auto& e : s.entries())
    os << "(" << e.lambda << " " << e.nu << " " << e.mult << ")\n";
  return os.str();
}

double parallel_denominator(double lambda, double nu, double r) {
  return jacobi_cos(nu, r) + lambda * jacobi_sinc(nu, r);
}

double parallel_eigenvalue(double lambda, double nu, double r, double delta) {
  const double den = parallel_denominator(lambda, nu, r);
  if (std::abs(den) < delta)
    throw focal_point_error(r, "parallel_eigenvalue: focal point");
  const double num = lambda * jacobi_cos(nu, r) - nu * jacobi_sinc(nu, r);
  return num / den;
}

IsoparametricSpectrum jacobi_invariance(const IsoparametricSpectrum& s, double r,
                                        double delta) {
  std::vector<SpectrumEntry> out = s.entries();
  for (auto& e : out) e.lambda = parallel_eigenvalue(e.lambda, e.nu, r, delta);
  return IsoparametricSpectrum(std::move(out));
}

namespace {

// Nearest zero of the transport denominator of entry e in direction dir
// (+1 or -1), located by march-and-bisect; +-inf if none within the horizon.
double focal_radius_entry(const SpectrumEntry& e, int dir) {
  const double scale =
      1.0 / std::max({std::abs(e.lambda), std::sqrt(std::abs(e.nu)), 0.1});
  const double step = 0.01 * scale * dir;
  const double horizon = 1000.0 * std::abs(step);
  double r0 = 0.0, d0 = parallel_denominator(e.lambda, e.nu, 0.0);
  for (double r = step;; r += step) {
    if (std::abs(r) > horizon) return dir > 0 ? kInf : -kInf;
    const double d = parallel_denominator(e.lambda, e.nu, r);
    if (d0 * d <= 0.0) {
      // bisect to width 1e-12
      double lo = r0, hi = r, dlo = d0;
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = parallel_denominator(e.lambda, e.nu, mid);
        if (dlo * dm <= 0.0) hi = mid;
        else {
          lo = mid;
          dlo = dm;
        }
      }
      return 0.5 * (lo + hi);
    }
    r0 = r;
    d0 = d;
  }
}

double h_of(const IsoparametricSpectrum& s0, double r) {
  // Unguarded profile; +-inf exactly at focal radii is acceptable here.
  double h = 0.0;
  for (const auto& e : s0.entries()) {
    const double den = parallel_denominator(e.lambda, e.nu, r);
    const double num = e.lambda * jacobi_cos(e.nu, r) - e.nu * jacobi_sinc(e.nu, r);
    h += e.mult * num / den;
  }
  return h;
}

// Time to travel between radii a and b (monotone leg): integral of 1/|H|.
double travel_time(const IsoparametricSpectrum& s0, double a, double b) {
  const int panels = 64;
  const double len = b - a;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double u0 = static_cast<double>(p) / panels;
    for (int q = 0; q < 16; ++q) {
      const double u = u0 + kGLNode[q] / panels;
      const double h = h_of(s0, a + u * len);
      const double integrand = std::isfinite(h) && h != 0.0 ? 1.0 / std::abs(h) : 0.0;
      total += kGLWeight[q] / panels * integrand;
    }
  }
  return std::abs(len) * total;
}

}  // namespace

ParallelFamily make_family(IsoparametricSpectrum spectrum) {
  ParallelFamily f;
  f.spectrum = std::move(spectrum);
  f.r_lo = -kInf;
  f.r_hi = kInf;
  for (const auto& e : f.spectrum.entries()) {
    f.r_hi = std::min(f.r_hi, focal_radius_entry(e, +1));
    f.r_lo = std::max(f.r_lo, focal_radius_entry(e, -1));
  }
  return f;
}

double mean_curvature_profile(const ParallelFamily& f, double r, double delta) {
  double h = 0.0;
  for (const auto& e : f.spectrum.entries())
    h += e.mult * parallel_eigenvalue(e.lambda, e.nu, r, delta);
  return h;
}

SpectrumFlowResult flow_ode(const ParallelFamily& f, double t_max, double dt,
                            FlowDirection dir, double delta) {
  if (!(dt > 0.0) || !(t_max >= 0.0))
    throw std::invalid_argument("flow_ode: need dt > 0 and t_max >= 0");
  const double sigma = dir == FlowDirection::Forward ? -1.0 : 1.0;
  const IsoparametricSpectrum& s0 = f.spectrum;

  SpectrumFlowResult out;
  auto min_den = [&](double r) {
    double m = kInf;
    for (const auto& e : s0.entries())
      m = std::min(m, std::abs(parallel_denominator(e.lambda, e.nu, r)));
    return m;
  };
  auto record = [&](double t, double r) {
    FlowSample s;
    s.t = t;
    s.r = r;
    s.h_value = h_of(s0, r);
    Matrix lam = Matrix::Zero(s0.n(), s0.n());
    Matrix nu = Matrix::Zero(s0.n(), s0.n());
    int idx = 0;
    for (const auto& e : s0.entries())
      for (int m = 0; m < e.mult; ++m, ++idx) {
        const double den = parallel_denominator(e.lambda, e.nu, r);
        lam(idx, idx) =
            (e.lambda * jacobi_cos(e.nu, r) - e.nu * jacobi_sinc(e.nu, r)) / den;
        nu(idx, idx) = e.nu;
        s.lambda.push_back(lam(idx, idx));
        s.nu.push_back(e.nu);
      }
    s.rho = gap(commutator(lam, nu), MetricPoint(Matrix::Identity(s0.n(), s0.n())));
    out.samples.push_back(std::move(s));
  };

  double t = 0.0, r = 0.0;
  record(t, r);
  auto deriv = [&](double rr) { return sigma * h_of(s0, rr); };

  const double v0 = deriv(0.0);
  if (v0 == 0.0) {
    // Stationary (minimal) hypersurface: constant trajectory.
    for (double tt = dt; tt <= t_max + 1e-15; tt += dt) record(tt, 0.0);
    return out;
  }
  const int motion = v0 > 0.0 ? +1 : -1;
  const double focal = motion > 0 ? f.r_hi : f.r_lo;

  const size_t max_steps = 50'000'000;
  for (size_t step = 0; step < max_steps && t < t_max - 1e-15; ++step) {
    const double speed = std::abs(deriv(r));
    // Stop once the requested resolution can no longer resolve the focal
    // approach, or once a denominator falls under the guard.
    if (std::isfinite(focal)) {
      const double dist = std::abs(focal - r);
      if (dist < 50.0 * dt * std::max(speed, 1e-300) || min_den(r) < delta) {
        out.collapsed = true;
        break;
      }
    }
    const double hstep = std::min(dt, t_max - t);
    const double k1 = deriv(r);
    const double k2 = deriv(r + 0.5 * hstep * k1);
    const double k3 = deriv(r + 0.5 * hstep * k2);
    const double k4 = deriv(r + hstep * k3);
    const double rn = r + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (std::isfinite(focal) && (motion > 0 ? rn >= focal : rn <= focal)) {
      out.collapsed = true;
      break;
    }
    r = rn;
    t += hstep;
    record(t, r);
  }

  if (out.collapsed) {
    out.focal_radius = focal;
    const double tail = travel_time(s0, std::min(r, focal), std::max(r, focal));
    out.collapse_time = t + tail;
    // Error pad: quadrature tail error plus stepping error of the smooth leg.
    const double pad = 1e-10 + 1e-6 * tail + dt * dt * dt;
    out.collapse_lo = out.collapse_time - pad;
    out.collapse_hi = out.collapse_time + pad;
  }
  return out;
}

std::optional<double> collapse_time_quadrature(const ParallelFamily& f,
                                               FlowDirection dir) {
  const double sigma = dir == FlowDirection::Forward ? -1.0 : 1.0;
  const double v0 = sigma * h_of(f.spectrum, 0.0);
  if (v0 == 0.0) return std::nullopt;
  const double focal = v0 > 0.0 ? f.r_hi : f.r_lo;
  if (!std::isfinite(focal)) return std::nullopt;
  return travel_time(f.spectrum, std::min(0.0, focal), std::max(0.0, focal));
}

double radius_at_time(const ParallelFamily& f, double t, FlowDirection dir,
                      double dt_inner) {
  const double sigma = dir == FlowDirection::Forward ? -1.0 : 1.0;
  auto v = [&](double rr) { return sigma * h_of(f.spectrum, rr); };
  double r = 0.0, tt = 0.0;
  while (tt < t - 1e-15) {
    const double h = std::min(dt_inner, t - tt);
    const double k1 = v(r), k2 = v(r + 0.5 * h * k1), k3 = v(r + 0.5 * h * k2),
                 k4 = v(r + h * k3);
    r += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    tt += h;
  }
  return r;
}

TheoremAMonitor theorem_a_monitor(const ParallelFamily& f,
                                  const SpectrumFlowResult& flow) {
  TheoremAMonitor mon;
  for (const auto& e : f.spectrum.entries())
    for (int m = 0; m < e.mult; ++m) mon.nu_values.push_back(e.nu);
  for (const auto& s : flow.samples) {
    mon.max_rho = std::max(mon.max_rho, s.rho);
    if (s.nu.size() != mon.nu_values.size()) {
      mon.mult_constant = false;
      continue;
    }
    for (size_t i = 0; i < s.nu.size(); ++i)
      if (s.nu[i] != mon.nu_values[i]) mon.nu_constant = false;
  }
  return mon;
}

}  // namespace curvflow
