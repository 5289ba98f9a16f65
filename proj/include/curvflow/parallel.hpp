#pragma once

#include "curvflow/ambient.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace curvflow {

// Simultaneous eigendata of the shape operator and the normal Jacobi operator
// of a curvature-adapted hypersurface.
struct SpectrumEntry {
  double lambda = 0.0;  // shape-operator eigenvalue
  double nu = 0.0;      // normal Jacobi eigenvalue
  int mult = 1;
};

class IsoparametricSpectrum {
public:
  IsoparametricSpectrum() = default;
  explicit IsoparametricSpectrum(std::vector<SpectrumEntry> entries);

  const std::vector<SpectrumEntry>& entries() const { return entries_; }
  int n() const;  // sum of multiplicities

private:
  std::vector<SpectrumEntry> entries_;
};

IsoparametricSpectrum parse_spectrum(std::istream& in);
std::string format_spectrum(const IsoparametricSpectrum& s);

class focal_point_error : public std::runtime_error {
public:
  focal_point_error(double r, const std::string& what)
      : std::runtime_error(what), r_(r) {}
  double r() const { return r_; }

private:
  double r_;
};

// Principal curvature of the parallel hypersurface at signed normal distance r
// (positive r along +xi), continuous with value lambda at r = 0:
//   lambda(r) = (lambda C(nu,r) - nu Sc(nu,r)) / (C(nu,r) + lambda Sc(nu,r))
// with C = jacobi_cos, Sc = jacobi_sinc.  Throws focal_point_error when the
// denominator falls below delta.
double parallel_eigenvalue(double lambda, double nu, double r, double delta = 1e-6);

// Denominator of the transport map; vanishes exactly at focal radii.
double parallel_denominator(double lambda, double nu, double r);

// Spectrum transported to distance r: lambdas move, nus and multiplicities
// are invariant.
IsoparametricSpectrum jacobi_invariance(const IsoparametricSpectrum& s, double r,
                                        double delta = 1e-6);

struct ParallelFamily {
  IsoparametricSpectrum spectrum;  // at r = 0
  // Focal-free interval around r = 0 (nearest focal radii; +-inf if none).
  double r_lo = 0.0;
  double r_hi = 0.0;
};

ParallelFamily make_family(IsoparametricSpectrum spectrum);

// H(r) = sum_i mult_i lambda_i(r).
double mean_curvature_profile(const ParallelFamily& f, double r, double delta = 1e-6);

enum class FlowDirection { Forward, Backward };

struct FlowSample {
  double t = 0.0;
  double r = 0.0;
  double h_value = 0.0;
  double rho = 0.0;
  std::vector<double> lambda;
  std::vector<double> nu;
};

struct SpectrumFlowResult {
  std::vector<FlowSample> samples;
  bool collapsed = false;
  double focal_radius = 0.0;   // focal radius reached (if collapsed)
  double collapse_lo = 0.0;    // integration stop time (lower bound)
  double collapse_hi = 0.0;    // upper bound
  double collapse_time = 0.0;  // estimate
};

// One-dimensional reduction of the flow: dr/dt = sigma H(r) with sigma = -1
// forward, +1 backward, integrated by RK4 with fixed dt away from focal radii
// and proportional refinement near them; a focal collapse is reported with a
// bracketed collapse time (denominator zero located by bisection, remaining
// time by quadrature of 1/|H|).
SpectrumFlowResult flow_ode(const ParallelFamily& f, double t_max, double dt,
                            FlowDirection dir, double delta = 1e-6);

// Collapse time by pure quadrature of dr/|H| from r = 0 to the focal radius;
// used as an independent cross-check of the stepped estimate.
std::optional<double> collapse_time_quadrature(const ParallelFamily& f,
                                               FlowDirection dir);

// Offset reached at time t, by fine fixed-step integration of dr/dt = sigma H.
double radius_at_time(const ParallelFamily& f, double t, FlowDirection dir,
                      double dt_inner = 1e-6);

struct TheoremAMonitor {
  double max_rho = 0.0;
  bool nu_constant = true;
  bool mult_constant = true;
  bool h_spatially_constant = true;  // trivially true for spectrum families
  std::vector<double> nu_values;     // the invariant nu-spectrum, with multiplicity
};

TheoremAMonitor theorem_a_monitor(const ParallelFamily& f,
                                  const SpectrumFlowResult& flow);

}  // namespace curvflow
