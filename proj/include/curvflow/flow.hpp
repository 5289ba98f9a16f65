#pragma once

#include "curvflow/immersion.hpp"
#include "curvflow/parallel.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace curvflow {

// Evolution equations checked as residuals; each tag is bound to one display.
enum class EquationTag { Metric, Normal, Shape, Mean, Jacobi, Commutator, Gap };

const char* display_tag(EquationTag t);
std::vector<EquationTag> all_equation_tags();

enum class TimeStepper { Euler, Midpoint };

// One explicit step of the flow: every grid point moves by -H xi dt
// (forward) or +H xi dt (backward) in the ambient chart.
// dt must satisfy dt <= kappa h_min^2 / max||A||^2.
std::shared_ptr<ParametrizedImmersion> step_immersion(
    const ParametrizedImmersion& im, double dt, FlowDirection dir,
    TimeStepper stepper = TimeStepper::Midpoint, double stability_kappa = 0.25);

struct MonitorRow {
  double t = 0.0;
  double max_rho = 0.0;
  double sup_mu = 0.0;
  double max_s_hat = 0.0;
  double h_min = 0.0, h_max = 0.0;
  double max_a_norm = 0.0;   // max ||A||
  double min_pair = 0.0;     // min <s_hat, s>
};

// Time series of states plus per-time monitors.
struct FlowTrace {
  FlowDirection direction = FlowDirection::Forward;
  int margin = 3;
  std::vector<double> times;
  std::vector<std::shared_ptr<HypersurfaceState>> states;
  std::vector<MonitorRow> monitors;

  void append(double t, std::shared_ptr<HypersurfaceState> st, bool with_adaptedness);
  size_t size() const { return times.size(); }
};

FlowTrace run_pde_flow(std::shared_ptr<const ParametrizedImmersion> start, int steps,
                       double dt, FlowDirection dir,
                       TimeStepper stepper = TimeStepper::Midpoint,
                       bool with_adaptedness = true, double stability_kappa = 0.25);

// Max over interior grid points of |d(quantity)/dt - RHS|, with the time
// derivative taken by 3-point central differences on stored snapshots.
// t_index must have neighbours on both sides.
double residual_check(FlowTrace& trace, EquationTag tag, size_t t_index);

// Same residual at a single grid point; lets convergence studies difference
// out the resolution-independent part at a fixed probe.
double residual_check_at(FlowTrace& trace, EquationTag tag, size_t t_index,
                         size_t point_idx);

// Residual of the pushforward evolution of a fixed coordinate field.
double pushforward_derivative_check(const FlowTrace& trace, int z_axis, size_t t_index);

// rho_tol default: 1e-8 n (1 + max||A||^4).
double default_rho_tol(const FlowTrace& trace);

// C1 for the trace's horizon, assembled from the monitors.
double trace_c1(const FlowTrace& trace, double r_norm);

struct GapMonitorReport {
  std::optional<double> t_min;  // first time max rho exceeds rho_tol
  double rho_tol = 0.0;
  double max_rho_overall = 0.0;
  double final_sup_mu = 0.0;
  double max_sup_mu = 0.0;
  bool sup_mu_divergence_flag = false;  // heuristic, informational
};
GapMonitorReport gap_monitor(const FlowTrace& trace, double rho_tol);

struct CorollaryEReport {
  double min_pair = 0.0;
  double max_rho = 0.0;
  bool pairing_nonneg = false;
  bool rho_within_tol = false;
};
CorollaryEReport corollary_e_gate(const FlowTrace& trace, double rho_tol);

}  // namespace curvflow
