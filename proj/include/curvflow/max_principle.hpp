#pragma once

#include <cstdint>
#include <vector>

namespace curvflow {

// One explicit 5-point heat step on a periodic nx x ny grid:
// out = in + r (sum of 4 neighbours - 4 in), r = dt / h^2.
// Serial reference and OpenMP kernel produce identical bytes.
void heat_step_serial(const std::vector<double>& in, std::vector<double>& out, int nx,
                      int ny, double r);
void heat_step_parallel(const std::vector<double>& in, std::vector<double>& out,
                        int nx, int ny, double r);

struct MaxPrincipleResult {
  bool bound_ok = true;     // rho <= max(rho0) e^{c1 t} at every node and step
  bool monotone_ok = true;  // max of e^{-c1 t} rho never increases
  double worst_ratio = 0.0; // max over steps of max(e^{-c1 t} rho)/max(rho0)
  double final_max_rho = 0.0;  // max rho at t_max
  double bound_at_end = 0.0;   // max(rho0) e^{c1 t_max}
  int steps = 0;
  double dt = 0.0;
};

// Integrates the worst-case reaction-diffusion comparison equation
//   d rho / dt = Lap rho + c1 rho
// on a flat periodic grid by explicit stepping (diffusion explicit, reaction
// by its exact per-step factor) and checks the comparison bound
//   rho_t <= max(rho0) e^{c1 t}.
// rho0 must be non-negative; cfl_kappa in (0, 1] scales dt = kappa h^2/4.
// Throws std::invalid_argument on a CFL violation (kappa > 1) or bad input.
MaxPrincipleResult max_principle_check(const std::vector<double>& rho0, int nx, int ny,
                                       double h, double c1, double t_max,
                                       double cfl_kappa = 0.9,
                                       bool use_parallel = true);

}  // namespace curvflow
