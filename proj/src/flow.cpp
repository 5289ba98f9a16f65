#include "curvflow/flow.hpp"

#include "curvflow/parallel_for.hpp"

#include <algorithm>
#include <cmath>

namespace curvflow {

const char* display_tag(EquationTag t) {
  switch (t) {
    case EquationTag::Metric: return "Lemma 2.1";
    case EquationTag::Normal: return "Lemma 2.2";
    case EquationTag::Shape: return "Lemma 2.3";
    case EquationTag::Mean: return "Lemma 2.4";
    case EquationTag::Jacobi: return "Prop 3.3";
    case EquationTag::Commutator: return "Eq (4.6)";
    case EquationTag::Gap: return "Lemma 4.3";
  }
  return "?";
}

std::vector<EquationTag> all_equation_tags() {
  return {EquationTag::Metric,  EquationTag::Normal,     EquationTag::Shape,
          EquationTag::Mean,    EquationTag::Jacobi,     EquationTag::Commutator,
          EquationTag::Gap};
}

std::shared_ptr<ParametrizedImmersion> step_immersion(const ParametrizedImmersion& im,
                                                      double dt, FlowDirection dir,
                                                      TimeStepper stepper,
                                                      double stability_kappa) {
  const double sgn = dir == FlowDirection::Forward ? -1.0 : 1.0;
  auto base = std::make_shared<ParametrizedImmersion>(im);
  auto st = HypersurfaceState::fundamental_forms(base);

  double max_a2 = 0.0;
  for (size_t i = 0; i < st->count(); ++i)
    max_a2 = std::max(max_a2, (st->shape[i] * st->shape[i]).trace());
  double h_min = 1e300;
  for (int a = 0; a < im.grid().n; ++a) h_min = std::min(h_min, im.grid().spacing[a]);
  if (max_a2 > 0.0 && dt > stability_kappa * h_min * h_min / max_a2)
    throw std::invalid_argument("step_immersion: dt violates the stability bound");

  auto displaced = [&](const HypersurfaceState& s, const std::vector<Vector>& from,
                       double step) {
    std::vector<Vector> out(from.size());
    for (size_t i = 0; i < from.size(); ++i)
      out[i] = from[i] + step * sgn * s.mean[i] * s.xi[i];
    return out;
  };

  std::vector<Vector> new_pts;
  if (stepper == TimeStepper::Euler) {
    new_pts = displaced(*st, im.points(), dt);
  } else {
    auto mid = std::make_shared<ParametrizedImmersion>(
        im.model(), im.grid(), displaced(*st, im.points(), 0.5 * dt),
        im.orientation(), im.degeneracy_eps());
    auto st_mid = HypersurfaceState::fundamental_forms(mid);
    new_pts = displaced(*st_mid, im.points(), dt);
  }
  for (const Vector& p : new_pts)
    if (!im.model().in_domain(p))
      throw chart_exit_error(dt, "step_immersion: point left chart domain");
  return std::make_shared<ParametrizedImmersion>(im.model(), im.grid(),
                                                 std::move(new_pts), im.orientation(),
                                                 im.degeneracy_eps());
}

void FlowTrace::append(double t, std::shared_ptr<HypersurfaceState> st,
                       bool with_adaptedness) {
  st->second_order_fields();
  if (with_adaptedness) st->adaptedness_fields();
  MonitorRow row;
  row.t = t;
  row.h_min = 1e300;
  row.h_max = -1e300;
  row.min_pair = 1e300;
  st->for_interior(margin, [&](size_t idx) {
    row.max_rho = std::max(row.max_rho, st->rho[idx]);
    row.h_min = std::min(row.h_min, st->mean[idx]);
    row.h_max = std::max(row.h_max, st->mean[idx]);
    const double a2 = (st->shape[idx] * st->shape[idx]).trace();
    row.max_a_norm = std::max(row.max_a_norm, std::sqrt(std::max(0.0, a2)));
    if (with_adaptedness) {
      row.sup_mu = std::max(row.sup_mu, st->mu_val[idx]);
      row.max_s_hat = std::max(row.max_s_hat, st->s_hat_norm[idx]);
      const MetricPoint mp(st->g[idx]);
      row.min_pair =
          std::min(row.min_pair, mp.inner(st->s_hat[idx], st->s_op[idx]));
    }
  });
  if (!with_adaptedness) row.min_pair = 0.0;
  times.push_back(t);
  states.push_back(std::move(st));
  monitors.push_back(row);
}

FlowTrace run_pde_flow(std::shared_ptr<const ParametrizedImmersion> start, int steps,
                       double dt, FlowDirection dir, TimeStepper stepper,
                       bool with_adaptedness, double stability_kappa) {
  FlowTrace trace;
  trace.direction = dir;
  auto im = start;
  trace.append(0.0, HypersurfaceState::fundamental_forms(im), with_adaptedness);
  double t = 0.0;
  for (int s = 0; s < steps; ++s) {
    im = step_immersion(*im, dt, dir, stepper, stability_kappa);
    t += dt;
    trace.append(t, HypersurfaceState::fundamental_forms(im), with_adaptedness);
  }
  return trace;
}

namespace {

double scal_of(const AmbientModel& m) { return m.scal(); }

// Reaction parts (everything except the Laplacian) of the shape-operator and
// normal-Jacobi evolutions.
Matrix shape_reaction(const HypersurfaceState& st, size_t idx, double scal,
                      const MetricPoint& mp) {
  const Matrix& a = st.shape[idx];
  const Matrix& j = st.jac[idx];
  const Matrix a2 = a * a;
  const double tr_a2 = a2.trace();
  Matrix r = (tr_a2 + j.trace()) * a;
  r += 2.0 * a2 * a;
  r -= 2.0 * tr_a2 * a;
  r -= (2.0 * scal / (st.n() + 1.0)) * a;
  r += a * j + j * a;
  r += 2.0 * curvature_mixed_trace(st.riem[idx], a, mp);
  return r;
}

Matrix jacobi_reaction(const HypersurfaceState& st, size_t idx, const MetricPoint& mp) {
  const Matrix& a = st.shape[idx];
  const Matrix& j = st.jac[idx];
  const Matrix a2 = a * a;
  Matrix r = st.mean[idx] * st.s_op[idx];
  r -= j * a2 + a2 * j;
  r += 2.0 * a2.trace() * j;
  r -= 2.0 * curvature_jacobi_trace(st.riem[idx], a, mp);
  r -= 2.0 * a2 * a2;
  r += 2.0 * (a2 * a).trace() * a;
  return r;
}

// Minus the reaction part of the commutator evolution, assembled exactly the
// way the evolution is derived: a bracket of the two constituent reactions
// minus the derivative cross-term.  This is the route that remains valid on
// hypersurfaces that are not curvature-adapted.
Matrix reaction_from_evolutions(const HypersurfaceState& st, size_t idx, double scal,
                                const MetricPoint& mp) {
  const int n = st.n();
  const Matrix ra = shape_reaction(st, idx, scal, mp);
  const Matrix rj = jacobi_reaction(st, idx, mp);
  Matrix cross = Matrix::Zero(n, n);
  const Matrix& f = mp.orthonormal_frame();
  for (int i = 0; i < n; ++i) {
    Matrix da = Matrix::Zero(n, n), dj = Matrix::Zero(n, n);
    for (int d = 0; d < n; ++d) {
      const double fd = f(d, i);
      if (fd == 0.0) continue;
      da += fd * st.grad_a[idx].slice_first(d);
      dj += fd * st.grad_j[idx].slice_first(d);
    }
    cross += commutator(da, dj);
  }
  return -(commutator(ra, st.jac[idx]) + commutator(st.shape[idx], rj) - 2.0 * cross);
}

}  // namespace

namespace {

double residual_at_point(const HypersurfaceState& mid, const HypersurfaceState& prv,
                         const HypersurfaceState& nxt, double dt2, EquationTag tag,
                         size_t idx, const AmbientModel& model, double sgn,
                         double seq) {
  const int n = mid.n();
  const MetricPoint mp(mid.g[idx]);
  const Matrix& a = mid.shape[idx];
  const Matrix& j = mid.jac[idx];
  const Matrix a2 = a * a;
  const double tr_a2 = a2.trace();
  const double tr_j = j.trace();
  double local = 0.0;
  switch (tag) {
    case EquationTag::Metric: {
      const Matrix dgdt = (nxt.g[idx] - prv.g[idx]) / dt2;
      local = (dgdt + seq * 2.0 * mid.mean[idx] * mid.h2[idx]).cwiseAbs().maxCoeff();
      break;
    }
    case EquationTag::Normal: {
      // Under the fixed orientation convention the forward flow satisfies
      // d xi / dt = + F_* grad H (sign flips with the flow direction).
      const Vector& x = mid.immersion().points()[idx];
      const std::vector<Matrix> chr = model.christoffel(x);
      const Vector fdot = sgn * mid.mean[idx] * mid.xi[idx];
      Vector dxi = (nxt.xi[idx] - prv.xi[idx]) / dt2;
      dxi += AmbientModel::christoffel_apply(chr, fdot, mid.xi[idx]);
      const Vector rhs = seq * (mid.tangents[idx] * mid.grad_mean[idx]);
      local = (dxi - rhs).cwiseAbs().maxCoeff();
      break;
    }
    case EquationTag::Shape: {
      const Matrix dadt = (nxt.shape[idx] - prv.shape[idx]) / dt2;
      Matrix rhs = mid.lap_a[idx];
      rhs += (tr_a2 + tr_j) * a;
      rhs += 2.0 * a2 * a;
      rhs -= 2.0 * tr_a2 * a;
      rhs -= (2.0 * scal_of(model) / (n + 1.0)) * a;
      rhs += a * j + j * a;
      rhs += 2.0 * curvature_mixed_trace(mid.riem[idx], a, mp);
      local = (dadt - seq * rhs).cwiseAbs().maxCoeff();
      break;
    }
    case EquationTag::Mean: {
      const double dhdt = (nxt.mean[idx] - prv.mean[idx]) / dt2;
      const double rhs = mid.lap_mean[idx] + (tr_a2 + tr_j) * mid.mean[idx];
      local = std::abs(dhdt - seq * rhs);
      break;
    }
    case EquationTag::Jacobi: {
      // The normal-curvature slot terms of the time derivative cancel the
      // matching terms of the traced second-derivative identity.
      const Matrix djdt = (nxt.jac[idx] - prv.jac[idx]) / dt2;
      Matrix rhs = mid.lap_j[idx];
      rhs += mid.mean[idx] * mid.s_op[idx];
      rhs -= j * a2 + a2 * j;
      rhs += 2.0 * tr_a2 * j;
      rhs -= 2.0 * curvature_jacobi_trace(mid.riem[idx], a, mp);
      rhs -= 2.0 * a2 * a2;
      rhs += 2.0 * (a2 * a).trace() * a;
      local = (djdt - seq * rhs).cwiseAbs().maxCoeff();
      break;
    }
    case EquationTag::Commutator: {
      const Matrix dsdt = (nxt.s_op[idx] - prv.s_op[idx]) / dt2;
      const Matrix p = reaction_from_evolutions(mid, idx, scal_of(model), mp);
      local = (dsdt - seq * (mid.lap_s[idx] - p)).cwiseAbs().maxCoeff();
      break;
    }
    case EquationTag::Gap: {
      const double drdt = (nxt.rho[idx] - prv.rho[idx]) / dt2;
      const Matrix p = reaction_from_evolutions(mid, idx, scal_of(model), mp);
      double grad_part = 0.0;
      const Matrix& f = mp.orthonormal_frame();
      for (int i = 0; i < n; ++i) {
        Matrix ds = Matrix::Zero(n, n);
        for (int d = 0; d < n; ++d) {
          const double fd = f(d, i);
          if (fd != 0.0) ds += fd * mid.grad_s[idx].slice_first(d);
        }
        grad_part += (ds * ds).trace();
      }
      const double rhs =
          mid.lap_rho[idx] + 2.0 * (p * mid.s_op[idx]).trace() + 2.0 * grad_part;
      local = std::abs(drdt - seq * rhs);
      break;
    }
  }
  return local;
}

}  // namespace

double residual_check(FlowTrace& trace, EquationTag tag, size_t t_index) {
  if (t_index == 0 || t_index + 1 >= trace.size())
    throw std::invalid_argument("residual_check: t_index needs both neighbours");
  HypersurfaceState& mid = *trace.states[t_index];
  const HypersurfaceState& prv = *trace.states[t_index - 1];
  const HypersurfaceState& nxt = *trace.states[t_index + 1];
  const double dt2 = trace.times[t_index + 1] - trace.times[t_index - 1];
  const AmbientModel& model = mid.immersion().model();
  const double sgn = trace.direction == FlowDirection::Forward ? -1.0 : 1.0;
  mid.second_order_fields();
  double res = 0.0;
  mid.for_interior(trace.margin, [&](size_t idx) {
    res = std::max(res, residual_at_point(mid, prv, nxt, dt2, tag, idx, model, sgn,
                                          -sgn));
  });
  return res;
}

double residual_check_at(FlowTrace& trace, EquationTag tag, size_t t_index,
                         size_t point_idx) {
  if (t_index == 0 || t_index + 1 >= trace.size())
    throw std::invalid_argument("residual_check_at: t_index needs both neighbours");
  HypersurfaceState& mid = *trace.states[t_index];
  mid.second_order_fields();
  const double sgn = trace.direction == FlowDirection::Forward ? -1.0 : 1.0;
  return residual_at_point(*trace.states[t_index], *trace.states[t_index - 1],
                           *trace.states[t_index + 1],
                           trace.times[t_index + 1] - trace.times[t_index - 1], tag,
                           point_idx, mid.immersion().model(), sgn, -sgn);
}

double pushforward_derivative_check(const FlowTrace& trace, int z_axis,
                                    size_t t_index) {
  if (t_index == 0 || t_index + 1 >= trace.size())
    throw std::invalid_argument("pushforward_derivative_check: t_index needs neighbours");
  const HypersurfaceState& mid = *trace.states[t_index];
  const HypersurfaceState& prv = *trace.states[t_index - 1];
  const HypersurfaceState& nxt = *trace.states[t_index + 1];
  if (mid.level() < 2)
    throw std::logic_error("pushforward_derivative_check: need covariant derivatives");
  const double dt2 = trace.times[t_index + 1] - trace.times[t_index - 1];
  const AmbientModel& model = mid.immersion().model();
  const double sgn = trace.direction == FlowDirection::Forward ? -1.0 : 1.0;

  double res = 0.0;
  mid.for_interior(trace.margin, [&](size_t idx) {
    const Vector& x = mid.immersion().points()[idx];
    const std::vector<Matrix> chr = model.christoffel(x);
    const Vector v = mid.tangents[idx].col(z_axis);
    const Vector fdot = sgn * mid.mean[idx] * mid.xi[idx];
    Vector dv = (nxt.tangents[idx].col(z_axis) - prv.tangents[idx].col(z_axis)) / dt2;
    dv += AmbientModel::christoffel_apply(chr, fdot, v);
    const double zh = (mid.g[idx] * mid.grad_mean[idx])(z_axis);
    Vector rhs = -zh * mid.xi[idx];
    rhs -= mid.mean[idx] * (mid.tangents[idx] * mid.shape[idx].col(z_axis));
    res = std::max(res, (dv - rhs).cwiseAbs().maxCoeff());
  });
  return res;
}

double default_rho_tol(const FlowTrace& trace) {
  double max_a = 0.0;
  for (const auto& m : trace.monitors) max_a = std::max(max_a, m.max_a_norm);
  const int n = trace.states.empty() ? 2 : trace.states.front()->n();
  return 1e-8 * n * (1.0 + max_a * max_a * max_a * max_a);
}

double trace_c1(const FlowTrace& trace, double r_norm) {
  BoundInputs b;
  b.n = trace.states.empty() ? 0 : trace.states.front()->n();
  for (const auto& m : trace.monitors) {
    b.c_a = std::max(b.c_a, m.max_a_norm);
    b.sup_mu = std::max(b.sup_mu, m.sup_mu);
  }
  b.r_norm = r_norm;
  return c1_constant(b);
}

GapMonitorReport gap_monitor(const FlowTrace& trace, double rho_tol) {
  GapMonitorReport rep;
  rep.rho_tol = rho_tol;
  for (const auto& m : trace.monitors) {
    rep.max_rho_overall = std::max(rep.max_rho_overall, m.max_rho);
    rep.max_sup_mu = std::max(rep.max_sup_mu, m.sup_mu);
    if (!rep.t_min && m.max_rho > rho_tol) rep.t_min = m.t;
  }
  if (!trace.monitors.empty()) rep.final_sup_mu = trace.monitors.back().sup_mu;
  // Heuristic divergence flag: sup mu grows monotonically near the end and
  // the last value dominates the early history.
  const size_t n = trace.monitors.size();
  if (n >= 4) {
    double early = 0.0;
    for (size_t i = 0; i < n / 2; ++i)
      early = std::max(early, std::abs(trace.monitors[i].sup_mu));
    const bool grows = trace.monitors[n - 1].sup_mu > trace.monitors[n - 2].sup_mu &&
                       trace.monitors[n - 2].sup_mu > trace.monitors[n - 3].sup_mu;
    rep.sup_mu_divergence_flag =
        grows && trace.monitors[n - 1].sup_mu > 5.0 * std::max(early, 1e-12);
  }
  return rep;
}

CorollaryEReport corollary_e_gate(const FlowTrace& trace, double rho_tol) {
  CorollaryEReport rep;
  rep.min_pair = 1e300;
  for (const auto& m : trace.monitors) {
    rep.min_pair = std::min(rep.min_pair, m.min_pair);
    rep.max_rho = std::max(rep.max_rho, m.max_rho);
  }
  if (trace.monitors.empty()) rep.min_pair = 0.0;
  rep.pairing_nonneg = rep.min_pair >= -1e-12;
  rep.rho_within_tol = rep.max_rho <= rho_tol;
  return rep;
}

}  // namespace curvflow
