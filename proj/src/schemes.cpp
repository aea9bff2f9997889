#include "pfcflow/schemes.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace pfcflow {

double extrapolate(double prev, double curr) noexcept { return curr + 0.5 * (curr - prev); }

Field extrapolate(const Field& prev, const Field& curr) {
  require_same_grid(prev.grid(), curr.grid(), "extrapolate");
  Field out(curr.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = curr[k] + 0.5 * (curr[k] - prev[k]);
  return out;
}

StepperState init_state(SchemeId scheme, const Field& phi0, const ModelParams& p) {
  p.validate();
  if (!phi0.all_finite()) throw UsageError("init_state: initial field is not finite");
  return StepperState{scheme, phi0, phi0, make_aux(scheme, phi0, p), 0.0, 0, 0.0};
}

double lagrange_multiplier(const Field& mu) { return integrate(mu) / mu.grid().area(); }

namespace {

Field ones(const GridSpec& g) { return Field(g, 1.0); }

// f - P f
Field project(const Field& f, bool lagrange) {
  if (!lagrange) return f;
  Field out = f;
  const double m = integrate(f) / f.grid().area();
  for (double& v : out.values()) v -= m;
  return out;
}

// G f, with G = I or -lap.
Field outer(const Field& f, bool ch) {
  if (!ch) return f;
  Field out = laplacian(f);
  out *= -1.0;
  return out;
}

// J f = K f (+ q-bar^2/4 f)
Field local_part(const Field& f, const std::optional<Field>& q_bar, const ModelParams& p) {
  Field out = apply_linear_part(f, p);
  if (q_bar) {
    for (std::size_t k = 0; k < f.size(); ++k) out[k] += 0.25 * (*q_bar)[k] * (*q_bar)[k] * f[k];
  }
  return out;
}

}  // namespace

StepSystem assemble_step(const StepperState& state, const ModelParams& p, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("step: dt must be positive and finite");
  const SchemeId s = state.scheme;
  const GridSpec& g = state.phi.grid();
  const bool ch = family_of(s) == Family::CahnHilliard;
  const bool eq = aux_kind_of(s) == AuxKind::EqField;
  const Constraint con = constraint_of(s);
  const bool lag = con == Constraint::Lagrange;
  const bool first = state.n == 0;
  const double tm = dt * p.mobility;

  Field mu0 = apply_linear_part(state.phi, p);
  mu0 *= 2.0;
  std::vector<Coupling> mu_couplings;
  std::optional<Field> q_bar;
  std::optional<Field> g_bar;

  if (eq) {
    if (state.aux.kind != AuxKind::EqField || !state.aux.q) throw UsageError("step: EQ scheme without q");
    Field qb = first ? state.phi : extrapolate(state.phi_prev, state.phi);
    qb *= 2.0;
    const Field& q = *state.aux.q;
    for (std::size_t k = 0; k < mu0.size(); ++k) mu0[k] += 0.5 * q[k] * qb[k];
    q_bar = std::move(qb);
  } else {
    if (state.aux.kind != AuxKind::SavScalar) throw UsageError("step: SAV scheme without r");
    Field gb = first ? sav_g(state.phi, p) : extrapolate(sav_g(state.phi_prev, p), sav_g(state.phi, p));
    mu0.axpy(2.0 * state.aux.r(), gb);
    mu_couplings.push_back({gb, gb});
    g_bar = std::move(gb);
  }
  if (con == Constraint::Penalty) {
    if (!state.aux.zeta) throw UsageError("step: penalty scheme without zeta");
    const double se = std::sqrt(p.eta);
    for (double& v : mu0.values()) v += se * (*state.aux.zeta);
    mu_couplings.push_back({ones(g), Field(g, 0.5 * p.eta)});
  }

  FrozenCoefficients frozen{q_bar};
  LinearOperator A = build_operator(s, g, frozen, p, dt);

  Field b = outer(project(mu0, lag), ch);
  b *= -tm;

  std::vector<Coupling> couplings;
  for (const Coupling& cp : mu_couplings) {
    Field d = outer(project(cp.d, lag), ch);
    d *= tm;
    couplings.push_back({cp.c, std::move(d)});
  }
  if (lag && p.mobility > 0.0) {
    // -dt M P J delta, written as <M J 1, delta> times a constant field.
    Field c = local_part(ones(g), q_bar, p);
    c *= p.mobility;
    couplings.push_back({std::move(c), Field(g, -tm / (p.mobility * g.area()))});
  }

  return StepSystem{BorderedSystem{std::move(A), std::move(couplings), std::move(b)}, std::move(mu0),
                    std::move(mu_couplings), std::move(q_bar), std::move(g_bar), first};
}

Field midpoint_potential(const StepSystem& sys, const StepperState& state, const ModelParams& p,
                         const Field& delta) {
  require_same_grid(state.phi.grid(), delta.grid(), "midpoint_potential");
  Field mu = sys.mu0;
  mu += local_part(delta, sys.q_bar, p);
  for (const Coupling& cp : sys.mu_couplings) mu.axpy(inner(cp.c, delta), cp.d);
  return mu;
}

namespace {

std::pair<StepperState, StepReport> take_step(const StepperState& state, const ModelParams& p, double dt,
                                              const SolverOptions& opts) {
  const StepSystem sys = assemble_step(state, p, dt);
  BorderedSolution sol = solve_bordered(sys.system, opts);
  if (!sol.report.converged || !sol.x.all_finite()) {
    std::ostringstream msg;
    msg << to_string(state.scheme) << " step " << state.n << ": linear solve did not converge (residual "
        << sol.report.final_residual << " after " << sol.report.iterations << " iterations)";
    throw SolverError(msg.str(), sol.report);
  }
  const Field& delta = sol.x;

  StepperState next = state;
  next.phi_prev = state.phi;
  next.phi += delta;
  if (sys.q_bar) {
    Field& q = *next.aux.q;
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += (*sys.q_bar)[k] * delta[k];
  }
  if (sys.g_bar) next.aux.r_excess += inner(*sys.g_bar, delta);
  if (next.aux.zeta) *next.aux.zeta += std::sqrt(p.eta) * integrate(delta);
  next.t = state.t + dt;
  next.n = state.n + 1;
  next.last_L = constraint_of(state.scheme) == Constraint::Lagrange
                    ? lagrange_multiplier(midpoint_potential(sys, state, p, delta))
                    : 0.0;

  StepReport rep;
  rep.solver = sol.report;
  rep.energy_before = discrete_energy(state, p);
  rep.energy_after = discrete_energy(next, p);
  rep.mass = integrate(next.phi);
  return {std::move(next), rep};
}

std::pair<StepperState, StepReport> checked_step(SchemeId expected, const StepperState& state,
                                                 const ModelParams& p, double dt, const SolverOptions& opts) {
  if (state.scheme != expected) {
    throw UsageError("step_" + std::string(to_string(expected)) + " called on a " +
                     std::string(to_string(state.scheme)) + " state");
  }
  if (state.n < 1) throw UsageError("second-order step called before bootstrap (n = 0)");
  return take_step(state, p, dt, opts);
}

}  // namespace

std::pair<StepperState, StepReport> bootstrap(const StepperState& state, const ModelParams& p, double dt,
                                              const SolverOptions& opts) {
  if (state.n != 0) throw UsageError("bootstrap called with n = " + std::to_string(state.n));
  return take_step(state, p, dt, opts);
}

std::pair<StepperState, StepReport> step_ac_eq(const StepperState& s, const ModelParams& p, double dt,
                                               const SolverOptions& o) {
  return checked_step(SchemeId::AcEq, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_ac_sav(const StepperState& s, const ModelParams& p, double dt,
                                                const SolverOptions& o) {
  return checked_step(SchemeId::AcSav, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_ch_eq(const StepperState& s, const ModelParams& p, double dt,
                                               const SolverOptions& o) {
  return checked_step(SchemeId::ChEq, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_ch_sav(const StepperState& s, const ModelParams& p, double dt,
                                                const SolverOptions& o) {
  return checked_step(SchemeId::ChSav, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_acp_eq(const StepperState& s, const ModelParams& p, double dt,
                                                const SolverOptions& o) {
  return checked_step(SchemeId::AcpEq, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_acp_sav(const StepperState& s, const ModelParams& p, double dt,
                                                 const SolverOptions& o) {
  return checked_step(SchemeId::AcpSav, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_acl_eq(const StepperState& s, const ModelParams& p, double dt,
                                                const SolverOptions& o) {
  return checked_step(SchemeId::AclEq, s, p, dt, o);
}
std::pair<StepperState, StepReport> step_acl_sav(const StepperState& s, const ModelParams& p, double dt,
                                                 const SolverOptions& o) {
  return checked_step(SchemeId::AclSav, s, p, dt, o);
}

std::pair<StepperState, StepReport> advance(const StepperState& state, const ModelParams& p, double dt,
                                            const SolverOptions& opts) {
  if (state.n == 0) return bootstrap(state, p, dt, opts);
  return take_step(state, p, dt, opts);
}

}  // namespace pfcflow
