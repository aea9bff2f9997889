#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "pfcflow/energy.hpp"
#include "pfcflow/linsolve.hpp"
#include "pfcflow/state.hpp"

namespace pfcflow {

/// A step's linear solve missed its tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const noexcept { return report_; }

private:
  SolveReport report_;
};

struct StepReport {
  SolveReport solver;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double mass = 0.0;
};

/// 1.5 curr - 0.5 prev
double extrapolate(double prev, double curr) noexcept;
Field extrapolate(const Field& prev, const Field& curr);

/// phi_prev = phi = phi0, n = 0, t = 0, auxiliaries consistent with phi0.
StepperState init_state(SchemeId scheme, const Field& phi0, const ModelParams& p);

/// Linear system of one step, written for the increment delta = phi^{n+1} - phi^n.
///
/// The midpoint chemical potential is affine in delta:
///   mu = mu0 + J delta + sum_j <c_j, delta> e_j
/// with J = K (+ q-bar^2/4 for EQ). The step enforces
///   delta = -dt M G (mu - P mu),
/// G = I (Allen-Cahn) or -lap (Cahn-Hilliard), P the mean projection for
/// Lagrange models and zero otherwise.
struct StepSystem {
  BorderedSystem system;
  Field mu0;
  /// Local couplings of mu (SAV and penalty terms) as (c_j, e_j).
  std::vector<Coupling> mu_couplings;
  std::optional<Field> q_bar;
  std::optional<Field> g_bar;
  bool first_order = false;
};

StepSystem assemble_step(const StepperState& state, const ModelParams& p, double dt);

/// mu^{n+1/2} for a given increment.
Field midpoint_potential(const StepSystem& sys, const StepperState& state, const ModelParams& p,
                         const Field& delta);

/// <M, mu> / <M, 1> for constant M.
double lagrange_multiplier(const Field& mu);

/// First step (n = 0) with extrapolants frozen at their current values.
std::pair<StepperState, StepReport> bootstrap(const StepperState& state, const ModelParams& p, double dt,
                                              const SolverOptions& opts = {});

/// Second-order steps; require n >= 1 and a matching scheme.
std::pair<StepperState, StepReport> step_ac_eq(const StepperState& state, const ModelParams& p, double dt,
                                               const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_ac_sav(const StepperState& state, const ModelParams& p, double dt,
                                                const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_ch_eq(const StepperState& state, const ModelParams& p, double dt,
                                               const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_ch_sav(const StepperState& state, const ModelParams& p, double dt,
                                                const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_acp_eq(const StepperState& state, const ModelParams& p, double dt,
                                                const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_acp_sav(const StepperState& state, const ModelParams& p, double dt,
                                                 const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_acl_eq(const StepperState& state, const ModelParams& p, double dt,
                                                const SolverOptions& opts = {});
std::pair<StepperState, StepReport> step_acl_sav(const StepperState& state, const ModelParams& p, double dt,
                                                 const SolverOptions& opts = {});

/// bootstrap when n = 0, otherwise the scheme's step.
std::pair<StepperState, StepReport> advance(const StepperState& state, const ModelParams& p, double dt,
                                            const SolverOptions& opts = {});

}  // namespace pfcflow
