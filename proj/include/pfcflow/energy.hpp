#pragma once

#include "pfcflow/grid.hpp"
#include "pfcflow/state.hpp"

namespace pfcflow {

/// Parameters of F[phi] = <phi/2 (lap^2 + 2a lap + alpha) phi + phi^4/4, 1>
/// and of its gradient flows.
struct ModelParams {
  double a = 1.0;
  double alpha = 0.9;
  /// Provenance only; alpha = 1 - epsilon when built through from_epsilon.
  double epsilon = 0.1;
  double mobility = 1e-3;
  double eta = 0.0;
  double c0 = 1e4;
  double m0 = 0.0;

  /// a = 1, alpha = 1 - epsilon.
  static ModelParams from_epsilon(double epsilon, double mobility);

  /// Throws UsageError unless mobility >= 0, eta >= 0, c0 > 0 and all finite.
  void validate() const;
};

/// K f = lap^2 f / 2 + a lap f + alpha f / 2, so that F_quad = <f, K f>.
void apply_linear_part(const Field& f, double a, double alpha, Field& out, Field& scratch);
Field apply_linear_part(const Field& f, const ModelParams& p);

/// <phi, K phi>
double quadratic_energy(const Field& phi, const ModelParams& p);

/// Discrete free energy of phi (no auxiliary variables).
double free_energy(const Field& phi, const ModelParams& p);

/// mu = lap^2 phi + 2a lap phi + alpha phi + phi^3
Field chemical_potential(const Field& phi, const ModelParams& p);

/// <phi^4 / 4, 1>
double quartic_integral(const Field& phi);

/// r = sqrt(<phi^4/4, 1> + C0)
double sav_r(const Field& phi, const ModelParams& p);
/// r - sqrt(C0), evaluated without cancellation.
double sav_r_excess(const Field& phi, const ModelParams& p);

/// g = phi^3 / (2 sqrt(<phi^4/4, 1> + C0))
Field sav_g(const Field& phi, const ModelParams& p);

/// zeta = sqrt(eta) (<phi, 1> - m0)
double penalty_zeta(const Field& phi, const ModelParams& p);

/// Auxiliary state consistent with phi for the given scheme.
AuxState make_aux(SchemeId scheme, const Field& phi, const ModelParams& p);

/// Scheme energy: <phi, K phi> plus <q^2/4, 1> (EQ) or r^2 - C0 (SAV),
/// plus zeta^2 / 2 for penalty models.
double discrete_energy(const StepperState& state, const ModelParams& p);

/// discrete_energy(after) - discrete_energy(before), summed term by term as
/// <x1 - x0, x1 + x0> so that small changes keep their relative accuracy.
double energy_change(const StepperState& before, const StepperState& after, const ModelParams& p);

}  // namespace pfcflow
