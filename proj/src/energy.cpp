#include "pfcflow/energy.hpp"

#include <cmath>
#include <string>

namespace pfcflow {

ModelParams ModelParams::from_epsilon(double epsilon, double mobility) {
  ModelParams p;
  p.a = 1.0;
  p.alpha = 1.0 - epsilon;
  p.epsilon = epsilon;
  p.mobility = mobility;
  return p;
}

void ModelParams::validate() const {
  for (double v : {a, alpha, epsilon, mobility, eta, c0, m0}) {
    if (!std::isfinite(v)) throw UsageError("ModelParams: non-finite parameter");
  }
  if (mobility < 0.0) throw UsageError("ModelParams: mobility must be >= 0");
  if (eta < 0.0) throw UsageError("ModelParams: eta must be >= 0");
  if (!(c0 > 0.0)) throw UsageError("ModelParams: c0 must be > 0");
}

void apply_linear_part(const Field& f, double a, double alpha, Field& out, Field& scratch) {
  laplacian_into(f, scratch);
  laplacian_into(scratch, out);
  for (std::size_t k = 0; k < f.size(); ++k) {
    out[k] = 0.5 * out[k] + a * scratch[k] + 0.5 * alpha * f[k];
  }
}

Field apply_linear_part(const Field& f, const ModelParams& p) {
  Field out(f.grid());
  Field scratch(f.grid());
  apply_linear_part(f, p.a, p.alpha, out, scratch);
  return out;
}

double quadratic_energy(const Field& phi, const ModelParams& p) {
  return inner(phi, apply_linear_part(phi, p));
}

double quartic_integral(const Field& phi) {
  double sum = 0.0;
  for (double v : phi.values()) {
    const double v2 = v * v;
    sum += v2 * v2;
  }
  return 0.25 * phi.grid().cell_area() * sum;
}

double free_energy(const Field& phi, const ModelParams& p) {
  return quadratic_energy(phi, p) + quartic_integral(phi);
}

Field chemical_potential(const Field& phi, const ModelParams& p) {
  Field lap = laplacian(phi);
  Field mu = laplacian(lap);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double v = phi[k];
    mu[k] += 2.0 * p.a * lap[k] + p.alpha * v + v * v * v;
  }
  return mu;
}

double sav_r(const Field& phi, const ModelParams& p) {
  return std::sqrt(quartic_integral(phi) + p.c0);
}

double sav_r_excess(const Field& phi, const ModelParams& p) {
  const double s = quartic_integral(phi);
  return s / (std::sqrt(s + p.c0) + std::sqrt(p.c0));
}

Field sav_g(const Field& phi, const ModelParams& p) {
  const double denom = 2.0 * sav_r(phi, p);
  Field g(phi.grid());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double v = phi[k];
    g[k] = v * v * v / denom;
  }
  return g;
}

double penalty_zeta(const Field& phi, const ModelParams& p) {
  if (p.eta < 0.0) throw UsageError("penalty_zeta: eta must be >= 0");
  return std::sqrt(p.eta) * (integrate(phi) - p.m0);
}

AuxState make_aux(SchemeId scheme, const Field& phi, const ModelParams& p) {
  AuxState aux;
  aux.kind = aux_kind_of(scheme);
  aux.sqrt_c0 = std::sqrt(p.c0);
  if (aux.kind == AuxKind::EqField) {
    aux.q = hadamard(phi, phi);
  } else {
    aux.r_excess = sav_r_excess(phi, p);
  }
  if (constraint_of(scheme) == Constraint::Penalty) aux.zeta = penalty_zeta(phi, p);
  return aux;
}

double discrete_energy(const StepperState& state, const ModelParams& p) {
  double e = quadratic_energy(state.phi, p);
  if (state.aux.kind == AuxKind::EqField) {
    const Field& q = state.aux.q.value();
    double sum = 0.0;
    for (double v : q.values()) sum += v * v;
    e += 0.25 * q.grid().cell_area() * sum;
  } else {
    e += state.aux.r_energy();
  }
  if (state.aux.zeta) e += 0.5 * (*state.aux.zeta) * (*state.aux.zeta);
  return e;
}

double energy_change(const StepperState& before, const StepperState& after, const ModelParams& p) {
  if (before.aux.kind != after.aux.kind || before.aux.zeta.has_value() != after.aux.zeta.has_value()) {
    throw UsageError("energy_change: states of different schemes");
  }
  require_same_grid(before.phi.grid(), after.phi.grid(), "energy_change");
  const Field dphi = after.phi - before.phi;
  double e = inner(dphi, apply_linear_part(before.phi + after.phi, p));
  if (before.aux.kind == AuxKind::EqField) {
    const Field& q0 = before.aux.q.value();
    const Field& q1 = after.aux.q.value();
    double sum = 0.0;
    for (std::size_t k = 0; k < q0.size(); ++k) sum += (q1[k] - q0[k]) * (q1[k] + q0[k]);
    e += 0.25 * q0.grid().cell_area() * sum;
  } else {
    const double s0 = before.aux.r_excess, s1 = after.aux.r_excess;
    e += (s1 - s0) * (s1 + s0 + 2.0 * before.aux.sqrt_c0);
  }
  if (before.aux.zeta) {
    const double z0 = *before.aux.zeta, z1 = *after.aux.zeta;
    e += 0.5 * (z1 - z0) * (z1 + z0);
  }
  return e;
}

}  // namespace pfcflow
