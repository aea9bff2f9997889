#include "pfcflow/stability.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pfcflow/schemes.hpp"

namespace pfcflow {

std::string_view to_string(StabilityModel m) noexcept {
  switch (m) {
    case StabilityModel::AllenCahn: return "AC";
    case StabilityModel::CahnHilliard: return "CH";
    case StabilityModel::Penalty: return "AC-P";
    case StabilityModel::Lagrange: return "AC-L";
  }
  return "?";
}

StabilityModel parse_stability_model(std::string_view name) {
  for (StabilityModel m : {StabilityModel::AllenCahn, StabilityModel::CahnHilliard, StabilityModel::Penalty,
                           StabilityModel::Lagrange}) {
    if (to_string(m) == name) return m;
  }
  throw UsageError("unknown stability model '" + std::string(name) + "' (expected AC, CH, AC-P or AC-L)");
}

StabilityModel model_of(SchemeId s) noexcept {
  if (family_of(s) == Family::CahnHilliard) return StabilityModel::CahnHilliard;
  switch (constraint_of(s)) {
    case Constraint::Penalty: return StabilityModel::Penalty;
    case Constraint::Lagrange: return StabilityModel::Lagrange;
    default: return StabilityModel::AllenCahn;
  }
}

double growth_rate(const StabilityQuery& q) {
  if (q.k < 0 || q.l < 0) throw UsageError("growth_rate: wavenumbers must be >= 0");
  const double m = q.p.mobility;
  const double s = static_cast<double>(q.k) * q.k + static_cast<double>(q.l) * q.l;
  const double local = q.p.alpha + 3.0 * q.phi_ss * q.phi_ss;
  const double bracket = s * s - 2.0 * q.p.a * s + local;
  const bool zero_mode = q.k == 0 && q.l == 0;
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  switch (q.model) {
    case StabilityModel::AllenCahn:
      return -m * bracket;
    case StabilityModel::CahnHilliard:
      return -m * bracket * s;
    case StabilityModel::Penalty:
      return -m * bracket - (zero_mode ? m * four_pi2 * q.p.eta : 0.0);
    case StabilityModel::Lagrange:
      // M <alpha + 3 phi^2> / <M> with constant M.
      return -m * bracket + (zero_mode && m > 0.0 ? local : 0.0);
  }
  throw UsageError("growth_rate: unknown model");
}

RateMeasurement measure_rate(SchemeId scheme, const StabilityQuery& q, double amplitude, double dt, int steps,
                             int n, const SolverOptions& opts) {
  if (model_of(scheme) != q.model) {
    throw UsageError("measure_rate: scheme " + std::string(to_string(scheme)) + " does not integrate model " +
                     std::string(to_string(q.model)));
  }
  if (steps < 4) throw UsageError("measure_rate: need at least 4 steps");
  if (q.k < 0 || q.l < 0) throw UsageError("measure_rate: wavenumbers must be >= 0");
  const double pi = std::numbers::pi;
  const GridSpec g(n, n, 2.0 * pi, 2.0 * pi, -pi, -pi);

  Field mode(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) mode(i, j) = std::cos(q.k * g.x(i)) * std::cos(q.l * g.y(j));
  }
  const double mode_norm2 = inner(mode, mode);

  ModelParams p = q.p;
  p.m0 = q.phi_ss * g.area();
  Field phi0(g, q.phi_ss);
  phi0.axpy(amplitude, mode);

  auto project = [&](const Field& phi) {
    Field dev = phi;
    for (double& v : dev.values()) v -= q.phi_ss;
    return inner(dev, mode) / mode_norm2;
  };

  StepperState st = init_state(scheme, phi0, p);
  std::vector<double> amps;
  amps.reserve(steps + 1);
  amps.push_back(project(st.phi));
  if (!(std::abs(amps[0]) > 0.0)) throw FitError("measure_rate: no signal in the perturbed mode");
  for (int s = 0; s < steps; ++s) {
    st = advance(st, p, dt, opts).first;
    amps.push_back(project(st.phi));
  }

  RateMeasurement out;
  out.amplitude_first = amps.front();
  out.amplitude_last = amps.back();
  const int first = steps / 2;
  double st_sum = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (int s = first; s <= steps; ++s) {
    const double a = amps[s];
    if (!(std::abs(a) > 0.0) || !std::isfinite(a)) throw FitError("measure_rate: mode amplitude underflowed");
    if (s > first && (a > 0.0) != (amps[s - 1] > 0.0)) out.oscillating = true;
    const double t = s * dt;
    const double y = std::log(std::abs(a));
    st_sum += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  const double denom = count * stt - st_sum * st_sum;
  out.rate = (count * sty - st_sum * sy) / denom;
  if (!std::isfinite(out.rate)) throw FitError("measure_rate: fit is not finite");
  return out;
}

}  // namespace pfcflow
