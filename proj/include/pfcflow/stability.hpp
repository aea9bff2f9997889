#pragma once

#include <stdexcept>
#include <string_view>

#include "pfcflow/energy.hpp"
#include "pfcflow/linsolve.hpp"
#include "pfcflow/state.hpp"

namespace pfcflow {

enum class StabilityModel { AllenCahn, CahnHilliard, Penalty, Lagrange };

/// "AC", "CH", "AC-P", "AC-L"
std::string_view to_string(StabilityModel m) noexcept;
StabilityModel parse_stability_model(std::string_view name);
/// Model a scheme integrates.
StabilityModel model_of(SchemeId s) noexcept;

/// Perturbation a cos(kx) cos(ly) of the uniform state phi_ss on [-pi, pi]^2.
struct StabilityQuery {
  StabilityModel model = StabilityModel::AllenCahn;
  int k = 0;
  int l = 0;
  double phi_ss = 0.0;
  ModelParams p;
};

/// Linearized growth coefficient lambda in da/dt = lambda a.
double growth_rate(const StabilityQuery& q);

/// Raised when no exponential rate can be fitted.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RateMeasurement {
  double rate = 0.0;
  /// The mode amplitude changed sign during the fitted window.
  bool oscillating = false;
  /// Projected amplitude at the first and last step.
  double amplitude_first = 0.0;
  double amplitude_last = 0.0;
};

/// Runs the scheme from phi_ss + amplitude cos(kx) cos(ly) on [-pi, pi]^2 with an
/// n x n grid and least-squares fits log|a(t)| over the second half of the
/// steps. m0 is taken as the mass of phi_ss.
RateMeasurement measure_rate(SchemeId scheme, const StabilityQuery& q, double amplitude, double dt, int steps,
                             int n = 64, const SolverOptions& opts = {});

}  // namespace pfcflow
