#include "pfcflow/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace pfcflow {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

}  // namespace

ScenarioParams ScenarioParams::crystallite(double epsilon) {
  ScenarioParams sp;
  sp.kind = ScenarioKind::Crystallite;
  sp.phi_bar = std::sqrt(epsilon) / 2.0;
  sp.amp = 0.8 * (sp.phi_bar + std::sqrt(15.0 * epsilon - 36.0 * sp.phi_bar * sp.phi_bar) / 3.0);
  sp.qlat = kSqrt3 / 2.0;
  sp.d0 = sp.lx() / 6.0;
  return sp;
}

ScenarioParams ScenarioParams::polycrystal(double epsilon) {
  ScenarioParams sp = crystallite(epsilon);
  sp.kind = ScenarioKind::Polycrystal;
  sp.centers = {{0.25 * sp.lx(), 0.25 * sp.ly()}, {0.75 * sp.lx(), 0.75 * sp.ly()}};
  sp.thetas = {0.0, kPi / 8.0};
  return sp;
}

double ScenarioParams::lx() const { return 2.0 * kPi * domain_mult_a / qlat; }
double ScenarioParams::ly() const { return kSqrt3 * kPi * domain_mult_b / qlat; }

Field ic_smooth(const GridSpec& grid) {
  Field f(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      f(i, j) = 0.5 + 0.5 * std::cos(kPi * grid.x(i)) * std::cos(kPi * grid.y(j));
    }
  }
  return f;
}

double hex_lattice(double x, double y, double q) noexcept {
  return std::cos(q * y / kSqrt3) * std::cos(q * x) - 0.5 * std::cos(2.0 * q * y / kSqrt3);
}

Field hex_lattice(const GridSpec& grid, const ScenarioParams& sp) {
  Field f(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) f(i, j) = hex_lattice(grid.x(i), grid.y(j), sp.qlat);
  }
  return f;
}

double bump(double r, double d0) noexcept {
  if (!(r <= d0)) return 0.0;
  const double s = r / d0;
  const double u = 1.0 - s * s;
  return u * u;
}

namespace {

Field bumps(const GridSpec& grid, const ScenarioParams& sp, const std::vector<Point>& centers,
            const std::vector<double>& thetas) {
  if (!(sp.d0 > 0.0)) throw UsageError("initial condition: d0 must be > 0");
  if (centers.size() != thetas.size()) throw UsageError("initial condition: one theta per center required");
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      const double dist = std::hypot(centers[a].x - centers[b].x, centers[a].y - centers[b].y);
      if (dist < 2.0 * sp.d0) throw UsageError("ic_polycrystal: crystallites overlap");
    }
  }
  Field f(grid, sp.phi_bar);
  for (int j = 0; j < grid.ny(); ++j) {
    const double y = grid.y(j);
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double w = bump(std::hypot(x - centers[c].x, y - centers[c].y), sp.d0);
        if (w == 0.0) continue;
        const double ct = std::cos(thetas[c]);
        const double st = std::sin(thetas[c]);
        // Rotate about the bump center so the lattice phase there is independent of theta.
        const double u = x - centers[c].x, v = y - centers[c].y;
        f(i, j) += w * sp.amp * hex_lattice(centers[c].x + ct * u - st * v, centers[c].y + st * u + ct * v, sp.qlat);
      }
    }
  }
  return f;
}

}  // namespace

Field ic_crystallite(const GridSpec& grid, const ScenarioParams& sp) {
  Point c{grid.x0() + 0.5 * grid.lx(), grid.y0() + 0.5 * grid.ly()};
  if (!sp.centers.empty()) c = sp.centers.front();
  return bumps(grid, sp, {c}, {0.0});
}

Field ic_polycrystal(const GridSpec& grid, const ScenarioParams& sp) {
  if (sp.centers.empty()) throw UsageError("ic_polycrystal: no centers");
  return bumps(grid, sp, sp.centers, sp.thetas);
}

Field initial_field(const GridSpec& grid, const ScenarioParams& sp) {
  switch (sp.kind) {
    case ScenarioKind::Smooth: return ic_smooth(grid);
    case ScenarioKind::Crystallite: return ic_crystallite(grid, sp);
    case ScenarioKind::Polycrystal: return ic_polycrystal(grid, sp);
  }
  throw UsageError("initial_field: unknown scenario kind");
}

namespace {

int scaled_count(int n, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw UsageError("preset: scale must be positive");
  const double m = n / scale;
  const int r = static_cast<int>(std::lround(m));
  if (std::abs(m - r) > 1e-9 || r < 4) {
    throw UsageError("preset: scale " + std::to_string(scale) + " does not divide the grid count " +
                     std::to_string(n) + " into an integer >= 4");
  }
  return r;
}

}  // namespace

Preset preset(std::string_view name, double scale) {
  const int n = scaled_count(256, scale);
  if (name == "accuracy") {
    ModelParams p = ModelParams::from_epsilon(0.1, 1e-3);
    p.eta = 1e3;
    p.c0 = 1e4;
    GridSpec g(n, n, 1.0, 1.0);
    ScenarioParams sp;
    p.m0 = integrate(ic_smooth(g));
    return Preset{"accuracy", g, p, sp, {0.05, 1.0}};
  }
  if (name == "crystal" || name == "polycrystal") {
    const bool poly = name == "polycrystal";
    ScenarioParams sp = poly ? ScenarioParams::polycrystal() : ScenarioParams::crystallite();
    ModelParams p = ModelParams::from_epsilon(0.325, 1.0);
    p.eta = 1e3;
    p.c0 = 1e4;
    GridSpec g(n, n, sp.lx(), sp.ly());
    p.m0 = integrate(initial_field(g, sp));
    return Preset{std::string(name), g, p, sp, {1e-3, poly ? 400.0 : 150.0}};
  }
  throw UsageError("unknown preset '" + std::string(name) + "' (expected accuracy, crystal or polycrystal)");
}

}  // namespace pfcflow
