#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pfcflow/energy.hpp"
#include "pfcflow/grid.hpp"

namespace pfcflow {

enum class ScenarioKind { Smooth, Crystallite, Polycrystal };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::Smooth;
  double phi_bar = 0.0;
  double amp = 0.0;
  /// Lattice wavenumber.
  double qlat = 0.0;
  double d0 = 0.0;
  /// Bump centers; empty means the domain center (crystallite only).
  std::vector<Point> centers;
  /// Lattice rotation per center.
  std::vector<double> thetas;
  /// Domain is [0, 2 pi mult_a / q] x [0, sqrt(3) pi mult_b / q].
  int domain_mult_a = 10;
  int domain_mult_b = 12;

  /// Single hexagonal crystallite at the domain center.
  static ScenarioParams crystallite(double epsilon = 0.325);
  /// Two crystallites at the quarter and three-quarter points, rotated by 0 and pi/8.
  static ScenarioParams polycrystal(double epsilon = 0.325);

  double lx() const;
  double ly() const;
};

/// 1/2 + 1/2 cos(pi x) cos(pi y)
Field ic_smooth(const GridSpec& grid);

/// cos(q y / sqrt 3) cos(q x) - cos(2 q y / sqrt 3) / 2
double hex_lattice(double x, double y, double q) noexcept;
Field hex_lattice(const GridSpec& grid, const ScenarioParams& sp);

/// (1 - (r/d0)^2)^2 inside r <= d0, else 0.
double bump(double r, double d0) noexcept;

/// phi_bar + w(|r - r0|) A phi_s(r)
Field ic_crystallite(const GridSpec& grid, const ScenarioParams& sp);

/// Like ic_crystallite with several bumps; inside bump i the lattice is
/// sampled at c + R(t) (r - c), c the bump center.
/// Throws UsageError when two bumps overlap.
Field ic_polycrystal(const GridSpec& grid, const ScenarioParams& sp);

/// Dispatch on sp.kind.
Field initial_field(const GridSpec& grid, const ScenarioParams& sp);

struct RunSettings {
  double dt = 0.0;
  double t_end = 0.0;
};

struct Preset {
  std::string name;
  GridSpec grid;
  ModelParams params;
  ScenarioParams scenario;
  RunSettings run;
};

/// "accuracy", "crystal" or "polycrystal". scale divides the grid counts.
/// params.m0 is set to the mass of the preset's initial field.
Preset preset(std::string_view name, double scale = 1.0);

}  // namespace pfcflow
