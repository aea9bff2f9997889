#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "pfcflow/energy.hpp"
#include "pfcflow/scenarios.hpp"
#include "support.hpp"

using namespace pfcflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Frozen by tests/oracles/energy_oracle.py.
constexpr double kSmoothEnergy256 = 11.124030463477354;
constexpr double kSmoothEnergy1024 = 11.12430246133757;

ModelParams accuracy_params() {
  ModelParams p = ModelParams::from_epsilon(0.1, 1e-3);
  p.c0 = 1e4;
  return p;
}

Field smooth_random(const GridSpec& g, unsigned seed) {
  // Smooth enough that the O(delta^2) centered-difference error stays small.
  Field f(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int m = 1; m <= 3; ++m) {
    const double c = u(rng), kx = m * std::numbers::pi, ky = (4 - m) * std::numbers::pi;
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) f(i, j) += c * std::cos(kx * g.x(i)) * std::cos(ky * g.y(j));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("model params map epsilon and validate", "[energy]") {
  const ModelParams p = ModelParams::from_epsilon(0.325, 1.0);
  CHECK(p.a == 1.0);
  CHECK(p.alpha == 1.0 - 0.325);
  CHECK_NOTHROW(p.validate());
  ModelParams bad = p;
  bad.mobility = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = p;
  bad.c0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = p;
  bad.eta = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("free energy of constants", "[energy]") {
  const GridSpec g(16, 16, 1.0, 1.0);
  const ModelParams p = accuracy_params();
  CHECK(free_energy(Field(g), p) == 0.0);
  CHECK_THAT(free_energy(Field(g, 1.0), p), WithinAbs(0.70, 1e-12));
  const GridSpec r(8, 12, 2.0, 3.0);
  const double c = -0.4;
  CHECK_THAT(free_energy(Field(r, c), p), WithinRel(6.0 * (0.9 * c * c / 2 + std::pow(c, 4) / 4), 1e-12));
}

TEST_CASE("free energy of the smooth accuracy field", "[energy]") {
  const ModelParams p = accuracy_params();
  const GridSpec g(256, 256, 1.0, 1.0);
  const double e = free_energy(ic_smooth(g), p);
  CHECK_THAT(e, WithinRel(kSmoothEnergy256, 1e-12));
  // Cross-check against the refined-grid oracle and the continuum value.
  const double continuum = std::pow(std::numbers::pi, 4) / 8 - std::pow(std::numbers::pi, 2) / 8 +
                           0.9 * 5.0 / 32.0 + 169.0 / 4096.0;
  CHECK_THAT(e, WithinRel(kSmoothEnergy1024, 3e-5));
  const GridSpec fine(1024, 1024, 1.0, 1.0);
  CHECK_THAT(free_energy(ic_smooth(fine), p), WithinRel(kSmoothEnergy1024, 1e-12));
  CHECK((continuum - kSmoothEnergy256) / (continuum - kSmoothEnergy1024) == Catch::Approx(16.0).epsilon(0.01));
}

TEST_CASE("chemical potential of simple fields", "[energy]") {
  const GridSpec g(8, 8, 1.0, 1.0);
  const ModelParams p = accuracy_params();
  CHECK(max_abs(chemical_potential(Field(g), p)) == 0.0);
  const double c = 0.6;
  const Field mu = chemical_potential(Field(g, c), p);
  for (double v : mu.values()) CHECK_THAT(v, WithinAbs(0.9 * c + c * c * c, 1e-14));
}

TEST_CASE("chemical potential is the variational derivative of the free energy", "[energy]") {
  const GridSpec g(32, 32, 1.0, 1.0);
  const ModelParams p = accuracy_params();
  const Field phi = smooth_random(g, 5);
  const Field mu = chemical_potential(phi, p);
  const double delta = 1e-6;
  for (unsigned s = 0; s < 20; ++s) {
    const Field v = smooth_random(g, 1000 + s);
    Field plus = phi, minus = phi;
    plus.axpy(delta, v);
    minus.axpy(-delta, v);
    const double fd = (free_energy(plus, p) - free_energy(minus, p)) / (2 * delta);
    CHECK(test::rel_diff(inner(mu, v), fd) <= 1e-5);
  }
}

TEST_CASE("SAV auxiliary quantities", "[energy]") {
  const GridSpec g(16, 16, 1.0, 1.0);
  const ModelParams p = accuracy_params();
  CHECK(sav_r(Field(g), p) == 100.0);
  CHECK(max_abs(sav_g(Field(g), p)) == 0.0);
  CHECK(sav_r_excess(Field(g), p) == 0.0);

  const Field g1 = sav_g(Field(g, 1.0), p);
  for (double v : g1.values()) CHECK_THAT(v, WithinRel(0.004999937501171851, 1e-14));

  const Field phi = test::random_field(g, 3, -2.0, 2.0);
  CHECK_THAT(sav_r_excess(phi, p), WithinRel(sav_r(phi, p) - 100.0, 1e-9));
  const Field gphi = sav_g(phi, p);
  double denom_check = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (phi[k] != 0.0) denom_check = std::max(denom_check, gphi[k] / std::pow(phi[k], 3));
  }
  CHECK(denom_check <= 1.0 / (2.0 * std::sqrt(p.c0)));

  ModelParams small = p;
  small.c0 = 1.0;
  const Field psi = test::random_field(g, 4);
  const Field gp = sav_g(psi, small);
  const double delta = 1e-6;
  for (unsigned s = 0; s < 5; ++s) {
    const Field v = test::random_field(g, 40 + s);
    Field plus = psi, minus = psi;
    plus.axpy(delta, v);
    minus.axpy(-delta, v);
    const double fd = (sav_r(plus, small) - sav_r(minus, small)) / (2 * delta);
    CHECK(test::rel_diff(inner(gp, v), fd) <= 1e-5);
  }
}

TEST_CASE("penalty zeta", "[energy]") {
  const GridSpec g(8, 8, 1.0, 1.0);
  ModelParams p = accuracy_params();
  p.eta = 1e3;
  p.m0 = 0.0;
  CHECK_THAT(penalty_zeta(Field(g, 1.0), p), WithinRel(31.622776601683793, 1e-14));
  p.m0 = 0.25;
  CHECK(std::abs(penalty_zeta(Field(g, 0.25), p)) <= 1e-13);
  p.eta = 0.0;
  CHECK(penalty_zeta(Field(g, 7.0), p) == 0.0);
  p.eta = -1.0;
  CHECK_THROWS_AS(penalty_zeta(Field(g, 1.0), p), UsageError);
}

TEST_CASE("scheme energy equals the free energy at initialization", "[energy]") {
  const GridSpec g(16, 16, 1.0, 1.0);
  ModelParams p = accuracy_params();
  p.eta = 1e3;
  const Field phi = test::random_field(g, 9);
  p.m0 = integrate(phi);
  const double f = free_energy(phi, p);
  for (SchemeId s : kAllSchemes) {
    StepperState st{s, phi, phi, make_aux(s, phi, p), 0.0, 0, 0.0};
    INFO(to_string(s));
    CHECK_THAT(discrete_energy(st, p), WithinRel(f, 1e-12));
    const Field zero(g);
    StepperState z{s, zero, zero, make_aux(s, zero, p), 0.0, 0, 0.0};
    // Only the mass penalty survives on the zero field.
    const double pen = constraint_of(s) == Constraint::Penalty ? 0.5 * p.eta * p.m0 * p.m0 : 0.0;
    CHECK_THAT(discrete_energy(z, p), WithinAbs(pen, 1e-12 * std::max(pen, 1.0)));
  }
  const AuxState eq = make_aux(SchemeId::AcEq, phi, p);
  CHECK(*eq.q == hadamard(phi, phi));
  CHECK(!eq.zeta);
  const AuxState sav = make_aux(SchemeId::AcpSav, phi, p);
  CHECK_THAT(sav.r(), WithinRel(sav_r(phi, p), 1e-15));
  CHECK(sav.zeta.has_value());
}

TEST_CASE("free energy respects the reflection symmetry", "[energy]") {
  const GridSpec g(24, 16, 1.0, 1.0);
  const ModelParams p = accuracy_params();
  const Field f = test::random_field(g, 21);
  Field m(g);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) m(i, j) = f(g.nx() - 1 - i, j);
  }
  CHECK_THAT(free_energy(m, p), WithinRel(free_energy(f, p), 1e-12));
}

TEST_CASE("energy change matches the difference of energies", "[energy]") {
  const GridSpec g(16, 16, 1.0, 1.0);
  ModelParams p = accuracy_params();
  p.eta = 1e3;
  const Field a = test::random_field(g, 31);
  const Field b = test::random_field(g, 32);
  p.m0 = integrate(a);
  for (SchemeId s : kAllSchemes) {
    INFO(to_string(s));
    const StepperState sa{s, a, a, make_aux(s, a, p), 0.0, 0, 0.0};
    const StepperState sb{s, b, b, make_aux(s, b, p), 0.0, 0, 0.0};
    CHECK_THAT(energy_change(sa, sb, p), WithinRel(discrete_energy(sb, p) - discrete_energy(sa, p), 1e-10));
    CHECK(energy_change(sa, sa, p) == 0.0);
  }
  const StepperState eq{SchemeId::AcEq, a, a, make_aux(SchemeId::AcEq, a, p), 0.0, 0, 0.0};
  const StepperState sav{SchemeId::AcSav, a, a, make_aux(SchemeId::AcSav, a, p), 0.0, 0, 0.0};
  CHECK_THROWS_AS(energy_change(eq, sav, p), UsageError);
}
