#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pfcflow/grid.hpp"

namespace pfcflow {

/// The eight time steppers: {Allen-Cahn, Cahn-Hilliard, penalty Allen-Cahn,
/// Lagrange Allen-Cahn} x {EQ, SAV}.
enum class SchemeId { AcEq, AcSav, ChEq, ChSav, AcpEq, AcpSav, AclEq, AclSav };

inline constexpr SchemeId kAllSchemes[] = {SchemeId::AcEq,  SchemeId::AcSav,  SchemeId::ChEq,
                                           SchemeId::ChSav, SchemeId::AcpEq,  SchemeId::AcpSav,
                                           SchemeId::AclEq, SchemeId::AclSav};

enum class Family { AllenCahn, CahnHilliard };
enum class Constraint { None, Penalty, Lagrange };
enum class AuxKind { EqField, SavScalar };

Family family_of(SchemeId s) noexcept;
Constraint constraint_of(SchemeId s) noexcept;
AuxKind aux_kind_of(SchemeId s) noexcept;

/// "AC-EQ", "CH-SAV", "AC-L-EQ", ...
std::string_view to_string(SchemeId s) noexcept;
/// Inverse of to_string; throws UsageError on unknown names.
SchemeId parse_scheme(std::string_view name);

/// Auxiliary variables of the quadratized energy.
///
/// EQ keeps the field q (q = phi^2 at t = 0); SAV keeps the scalar r, stored as
/// its excess over sqrt(C0) so that r^2 - C0 is evaluated without cancellation.
/// zeta is present only for penalty models.
struct AuxState {
  AuxKind kind = AuxKind::EqField;
  std::optional<Field> q;
  double r_excess = 0.0;
  double sqrt_c0 = 0.0;
  std::optional<double> zeta;

  double r() const noexcept { return sqrt_c0 + r_excess; }
  /// r^2 - C0
  double r_energy() const noexcept { return r_excess * (r_excess + 2.0 * sqrt_c0); }
};

struct StepperState {
  SchemeId scheme;
  Field phi_prev;
  Field phi;
  AuxState aux;
  double t = 0.0;
  long n = 0;
  /// Lagrange multiplier of the most recent step (Lagrange schemes only).
  double last_L = 0.0;
};

}  // namespace pfcflow
