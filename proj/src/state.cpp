#include "pfcflow/state.hpp"

#include <string>

namespace pfcflow {

Family family_of(SchemeId s) noexcept {
  return (s == SchemeId::ChEq || s == SchemeId::ChSav) ? Family::CahnHilliard : Family::AllenCahn;
}

Constraint constraint_of(SchemeId s) noexcept {
  switch (s) {
    case SchemeId::AcpEq:
    case SchemeId::AcpSav:
      return Constraint::Penalty;
    case SchemeId::AclEq:
    case SchemeId::AclSav:
      return Constraint::Lagrange;
    default:
      return Constraint::None;
  }
}

AuxKind aux_kind_of(SchemeId s) noexcept {
  switch (s) {
    case SchemeId::AcSav:
    case SchemeId::ChSav:
    case SchemeId::AcpSav:
    case SchemeId::AclSav:
      return AuxKind::SavScalar;
    default:
      return AuxKind::EqField;
  }
}

std::string_view to_string(SchemeId s) noexcept {
  switch (s) {
    case SchemeId::AcEq: return "AC-EQ";
    case SchemeId::AcSav: return "AC-SAV";
    case SchemeId::ChEq: return "CH-EQ";
    case SchemeId::ChSav: return "CH-SAV";
    case SchemeId::AcpEq: return "AC-P-EQ";
    case SchemeId::AcpSav: return "AC-P-SAV";
    case SchemeId::AclEq: return "AC-L-EQ";
    case SchemeId::AclSav: return "AC-L-SAV";
  }
  return "?";
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  throw UsageError("unknown scheme '" + std::string(name) +
                   "' (expected one of AC-EQ, AC-SAV, CH-EQ, CH-SAV, AC-P-EQ, AC-P-SAV, AC-L-EQ, "
                   "AC-L-SAV)");
}

}  // namespace pfcflow
