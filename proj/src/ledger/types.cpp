#include "parax/ledger/types.hpp"

namespace parax {

std::string_view group_name(Group g) {
  switch (g) {
    case Group::Contract: return "G1";
    case Group::Transfer: return "G2";
    case Group::Receipt: return "G3";
    case Group::Other: return "G4";
  }
  return "G?";
}

std::optional<Group> group_from_u8(std::uint8_t v) {
  if (v < 1 || v > 4) return std::nullopt;
  return static_cast<Group>(v);
}

}  // namespace parax
