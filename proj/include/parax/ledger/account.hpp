#pragma once

#include <cstdint>

#include "parax/ledger/types.hpp"

namespace parax {

struct Account {
  AccountId id;
  Amount balance = 0;
  std::uint64_t nonce = 0;
  bool is_contract = false;
  bool governance_flag = false;

  bool operator==(const Account&) const = default;
};

}  // namespace parax
