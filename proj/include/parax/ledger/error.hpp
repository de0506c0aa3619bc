#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parax {

enum class Errc {
  KeyMismatch,
  EmptySigners,
  QuorumUnderflow,
  DuplicateTransaction,
  BadSignature,
  NonceGap,
  IllegalTransition,
  InsufficientNodes,
  NotHolder,
  ForeignVote,
  IndexOutOfRange,
  MissingValidatorCert,
  StateRootMismatch,
  DuplicateNode,
  UnknownNode,
  InsufficientBalance,
  WrongPhase,
  DuplicateSwap,
  ChecksumMismatch,
  Decode,
  FileNotFound,
  SchemaViolation,
  CorruptOutput,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace parax
