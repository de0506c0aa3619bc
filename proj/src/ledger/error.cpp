#include "parax/ledger/error.hpp"

namespace parax {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::KeyMismatch: return "KeyMismatch";
    case Errc::EmptySigners: return "EmptySigners";
    case Errc::QuorumUnderflow: return "QuorumUnderflow";
    case Errc::DuplicateTransaction: return "DuplicateTransaction";
    case Errc::BadSignature: return "BadSignature";
    case Errc::NonceGap: return "NonceGap";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::InsufficientNodes: return "InsufficientNodes";
    case Errc::NotHolder: return "NotHolder";
    case Errc::ForeignVote: return "ForeignVote";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::MissingValidatorCert: return "MissingValidatorCert";
    case Errc::StateRootMismatch: return "StateRootMismatch";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::InsufficientBalance: return "InsufficientBalance";
    case Errc::WrongPhase: return "WrongPhase";
    case Errc::DuplicateSwap: return "DuplicateSwap";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::Decode: return "Decode";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::CorruptOutput: return "CorruptOutput";
  }
  return "Unknown";
}

}  // namespace parax
