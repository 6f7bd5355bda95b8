#pragma once

#include <stdexcept>
#include <string>

namespace rbgka {

// Base for everything the protocol layer can throw on misuse or broken state.
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateMemberError : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct UnknownMemberError : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct RoleMismatchError : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct StaleEpochError : ProtocolError {
  using ProtocolError::ProtocolError;
};
// seal/open integrity check failed (wrong key or tampered ciphertext)
struct AuthenticationError : ProtocolError {
  using ProtocolError::ProtocolError;
};
// a structural invariant of the live state no longer holds; callers abort
struct InvariantViolation : ProtocolError {
  using ProtocolError::ProtocolError;
};

}  // namespace rbgka
