#pragma once

#include <stdexcept>
#include <string>

namespace codssi {

// Base for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A byte string did not decode to a valid, non-identity group element.
class InvalidElement : public Error {
 public:
  InvalidElement() : Error("invalid group element") {}
  explicit InvalidElement(const std::string& what) : Error(what) {}
};

class DuplicateClaimName : public Error {
 public:
  explicit DuplicateClaimName(const std::string& name)
      : Error("duplicate claim name: " + name) {}
};

class EmptyClaimSet : public Error {
 public:
  EmptyClaimSet() : Error("credential must contain at least one claim") {}
};

// A credential-data entry does not recommit to its credential digest.
class OpeningMismatch : public Error {
 public:
  explicit OpeningMismatch(const std::string& name)
      : Error("opening does not match commitment for claim: " + name) {}
};

class SecretClosed : public Error {
 public:
  SecretClosed() : Error("presentation secret has been closed") {}
};

class DuplicatePartyId : public Error {
 public:
  explicit DuplicatePartyId(const std::string& id)
      : Error("party id already registered: " + id) {}
};

class DirectoryError : public Error {
 public:
  explicit DirectoryError(const std::string& what) : Error(what) {}
};

class BodyTooLarge : public Error {
 public:
  BodyTooLarge() : Error("frame body exceeds maximum size") {}
};

// Protocol-level failures observed by a running party. The uniform wording is
// deliberate: failure detail must not key on which claim was involved.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(what) {}
};

class TransportError : public ProtocolError {
 public:
  explicit TransportError(const std::string& what) : ProtocolError(what) {}
};

class HandshakeFailure : public ProtocolError {
 public:
  explicit HandshakeFailure(const std::string& what) : ProtocolError(what) {}
};

class QuotaExceededError : public ProtocolError {
 public:
  QuotaExceededError() : ProtocolError("disclosure quota exceeded") {}
};

// Uniform error for any per-claim failure during disclosure: AEAD rejection
// and commitment mismatch are indistinguishable by design.
class ClaimVerificationFailure : public ProtocolError {
 public:
  ClaimVerificationFailure() : ProtocolError("claim verification failed") {}
};

class SessionRejected : public ProtocolError {
 public:
  explicit SessionRejected(const std::string& what) : ProtocolError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace codssi
