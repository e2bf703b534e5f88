#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codssi/signature.hpp"

namespace codssi {

// Local registry of party signing keys, self-signed by a root key. Stands in
// for external identifier resolution: lookup is the trust decision.
class KeyDirectory {
 public:
  struct Entry {
    std::string id;
    Bytes public_key;
  };

  KeyDirectory() = default;

  // Throws DuplicatePartyId; key must be a raw Ed25519 public key.
  void add(const std::string& id, Bytes public_key);

  std::optional<Bytes> lookup(const std::string& id) const;
  const std::vector<Entry>& entries() const { return entries_; }

  // Serializes header + entries and signs with the root key.
  Bytes serialize_signed(const SigningKey& root) const;

  // Verifies the embedded self-signature; throws DirectoryError otherwise.
  static KeyDirectory parse_signed(BytesView file);

 private:
  std::vector<Entry> entries_;
};

}  // namespace codssi
