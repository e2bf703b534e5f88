#pragma once

#include "codssi/bytes.hpp"
#include "codssi/rng.hpp"

namespace codssi {

inline constexpr size_t kSignatureBytes = 64;
inline constexpr size_t kPublicKeyBytes = 32;
inline constexpr size_t kSigningSeedBytes = 32;

// Ed25519 signing key. Deterministic signatures, 32-byte public keys.
class SigningKey {
 public:
  static SigningKey generate(RandomSource& rng);
  static SigningKey from_seed(BytesView seed);  // exactly 32 bytes

  Bytes public_key() const;
  Bytes seed() const;
  Bytes sign(BytesView message) const;

 private:
  explicit SigningKey(Bytes seed) : seed_(std::move(seed)) {}
  Bytes seed_;
};

bool signature_verify(BytesView public_key, BytesView message, BytesView signature);

}  // namespace codssi
