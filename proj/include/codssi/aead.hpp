#pragma once

#include <optional>

#include "codssi/group.hpp"

namespace codssi {

inline constexpr size_t kAeadIvBytes = 12;
inline constexpr size_t kAeadTagBytes = 16;

// AES-256-GCM output triple. Ciphertext has the plaintext's length.
struct AeadBox {
  std::array<uint8_t, kAeadIvBytes> iv{};
  Bytes ciphertext;
  std::array<uint8_t, kAeadTagBytes> tag{};

  bool operator==(const AeadBox&) const = default;
};

AeadBox aead_seal(const ClaimKey& key, const std::array<uint8_t, kAeadIvBytes>& iv,
                  BytesView plaintext, BytesView aad);

// nullopt on any authentication failure; no partial plaintext escapes.
std::optional<Bytes> aead_open(const ClaimKey& key, const AeadBox& box,
                               BytesView aad);

}  // namespace codssi
