#pragma once

#include <array>

#include "codssi/bytes.hpp"

namespace codssi {

inline constexpr size_t kSha3_512Bytes = 64;

using Sha3Digest = std::array<uint8_t, kSha3_512Bytes>;

// Incremental SHA3-512.
class Sha3_512 {
 public:
  Sha3_512();
  ~Sha3_512();
  Sha3_512(const Sha3_512&) = delete;
  Sha3_512& operator=(const Sha3_512&) = delete;

  Sha3_512& update(BytesView data);
  Sha3_512& update_framed(BytesView field);
  Sha3Digest finish();

 private:
  void* ctx_;
};

Sha3Digest sha3_512(BytesView data);

}  // namespace codssi
