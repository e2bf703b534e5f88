#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "codssi/bytes.hpp"

namespace codssi {

// Source of random bytes. Instances are not safe for unsynchronized sharing
// across threads; give each thread its own handle.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<uint8_t> out) = 0;

  Bytes bytes(size_t n) {
    Bytes b(n);
    fill(b);
    return b;
  }
  uint64_t next_u64();
};

// Operating-system CSPRNG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<uint8_t> out) override;
};

// Deterministic generator for tests and reproducible benchmark runs:
// SHA3-512 in counter mode over a seed. Not for production key material.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(uint64_t seed);
  explicit SeededRandom(BytesView seed);
  void fill(std::span<uint8_t> out) override;

 private:
  std::array<uint8_t, 64> seed_block_;
  std::array<uint8_t, 64> buffer_;
  size_t buffered_ = 0;
  uint64_t counter_ = 0;
  void refill();
};

}  // namespace codssi
