#include "codssi/rng.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <cstring>

#include "codssi/errors.hpp"
#include "codssi/sha3.hpp"

namespace codssi {

uint64_t RandomSource::next_u64() {
  std::array<uint8_t, 8> b{};
  fill(b);
  uint64_t v = 0;
  for (uint8_t x : b) v = (v << 8) | x;
  return v;
}

void SystemRandom::fill(std::span<uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error("system RNG failure");
  }
}

SeededRandom::SeededRandom(uint64_t seed) {
  Bytes s;
  append_u64_be(s, seed);
  Sha3_512 h;
  h.update(to_bytes("codssi-drbg-seed")).update_framed(s);
  seed_block_ = h.finish();
}

SeededRandom::SeededRandom(BytesView seed) {
  Sha3_512 h;
  h.update(to_bytes("codssi-drbg-seed")).update_framed(seed);
  seed_block_ = h.finish();
}

void SeededRandom::refill() {
  Bytes ctr;
  append_u64_be(ctr, counter_++);
  Sha3_512 h;
  h.update(seed_block_).update(ctr);
  buffer_ = h.finish();
  buffered_ = buffer_.size();
}

void SeededRandom::fill(std::span<uint8_t> out) {
  size_t off = 0;
  while (off < out.size()) {
    if (buffered_ == 0) refill();
    size_t take = std::min(buffered_, out.size() - off);
    std::memcpy(out.data() + off, buffer_.data() + (buffer_.size() - buffered_), take);
    buffered_ -= take;
    off += take;
  }
}

}  // namespace codssi
