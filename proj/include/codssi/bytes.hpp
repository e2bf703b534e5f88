#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codssi {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
  return std::string(b.begin(), b.end());
}

std::string to_hex(BytesView data);
std::optional<Bytes> from_hex(std::string_view hex);

void append_u8(Bytes& out, uint8_t v);
void append_u32_be(Bytes& out, uint32_t v);
void append_u64_be(Bytes& out, uint64_t v);
uint32_t read_u32_be(BytesView b);  // b.size() >= 4
uint64_t read_u64_be(BytesView b);  // b.size() >= 8

// 8-byte big-endian length followed by the raw bytes. Used for hash-input
// framing so that distinct field sequences never collide by splicing.
void append_framed(Bytes& out, BytesView field);
Bytes framed(BytesView field);

// Constant-time equality for secret-dependent comparisons.
bool ct_equal(BytesView a, BytesView b);

bool contains_subsequence(BytesView haystack, BytesView needle);

void secure_wipe(Bytes& b);

}  // namespace codssi
