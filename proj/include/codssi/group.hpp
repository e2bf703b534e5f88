#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "codssi/bytes.hpp"
#include "codssi/rng.hpp"

namespace codssi {

// Commitment digest: SHA3-512 over the framed (value, salt) pair.
struct Digest {
  std::array<uint8_t, 64> bytes{};

  BytesView view() const { return BytesView(bytes.data(), bytes.size()); }
  bool operator==(const Digest&) const = default;
};

// Symmetric key derived per claim. 256 bits, feeds AES-256-GCM.
struct ClaimKey {
  std::array<uint8_t, 32> bytes{};

  BytesView view() const { return BytesView(bytes.data(), bytes.size()); }
  bool operator==(const ClaimKey&) const = default;
};

// Serialized group element. For the secp256k1 backend this is the 33-byte
// compressed point; for the toy backend a single byte.
struct GroupElement {
  Bytes encoding;

  BytesView view() const { return BytesView(encoding.data(), encoding.size()); }
  bool operator==(const GroupElement&) const = default;
};

// Scalar modulo the group order, big-endian, fixed width per backend.
struct Scalar {
  Bytes bytes;

  BytesView view() const { return BytesView(bytes.data(), bytes.size()); }
  bool operator==(const Scalar&) const = default;
};

// Prime-order group under a fixed generator. Implementations must make
// element_valid() a full membership check: anything it accepts is safe to
// exponentiate.
class Group {
 public:
  virtual ~Group() = default;

  virtual std::string name() const = 0;
  virtual size_t element_size() const = 0;
  virtual size_t scalar_size() const = 0;

  virtual bool element_valid(const GroupElement& e) const = 0;

  // base^k. Throws InvalidElement if base fails validation.
  virtual GroupElement exp(const GroupElement& base, const Scalar& k) const = 0;

  // Uniform nonzero scalar.
  virtual Scalar random_scalar(RandomSource& rng) const = 0;

  // k^-1 mod order. Throws if k is zero.
  virtual Scalar scalar_inverse(const Scalar& k) const = 0;

  virtual Scalar scalar_from_u64(uint64_t v) const = 0;

  // Deterministic map from a commitment digest into the group, never the
  // identity. Domain-separated; two groups never share outputs.
  virtual GroupElement hash_to_group(const Digest& x) const = 0;
};

// secp256k1 under its standard generator.
std::shared_ptr<const Group> secp256k1_group();

// Order-11 subgroup of Z_23* generated by 2, with 1-byte encodings. Small
// enough to enumerate exhaustively in tests; shares no code path shortcuts
// with the production backend.
std::shared_ptr<const Group> toy_group();

// Factory keyed on Group::name(), for rehydrating serialized secrets.
std::shared_ptr<const Group> group_by_name(std::string_view name);

}  // namespace codssi
