#include "codssi/errors.hpp"
#include "codssi/group.hpp"
#include "codssi/sha3.hpp"

namespace codssi {
namespace {

// Order-11 subgroup of Z_23* generated by 2. Tiny on purpose: tests can walk
// every element and every scalar.
constexpr uint32_t kModulus = 23;
constexpr uint32_t kOrder = 11;
constexpr uint32_t kGenerator = 2;

uint32_t mulmod(uint32_t a, uint32_t b) { return (a * b) % kModulus; }

uint32_t powmod(uint32_t base, uint32_t e) {
  uint32_t acc = 1;
  base %= kModulus;
  while (e > 0) {
    if (e & 1) acc = mulmod(acc, base);
    base = mulmod(base, base);
    e >>= 1;
  }
  return acc;
}

bool in_subgroup(uint32_t v) {
  return v >= 1 && v < kModulus && powmod(v, kOrder) == 1;
}

class ToyGroup final : public Group {
 public:
  std::string name() const override { return "toy-z23"; }
  size_t element_size() const override { return 1; }
  size_t scalar_size() const override { return 1; }

  bool element_valid(const GroupElement& e) const override {
    if (e.encoding.size() != 1) return false;
    uint32_t v = e.encoding[0];
    return v != 1 && in_subgroup(v);
  }

  GroupElement exp(const GroupElement& base, const Scalar& k) const override {
    if (!element_valid(base)) throw InvalidElement("not a subgroup element");
    uint32_t s = scalar_value(k);
    uint32_t v = powmod(base.encoding[0], s);
    if (v == 1) throw InvalidElement("exponentiation hit the identity");
    GroupElement out;
    out.encoding = {static_cast<uint8_t>(v)};
    return out;
  }

  Scalar random_scalar(RandomSource& rng) const override {
    // 1..10 uniformly, by rejection.
    for (;;) {
      uint8_t b = 0;
      rng.fill(std::span<uint8_t>(&b, 1));
      if (b >= 250) continue;  // 250 = 25 * 10 keeps the residue unbiased
      Scalar out;
      out.bytes = {static_cast<uint8_t>(1 + b % 10)};
      return out;
    }
  }

  Scalar scalar_inverse(const Scalar& k) const override {
    uint32_t s = scalar_value(k);
    for (uint32_t c = 1; c < kOrder; ++c) {
      if ((s * c) % kOrder == 1) {
        Scalar out;
        out.bytes = {static_cast<uint8_t>(c)};
        return out;
      }
    }
    throw Error("no inverse");
  }

  Scalar scalar_from_u64(uint64_t v) const override {
    uint64_t r = v % kOrder;
    if (r == 0) throw Error("zero scalar");
    Scalar out;
    out.bytes = {static_cast<uint8_t>(r)};
    return out;
  }

  GroupElement hash_to_group(const Digest& x) const override {
    Sha3_512 h;
    h.update(to_bytes("CODSSI-H1-v1"));
    h.update_framed(to_bytes(name()));
    h.update_framed(x.view());
    Sha3Digest d = h.finish();
    // g^(1 + h mod 10): exponent range 1..10 never produces the identity.
    uint32_t e = 1 + d[0] % 10;
    GroupElement out;
    out.encoding = {static_cast<uint8_t>(powmod(kGenerator, e))};
    return out;
  }

 private:
  static uint32_t scalar_value(const Scalar& k) {
    if (k.bytes.size() != 1 || k.bytes[0] == 0 || k.bytes[0] >= kOrder) {
      throw Error("scalar out of range");
    }
    return k.bytes[0];
  }
};

}  // namespace

std::shared_ptr<const Group> toy_group() {
  static std::shared_ptr<const Group> g = std::make_shared<ToyGroup>();
  return g;
}

}  // namespace codssi
