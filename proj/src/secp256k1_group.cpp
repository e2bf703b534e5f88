#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/obj_mac.h>

#include <mutex>

#include "codssi/errors.hpp"
#include "codssi/group.hpp"
#include "codssi/sha3.hpp"

namespace codssi {
namespace {

constexpr size_t kElementSize = 33;  // compressed SEC1 point
constexpr size_t kScalarSize = 32;

struct BnDeleter {
  void operator()(BIGNUM* p) const { BN_free(p); }
};
struct BnCtxDeleter {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

[[noreturn]] void fail(const char* what) {
  ERR_clear_error();
  throw Error(std::string("secp256k1: ") + what);
}

class Secp256k1Group final : public Group {
 public:
  Secp256k1Group() {
    group_ = EC_GROUP_new_by_curve_name(NID_secp256k1);
    if (!group_) fail("curve unavailable");
    order_ = BN_new();
    BnCtxPtr ctx(BN_CTX_new());
    if (!order_ || !ctx || EC_GROUP_get_order(group_, order_, ctx.get()) != 1) {
      fail("order unavailable");
    }
  }

  ~Secp256k1Group() override {
    BN_free(order_);
    EC_GROUP_free(group_);
  }

  std::string name() const override { return "secp256k1"; }
  size_t element_size() const override { return kElementSize; }
  size_t scalar_size() const override { return kScalarSize; }

  bool element_valid(const GroupElement& e) const override {
    if (e.encoding.size() != kElementSize) return false;
    if (e.encoding[0] != 0x02 && e.encoding[0] != 0x03) return false;
    BnCtxPtr ctx(BN_CTX_new());
    PointPtr p(EC_POINT_new(group_));
    if (!ctx || !p) fail("alloc");
    if (EC_POINT_oct2point(group_, p.get(), e.encoding.data(), e.encoding.size(),
                           ctx.get()) != 1) {
      ERR_clear_error();
      return false;
    }
    // oct2point on a prime curve already checks curve membership; the cofactor
    // is 1 so no subgroup check is needed. Reject the identity anyway.
    return EC_POINT_is_at_infinity(group_, p.get()) == 0;
  }

  GroupElement exp(const GroupElement& base, const Scalar& k) const override {
    if (!element_valid(base)) throw InvalidElement("not a valid curve point");
    BnCtxPtr ctx(BN_CTX_new());
    PointPtr p(EC_POINT_new(group_));
    PointPtr out(EC_POINT_new(group_));
    BnPtr s(BN_bin2bn(k.bytes.data(), static_cast<int>(k.bytes.size()), nullptr));
    if (!ctx || !p || !out || !s) fail("alloc");
    if (EC_POINT_oct2point(group_, p.get(), base.encoding.data(),
                           base.encoding.size(), ctx.get()) != 1) {
      fail("decode");
    }
    if (EC_POINT_mul(group_, out.get(), nullptr, p.get(), s.get(), ctx.get()) != 1) {
      fail("mul");
    }
    if (EC_POINT_is_at_infinity(group_, out.get())) {
      throw InvalidElement("exponentiation hit the identity");
    }
    return encode(out.get(), ctx.get());
  }

  Scalar random_scalar(RandomSource& rng) const override {
    // Rejection-sample below the order; the order is close to 2^256 so this
    // nearly always succeeds on the first draw.
    for (;;) {
      Bytes cand = rng.bytes(kScalarSize);
      BnPtr s(BN_bin2bn(cand.data(), static_cast<int>(cand.size()), nullptr));
      if (!s) fail("alloc");
      if (BN_is_zero(s.get()) || BN_cmp(s.get(), order_) >= 0) continue;
      Scalar out;
      out.bytes = std::move(cand);
      return out;
    }
  }

  Scalar scalar_inverse(const Scalar& k) const override {
    BnCtxPtr ctx(BN_CTX_new());
    BnPtr s(BN_bin2bn(k.bytes.data(), static_cast<int>(k.bytes.size()), nullptr));
    if (!ctx || !s) fail("alloc");
    if (BN_is_zero(s.get()) || BN_cmp(s.get(), order_) >= 0) {
      throw Error("scalar out of range");
    }
    BnPtr inv(BN_mod_inverse(nullptr, s.get(), order_, ctx.get()));
    if (!inv) fail("no inverse");
    return to_scalar(inv.get());
  }

  Scalar scalar_from_u64(uint64_t v) const override {
    if (v == 0) throw Error("zero scalar");
    Scalar out;
    out.bytes.assign(kScalarSize, 0);
    for (int i = 0; i < 8; ++i) {
      out.bytes[kScalarSize - 1 - i] = static_cast<uint8_t>(v >> (8 * i));
    }
    return out;
  }

  GroupElement hash_to_group(const Digest& x) const override {
    // Try-and-increment: derive a candidate x-coordinate and parity from a
    // counter-extended hash, lift to the curve, bump the counter on misses.
    // Each counter value succeeds for about half of all x, so 256 attempts
    // failing is a code bug, not bad luck.
    BnCtxPtr ctx(BN_CTX_new());
    PointPtr p(EC_POINT_new(group_));
    if (!ctx || !p) fail("alloc");
    for (uint32_t counter = 0; counter < 256; ++counter) {
      Sha3_512 h;
      h.update(to_bytes("CODSSI-H1-v1"));
      h.update_framed(to_bytes(name()));
      h.update_framed(x.view());
      uint8_t c = static_cast<uint8_t>(counter);
      h.update(BytesView(&c, 1));
      Sha3Digest d = h.finish();
      BnPtr xc(BN_bin2bn(d.data(), 32, nullptr));
      if (!xc) fail("alloc");
      int ybit = d[32] & 1;
      if (EC_POINT_set_compressed_coordinates(group_, p.get(), xc.get(), ybit,
                                              ctx.get()) != 1) {
        ERR_clear_error();
        continue;
      }
      if (EC_POINT_is_at_infinity(group_, p.get())) continue;
      return encode(p.get(), ctx.get());
    }
    fail("hash_to_group exhausted counter space");
  }

 private:
  GroupElement encode(const EC_POINT* p, BN_CTX* ctx) const {
    GroupElement e;
    e.encoding.resize(kElementSize);
    size_t n = EC_POINT_point2oct(group_, p, POINT_CONVERSION_COMPRESSED,
                                  e.encoding.data(), e.encoding.size(), ctx);
    if (n != kElementSize) fail("encode");
    return e;
  }

  Scalar to_scalar(const BIGNUM* s) const {
    Scalar out;
    out.bytes.assign(kScalarSize, 0);
    if (BN_bn2binpad(s, out.bytes.data(), kScalarSize) < 0) fail("encode scalar");
    return out;
  }

  EC_GROUP* group_ = nullptr;
  BIGNUM* order_ = nullptr;
};

}  // namespace

std::shared_ptr<const Group> secp256k1_group() {
  static std::shared_ptr<const Group> g = std::make_shared<Secp256k1Group>();
  return g;
}

}  // namespace codssi
