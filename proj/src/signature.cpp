#include "codssi/signature.hpp"

#include <openssl/evp.h>

#include <memory>

#include "codssi/errors.hpp"

namespace codssi {
namespace {

struct KeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using KeyPtr = std::unique_ptr<EVP_PKEY, KeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

KeyPtr private_key_from_seed(BytesView seed) {
  KeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(),
                                          seed.size()));
  if (!key) throw Error("Ed25519 key import failed");
  return key;
}

}  // namespace

SigningKey SigningKey::generate(RandomSource& rng) {
  return SigningKey(rng.bytes(kSigningSeedBytes));
}

SigningKey SigningKey::from_seed(BytesView seed) {
  if (seed.size() != kSigningSeedBytes) throw Error("signing seed must be 32 bytes");
  return SigningKey(Bytes(seed.begin(), seed.end()));
}

Bytes SigningKey::public_key() const {
  KeyPtr key = private_key_from_seed(seed_);
  Bytes pub(kPublicKeyBytes);
  size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1 ||
      len != kPublicKeyBytes) {
    throw Error("Ed25519 public key export failed");
  }
  return pub;
}

Bytes SigningKey::seed() const { return seed_; }

Bytes SigningKey::sign(BytesView message) const {
  KeyPtr key = private_key_from_seed(seed_);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) throw Error("alloc failure");
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    throw Error("Ed25519 sign init failed");
  }
  Bytes sig(kSignatureBytes);
  size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != kSignatureBytes) {
    throw Error("Ed25519 sign failed");
  }
  return sig;
}

bool signature_verify(BytesView public_key, BytesView message, BytesView signature) {
  if (public_key.size() != kPublicKeyBytes || signature.size() != kSignatureBytes) {
    return false;
  }
  KeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                         public_key.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

}  // namespace codssi
