#include "codssi/aead.hpp"

#include <openssl/evp.h>

#include <memory>

#include "codssi/errors.hpp"

namespace codssi {
namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

[[noreturn]] void fail() { throw Error("AES-GCM internal failure"); }

}  // namespace

AeadBox aead_seal(const ClaimKey& key, const std::array<uint8_t, kAeadIvBytes>& iv,
                  BytesView plaintext, BytesView aad) {
  CtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail();
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1) fail();
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kAeadIvBytes, nullptr) != 1) fail();
  if (EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), iv.data()) != 1) fail();

  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail();
  }

  AeadBox box;
  box.iv = iv;
  box.ciphertext.resize(plaintext.size());
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), box.ciphertext.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    fail();
  }
  if (EVP_EncryptFinal_ex(ctx.get(), box.ciphertext.data() + box.ciphertext.size(), &len) != 1) fail();
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagBytes, box.tag.data()) != 1) fail();
  return box;
}

std::optional<Bytes> aead_open(const ClaimKey& key, const AeadBox& box, BytesView aad) {
  CtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail();
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1) fail();
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kAeadIvBytes, nullptr) != 1) fail();
  if (EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), box.iv.data()) != 1) fail();

  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    return std::nullopt;
  }

  Bytes plaintext(box.ciphertext.size());
  if (!box.ciphertext.empty() &&
      EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, box.ciphertext.data(),
                        static_cast<int>(box.ciphertext.size())) != 1) {
    return std::nullopt;
  }

  Bytes tag(box.tag.begin(), box.tag.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagBytes, tag.data()) != 1) fail();
  if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + plaintext.size(), &len) != 1) {
    return std::nullopt;
  }
  return plaintext;
}

}  // namespace codssi
