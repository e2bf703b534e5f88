#include "codssi/sha3.hpp"

#include <openssl/evp.h>

#include "codssi/errors.hpp"

namespace codssi {

Sha3_512::Sha3_512() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha3_512(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha3-512 init failed");
  }
  ctx_ = ctx;
}

Sha3_512::~Sha3_512() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha3_512& Sha3_512::update(BytesView data) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1) {
    throw Error("sha3-512 update failed");
  }
  return *this;
}

Sha3_512& Sha3_512::update_framed(BytesView field) {
  Bytes len;
  append_u64_be(len, field.size());
  update(len);
  update(field);
  return *this;
}

Sha3Digest Sha3_512::finish() {
  Sha3Digest out;
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) != 1 ||
      len != kSha3_512Bytes) {
    throw Error("sha3-512 final failed");
  }
  return out;
}

Sha3Digest sha3_512(BytesView data) {
  Sha3_512 h;
  h.update(data);
  return h.finish();
}

}  // namespace codssi
