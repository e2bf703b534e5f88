#include "codssi/oprf.hpp"

#include <algorithm>

#include "codssi/sha3.hpp"

namespace codssi {
namespace {

ClaimKey h2(const Digest& x, const GroupElement& c) {
  Sha3_512 h;
  h.update(to_bytes("CODSSI-H2-v1"));
  h.update_framed(x.view());
  h.update_framed(c.view());
  Sha3Digest d = h.finish();
  ClaimKey key;
  std::copy(d.begin(), d.begin() + key.bytes.size(), key.bytes.begin());
  return key;
}

}  // namespace

Digest commit(BytesView value, BytesView salt) {
  Sha3_512 h;
  h.update_framed(value).update_framed(salt);
  Sha3Digest d = h.finish();
  Digest out;
  out.bytes = d;
  return out;
}

Blinded blind(const Group& g, const Digest& x, RandomSource& rng) {
  return blind_with(g, x, g.random_scalar(rng));
}

Blinded blind_with(const Group& g, const Digest& x, const Scalar& r) {
  Blinded out;
  out.r = r;
  out.element = g.exp(g.hash_to_group(x), r);
  return out;
}

GroupElement evaluate(const Group& g, const Scalar& msk, const GroupElement& a) {
  return g.exp(a, msk);
}

ClaimKey finalize(const Group& g, const Digest& x, const GroupElement& b,
                  const Scalar& r) {
  return h2(x, g.exp(b, g.scalar_inverse(r)));
}

ClaimKey derive_key_direct(const Group& g, const Scalar& msk, const Digest& x) {
  return h2(x, g.exp(g.hash_to_group(x), msk));
}

}  // namespace codssi
