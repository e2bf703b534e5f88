#pragma once

#include "codssi/group.hpp"

namespace codssi {

// x = H(value || salt) with length framing on both fields.
Digest commit(BytesView value, BytesView salt);

struct Blinded {
  Scalar r;
  GroupElement element;  // hash_to_group(x)^r
};

// Client step 1: pick a random exponent and blind the hashed digest.
Blinded blind(const Group& g, const Digest& x, RandomSource& rng);

// Same with a caller-supplied exponent. Test seam; also the r = 1 path.
Blinded blind_with(const Group& g, const Digest& x, const Scalar& r);

// Server step: b = a^msk. Validation of a happens inside Group::exp.
GroupElement evaluate(const Group& g, const Scalar& msk, const GroupElement& a);

// Client step 2: unblind and hash down to the claim key, H2(x, b^(1/r)).
ClaimKey finalize(const Group& g, const Digest& x, const GroupElement& b,
                  const Scalar& r);

// What the key owner computes locally: H2(x, H1(x)^msk). Equals the
// blind/evaluate/finalize composition for the same (msk, x).
ClaimKey derive_key_direct(const Group& g, const Scalar& msk, const Digest& x);

}  // namespace codssi
