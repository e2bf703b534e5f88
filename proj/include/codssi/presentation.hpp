#pragma once

#include "codssi/aead.hpp"
#include "codssi/credential.hpp"

namespace codssi {

inline constexpr size_t kPresentationNonceBytes = 32;
inline constexpr int64_t kDefaultMaxPresentationAge = 3600;  // seconds

struct PresentationMetadata {
  std::string holder_id;
  std::string audience_id;
  Bytes nonce;
  int64_t created_at = 0;
};

// Holder-signed bundle of credentials addressed to one audience.
struct VerifiablePresentation {
  std::vector<VerifiableCredential> credentials;
  PresentationMetadata metadata;
  Bytes proof;

  Bytes signing_payload() const;
};

struct EncryptedClaimEntry {
  std::string name;
  Digest digest;
  AeadBox box;  // aad is the digest
};

struct EncryptedClaimSet {
  std::vector<EncryptedClaimEntry> entries;  // sorted by name

  const EncryptedClaimEntry* find(const std::string& name) const;
};

// Encrypted companion of a presentation, index-aligned with its credentials.
struct PresentationData {
  std::vector<EncryptedClaimSet> sets;
};

// Per-presentation master secret. Single-owner; close() wipes the scalar and
// all later access throws SecretClosed.
class PresentationSecret {
 public:
  PresentationSecret(Scalar msk, Bytes nonce)
      : msk_(std::move(msk)), nonce_(std::move(nonce)) {}
  PresentationSecret(PresentationSecret&&) = default;
  PresentationSecret& operator=(PresentationSecret&&) = default;
  PresentationSecret(const PresentationSecret&) = delete;
  PresentationSecret& operator=(const PresentationSecret&) = delete;

  const Scalar& msk() const;
  const Bytes& nonce() const;
  bool closed() const { return closed_; }
  void close();

 private:
  Scalar msk_;
  Bytes nonce_;
  bool closed_ = false;
};

struct PresentationBundle {
  VerifiablePresentation vp;
  PresentationData data;
  PresentationSecret secret;
};

// Fresh master secret, per-claim keys, encrypted openings, holder signature.
// Refuses inputs whose data does not open its credential. holder_id must be
// the directory id owning holder_key.
PresentationBundle create_presentation(
    const Group& group, const SigningKey& holder_key, const std::string& holder_id,
    const std::vector<IssuedCredential>& inputs, const std::string& audience_id,
    RandomSource& rng, int64_t now = unix_now());

enum class PresentationCheck {
  accept,
  reject_signature,
  reject_credential,
  reject_expiry,
  reject_structure,
  reject_format,
};

const char* to_string(PresentationCheck c);

// Holder signature, every embedded credential, audience, freshness, and the
// structural alignment of the encrypted data (names and digests must match
// the credential commitments).
PresentationCheck validate_presentation(
    const VerifiablePresentation& vp, const PresentationData& d_vp,
    const KeyDirectory& directory, const std::string& expected_audience,
    int64_t now, int64_t max_age_seconds = kDefaultMaxPresentationAge);

// The plaintext carried inside each box: framed value then framed salt, the
// exact commitment preimage. split fails with nullopt on malformed input.
Bytes encode_box_plaintext(BytesView value, BytesView salt);
std::optional<std::pair<Bytes, Bytes>> split_box_plaintext(BytesView plaintext);

// Total encrypted bytes across all boxes: sum of iv + ciphertext + tag.
size_t encrypted_payload_bytes(const PresentationData& d_vp);

Bytes encode_presentation(const VerifiablePresentation& vp);
VerifiablePresentation decode_presentation(BytesView in);
Bytes encode_presentation_data(const PresentationData& d_vp);
PresentationData decode_presentation_data(BytesView in);
Bytes encode_presentation_secret(const PresentationSecret& secret,
                                 const std::string& group_name);
std::pair<PresentationSecret, std::string> decode_presentation_secret(BytesView in);

}  // namespace codssi
