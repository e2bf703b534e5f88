#pragma once

#include <string>
#include <utility>
#include <vector>

#include "codssi/directory.hpp"
#include "codssi/oprf.hpp"

namespace codssi {

inline constexpr size_t kDefaultSaltBytes = 16;

// One opened claim: value plus the salt behind its commitment.
struct ClaimRecord {
  std::string name;
  Bytes value;
  Bytes salt;
};

struct CredentialMetadata {
  std::string issuer_id;
  std::string subject_id;
  std::string type;
  int64_t issued_at = 0;   // unix seconds
  int64_t expires_at = 0;  // 0 = never
};

// Issuer-signed commitment dictionary. Claims appear as salted digests only;
// the plaintext lives in the companion CredentialData.
struct VerifiableCredential {
  std::vector<std::pair<std::string, Digest>> commitments;  // sorted by name
  CredentialMetadata metadata;
  Bytes proof;

  // The byte string the issuer signs: domain tag, commitments, metadata.
  Bytes signing_payload() const;
};

struct CredentialData {
  std::vector<ClaimRecord> openings;  // sorted by name

  const ClaimRecord* find(const std::string& name) const;
};

struct IssuedCredential {
  VerifiableCredential credential;
  CredentialData data;
};

// Salts each claim, commits, signs. Claims need not arrive sorted.
IssuedCredential issue(const SigningKey& issuer_key, const CredentialMetadata& metadata,
                       const std::vector<std::pair<std::string, Bytes>>& claims,
                       RandomSource& rng, size_t salt_bytes = kDefaultSaltBytes);

enum class CredentialCheck {
  accept,
  reject_signature,
  reject_expiry,
  reject_format,
};

const char* to_string(CredentialCheck c);

// Never throws; coarse reason classes only.
CredentialCheck verify_credential(const VerifiableCredential& vc,
                                  const KeyDirectory& directory, int64_t now);

bool verify_opening(const Digest& x, BytesView value, BytesView salt);

Bytes encode_credential(const VerifiableCredential& vc);
VerifiableCredential decode_credential(BytesView in);
Bytes encode_credential_data(const CredentialData& data);
CredentialData decode_credential_data(BytesView in);

// Hex-annotated text form for eyeballing; not parsed back.
std::string describe_credential(const VerifiableCredential& vc);

int64_t unix_now();

}  // namespace codssi
