#include "codssi/credential.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "codssi/codec.hpp"

namespace codssi {
namespace {

constexpr std::string_view kSigningTag = "CODSSI-VC-v1";
constexpr std::string_view kVcMagic = "CODSSI/VC1";
constexpr std::string_view kDataMagic = "CODSSI/DC1";

void encode_metadata(Writer& w, const CredentialMetadata& m) {
  w.str(m.issuer_id);
  w.str(m.subject_id);
  w.str(m.type);
  w.i64(m.issued_at);
  w.i64(m.expires_at);
}

CredentialMetadata decode_metadata(Reader& r) {
  CredentialMetadata m;
  m.issuer_id = r.str();
  m.subject_id = r.str();
  m.type = r.str();
  m.issued_at = r.i64();
  m.expires_at = r.i64();
  return m;
}

void encode_body(Writer& w, const VerifiableCredential& vc) {
  w.u32(static_cast<uint32_t>(vc.commitments.size()));
  for (const auto& [name, digest] : vc.commitments) {
    w.str(name);
    w.raw(digest.view());
  }
  encode_metadata(w, vc.metadata);
}

bool sorted_unique_names(const std::vector<std::pair<std::string, Digest>>& c) {
  for (size_t i = 1; i < c.size(); ++i) {
    if (c[i - 1].first >= c[i].first) return false;
  }
  return true;
}

}  // namespace

Bytes VerifiableCredential::signing_payload() const {
  Writer w;
  w.str(kSigningTag);
  encode_body(w, *this);
  return w.take();
}

const ClaimRecord* CredentialData::find(const std::string& name) const {
  for (const auto& rec : openings) {
    if (rec.name == name) return &rec;
  }
  return nullptr;
}

IssuedCredential issue(const SigningKey& issuer_key, const CredentialMetadata& metadata,
                       const std::vector<std::pair<std::string, Bytes>>& claims,
                       RandomSource& rng, size_t salt_bytes) {
  if (claims.empty()) throw EmptyClaimSet();

  IssuedCredential out;
  out.credential.metadata = metadata;
  for (const auto& [name, value] : claims) {
    if (name.empty()) throw Error("claim name must be nonempty");
    ClaimRecord rec;
    rec.name = name;
    rec.value = value;
    rec.salt = rng.bytes(salt_bytes);
    out.credential.commitments.emplace_back(name, commit(rec.value, rec.salt));
    out.data.openings.push_back(std::move(rec));
  }

  auto by_name = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::sort(out.credential.commitments.begin(), out.credential.commitments.end(), by_name);
  std::sort(out.data.openings.begin(), out.data.openings.end(),
            [](const ClaimRecord& a, const ClaimRecord& b) { return a.name < b.name; });
  for (size_t i = 1; i < out.credential.commitments.size(); ++i) {
    if (out.credential.commitments[i - 1].first == out.credential.commitments[i].first) {
      throw DuplicateClaimName(out.credential.commitments[i].first);
    }
  }

  out.credential.proof = issuer_key.sign(out.credential.signing_payload());
  return out;
}

const char* to_string(CredentialCheck c) {
  switch (c) {
    case CredentialCheck::accept: return "accept";
    case CredentialCheck::reject_signature: return "reject:signature";
    case CredentialCheck::reject_expiry: return "reject:expiry";
    case CredentialCheck::reject_format: return "reject:format";
  }
  return "reject:format";
}

CredentialCheck verify_credential(const VerifiableCredential& vc,
                                  const KeyDirectory& directory, int64_t now) {
  if (vc.commitments.empty() || !sorted_unique_names(vc.commitments)) {
    return CredentialCheck::reject_format;
  }
  if (vc.metadata.issuer_id.empty() || vc.metadata.subject_id.empty()) {
    return CredentialCheck::reject_format;
  }
  auto issuer_key = directory.lookup(vc.metadata.issuer_id);
  if (!issuer_key) return CredentialCheck::reject_signature;
  if (!signature_verify(*issuer_key, vc.signing_payload(), vc.proof)) {
    return CredentialCheck::reject_signature;
  }
  if (vc.metadata.expires_at != 0 && now >= vc.metadata.expires_at) {
    return CredentialCheck::reject_expiry;
  }
  return CredentialCheck::accept;
}

bool verify_opening(const Digest& x, BytesView value, BytesView salt) {
  Digest recomputed = commit(value, salt);
  return ct_equal(recomputed.view(), x.view());
}

Bytes encode_credential(const VerifiableCredential& vc) {
  Writer w;
  w.str(kVcMagic);
  encode_body(w, vc);
  w.bytes(vc.proof);
  return w.take();
}

VerifiableCredential decode_credential(BytesView in) {
  Reader r(in);
  if (r.str() != kVcMagic) throw CodecError("bad credential magic", 0);
  VerifiableCredential vc;
  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    Digest d;
    BytesView raw = r.raw(d.bytes.size());
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    vc.commitments.emplace_back(std::move(name), d);
  }
  vc.metadata = decode_metadata(r);
  vc.proof = r.bytes();
  r.expect_end();
  return vc;
}

Bytes encode_credential_data(const CredentialData& data) {
  Writer w;
  w.str(kDataMagic);
  w.u32(static_cast<uint32_t>(data.openings.size()));
  for (const auto& rec : data.openings) {
    w.str(rec.name);
    w.bytes(rec.value);
    w.bytes(rec.salt);
  }
  return w.take();
}

CredentialData decode_credential_data(BytesView in) {
  Reader r(in);
  if (r.str() != kDataMagic) throw CodecError("bad credential-data magic", 0);
  CredentialData data;
  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    ClaimRecord rec;
    rec.name = r.str();
    rec.value = r.bytes();
    rec.salt = r.bytes();
    data.openings.push_back(std::move(rec));
  }
  r.expect_end();
  return data;
}

std::string describe_credential(const VerifiableCredential& vc) {
  std::ostringstream os;
  os << "credential type=" << vc.metadata.type << " issuer=" << vc.metadata.issuer_id
     << " subject=" << vc.metadata.subject_id << " issued_at=" << vc.metadata.issued_at
     << " expires_at=" << vc.metadata.expires_at << "\n";
  for (const auto& [name, digest] : vc.commitments) {
    os << "  " << name << " = " << to_hex(digest.view()) << "\n";
  }
  os << "proof " << to_hex(vc.proof) << "\n";
  return os.str();
}

int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace codssi
