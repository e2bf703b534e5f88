#include "codssi/presentation.hpp"

#include <algorithm>

#include "codssi/codec.hpp"

namespace codssi {
namespace {

constexpr std::string_view kSigningTag = "CODSSI-VP-v1";
constexpr std::string_view kVpMagic = "CODSSI/VP1";
constexpr std::string_view kDataMagic = "CODSSI/PD1";
constexpr std::string_view kSecretMagic = "CODSSI/SK1";

void encode_vp_body(Writer& w, const VerifiablePresentation& vp) {
  w.u32(static_cast<uint32_t>(vp.credentials.size()));
  for (const auto& vc : vp.credentials) {
    w.bytes(encode_credential(vc));
  }
  w.str(vp.metadata.holder_id);
  w.str(vp.metadata.audience_id);
  w.bytes(vp.metadata.nonce);
  w.i64(vp.metadata.created_at);
}

}  // namespace

Bytes VerifiablePresentation::signing_payload() const {
  Writer w;
  w.str(kSigningTag);
  encode_vp_body(w, *this);
  return w.take();
}

const EncryptedClaimEntry* EncryptedClaimSet::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const Scalar& PresentationSecret::msk() const {
  if (closed_) throw SecretClosed();
  return msk_;
}

const Bytes& PresentationSecret::nonce() const {
  if (closed_) throw SecretClosed();
  return nonce_;
}

void PresentationSecret::close() {
  secure_wipe(msk_.bytes);
  closed_ = true;
}

Bytes encode_box_plaintext(BytesView value, BytesView salt) {
  Bytes m;
  append_framed(m, value);
  append_framed(m, salt);
  return m;
}

std::optional<std::pair<Bytes, Bytes>> split_box_plaintext(BytesView plaintext) {
  try {
    Reader r(plaintext);
    uint64_t vlen = r.u64();
    if (vlen > r.remaining()) return std::nullopt;
    BytesView v = r.raw(static_cast<size_t>(vlen));
    uint64_t tlen = r.u64();
    if (tlen != r.remaining()) return std::nullopt;
    BytesView t = r.raw(static_cast<size_t>(tlen));
    return std::make_pair(Bytes(v.begin(), v.end()), Bytes(t.begin(), t.end()));
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

PresentationBundle create_presentation(const Group& group, const SigningKey& holder_key,
                                       const std::string& holder_id,
                                       const std::vector<IssuedCredential>& inputs,
                                       const std::string& audience_id, RandomSource& rng,
                                       int64_t now) {
  if (inputs.empty()) throw EmptyClaimSet();

  Scalar msk = group.random_scalar(rng);

  VerifiablePresentation vp;
  PresentationData d_vp;
  for (const auto& input : inputs) {
    EncryptedClaimSet set;
    for (const auto& [name, digest] : input.credential.commitments) {
      const ClaimRecord* rec = input.data.find(name);
      if (!rec || !verify_opening(digest, rec->value, rec->salt)) {
        throw OpeningMismatch(name);
      }
      ClaimKey key = derive_key_direct(group, msk, digest);
      std::array<uint8_t, kAeadIvBytes> iv{};
      rng.fill(iv);
      Bytes m = encode_box_plaintext(rec->value, rec->salt);
      EncryptedClaimEntry entry;
      entry.name = name;
      entry.digest = digest;
      entry.box = aead_seal(key, iv, m, digest.view());
      set.entries.push_back(std::move(entry));
      secure_wipe(m);
    }
    d_vp.sets.push_back(std::move(set));
    vp.credentials.push_back(input.credential);
  }

  vp.metadata.holder_id = holder_id;
  vp.metadata.audience_id = audience_id;
  vp.metadata.nonce = rng.bytes(kPresentationNonceBytes);
  vp.metadata.created_at = now;
  vp.proof = holder_key.sign(vp.signing_payload());

  PresentationSecret secret(msk, vp.metadata.nonce);
  return PresentationBundle{std::move(vp), std::move(d_vp), std::move(secret)};
}

const char* to_string(PresentationCheck c) {
  switch (c) {
    case PresentationCheck::accept: return "accept";
    case PresentationCheck::reject_signature: return "reject:signature";
    case PresentationCheck::reject_credential: return "reject:credential";
    case PresentationCheck::reject_expiry: return "reject:expiry";
    case PresentationCheck::reject_structure: return "reject:structure";
    case PresentationCheck::reject_format: return "reject:format";
  }
  return "reject:format";
}

PresentationCheck validate_presentation(const VerifiablePresentation& vp,
                                        const PresentationData& d_vp,
                                        const KeyDirectory& directory,
                                        const std::string& expected_audience,
                                        int64_t now, int64_t max_age_seconds) {
  if (vp.credentials.empty() || vp.metadata.holder_id.empty() ||
      vp.metadata.nonce.empty()) {
    return PresentationCheck::reject_format;
  }
  auto holder_key = directory.lookup(vp.metadata.holder_id);
  if (!holder_key) return PresentationCheck::reject_signature;
  if (!signature_verify(*holder_key, vp.signing_payload(), vp.proof)) {
    return PresentationCheck::reject_signature;
  }
  if (vp.metadata.audience_id != expected_audience) {
    return PresentationCheck::reject_format;
  }
  if (vp.metadata.created_at > now + 60 ||
      now - vp.metadata.created_at > max_age_seconds) {
    return PresentationCheck::reject_expiry;
  }
  for (const auto& vc : vp.credentials) {
    if (verify_credential(vc, directory, now) != CredentialCheck::accept) {
      return PresentationCheck::reject_credential;
    }
  }
  if (d_vp.sets.size() != vp.credentials.size()) {
    return PresentationCheck::reject_structure;
  }
  for (size_t i = 0; i < d_vp.sets.size(); ++i) {
    const auto& commitments = vp.credentials[i].commitments;
    const auto& entries = d_vp.sets[i].entries;
    if (entries.size() != commitments.size()) {
      return PresentationCheck::reject_structure;
    }
    for (size_t j = 0; j < entries.size(); ++j) {
      if (entries[j].name != commitments[j].first ||
          entries[j].digest != commitments[j].second) {
        return PresentationCheck::reject_structure;
      }
    }
  }
  return PresentationCheck::accept;
}

size_t encrypted_payload_bytes(const PresentationData& d_vp) {
  size_t total = 0;
  for (const auto& set : d_vp.sets) {
    for (const auto& e : set.entries) {
      total += kAeadIvBytes + e.box.ciphertext.size() + kAeadTagBytes;
    }
  }
  return total;
}

Bytes encode_presentation(const VerifiablePresentation& vp) {
  Writer w;
  w.str(kVpMagic);
  encode_vp_body(w, vp);
  w.bytes(vp.proof);
  return w.take();
}

VerifiablePresentation decode_presentation(BytesView in) {
  Reader r(in);
  if (r.str() != kVpMagic) throw CodecError("bad presentation magic", 0);
  VerifiablePresentation vp;
  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    vp.credentials.push_back(decode_credential(r.bytes()));
  }
  vp.metadata.holder_id = r.str();
  vp.metadata.audience_id = r.str();
  vp.metadata.nonce = r.bytes();
  vp.metadata.created_at = r.i64();
  vp.proof = r.bytes();
  r.expect_end();
  return vp;
}

Bytes encode_presentation_data(const PresentationData& d_vp) {
  Writer w;
  w.str(kDataMagic);
  w.u32(static_cast<uint32_t>(d_vp.sets.size()));
  for (const auto& set : d_vp.sets) {
    w.u32(static_cast<uint32_t>(set.entries.size()));
    for (const auto& e : set.entries) {
      w.str(e.name);
      w.raw(e.digest.view());
      w.raw(BytesView(e.box.iv.data(), e.box.iv.size()));
      w.bytes(e.box.ciphertext);
      w.raw(BytesView(e.box.tag.data(), e.box.tag.size()));
    }
  }
  return w.take();
}

PresentationData decode_presentation_data(BytesView in) {
  Reader r(in);
  if (r.str() != kDataMagic) throw CodecError("bad presentation-data magic", 0);
  PresentationData d_vp;
  uint32_t sets = r.u32();
  for (uint32_t i = 0; i < sets; ++i) {
    EncryptedClaimSet set;
    uint32_t entries = r.u32();
    for (uint32_t j = 0; j < entries; ++j) {
      EncryptedClaimEntry e;
      e.name = r.str();
      BytesView d = r.raw(e.digest.bytes.size());
      std::copy(d.begin(), d.end(), e.digest.bytes.begin());
      BytesView iv = r.raw(e.box.iv.size());
      std::copy(iv.begin(), iv.end(), e.box.iv.begin());
      e.box.ciphertext = r.bytes();
      BytesView tag = r.raw(e.box.tag.size());
      std::copy(tag.begin(), tag.end(), e.box.tag.begin());
      set.entries.push_back(std::move(e));
    }
    d_vp.sets.push_back(std::move(set));
  }
  r.expect_end();
  return d_vp;
}

Bytes encode_presentation_secret(const PresentationSecret& secret,
                                 const std::string& group_name) {
  Writer w;
  w.str(kSecretMagic);
  w.str(group_name);
  w.bytes(secret.msk().bytes);
  w.bytes(secret.nonce());
  return w.take();
}

std::pair<PresentationSecret, std::string> decode_presentation_secret(BytesView in) {
  Reader r(in);
  if (r.str() != kSecretMagic) throw CodecError("bad secret magic", 0);
  std::string group_name = r.str();
  Scalar msk;
  msk.bytes = r.bytes();
  Bytes nonce = r.bytes();
  r.expect_end();
  return {PresentationSecret(std::move(msk), std::move(nonce)), std::move(group_name)};
}

}  // namespace codssi
