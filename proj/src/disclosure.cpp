#include "codssi/disclosure.hpp"

#include <algorithm>
#include <set>

#include "codssi/sha3.hpp"

namespace codssi {
namespace {

const char* error_detail(WireErrorCode code) {
  switch (code) {
    case WireErrorCode::quota_exceeded: return "quota exceeded";
    case WireErrorCode::invalid_element: return "invalid element";
    case WireErrorCode::session_mismatch: return "session mismatch";
    case WireErrorCode::rejected: return "rejected";
    case WireErrorCode::internal: return "internal error";
  }
  return "internal error";
}

Frame error_frame(const Bytes& session_id, WireErrorCode code) {
  Frame f;
  f.kind = FrameKind::error;
  f.session_id = session_id;
  f.body = encode_error_body(ErrorBody{code, error_detail(code)});
  return f;
}

}  // namespace

Bytes derive_session_id(BytesView vp_nonce, std::string_view verifier_id,
                        BytesView fresh_material) {
  Sha3_512 h;
  h.update(to_bytes("CODSSI-SID-v1"));
  h.update_framed(vp_nonce);
  h.update_framed(BytesView(reinterpret_cast<const uint8_t*>(verifier_id.data()),
                            verifier_id.size()));
  h.update_framed(fresh_material);
  Sha3Digest d = h.finish();
  return Bytes(d.begin(), d.begin() + kSessionIdBytes);
}

Bytes session_fresh_material(BytesView holder_fresh_nonce, BytesView transcript_hash) {
  Bytes m;
  append_framed(m, holder_fresh_nonce);
  append_framed(m, transcript_hash);
  return m;
}

HolderOprf::HolderOprf(std::shared_ptr<const Group> group, PresentationSecret secret,
                       uint32_t quota)
    : group_(std::move(group)), secret_(std::move(secret)), quota_(quota) {
  if (quota_ == 0) throw Error("quota must be at least 1");
  if (secret_.closed()) throw SecretClosed();
}

bool HolderOprf::reserve(uint32_t n) {
  uint32_t current = used_.load();
  for (;;) {
    if (current + n > quota_) return false;
    if (used_.compare_exchange_weak(current, current + n)) return true;
  }
}

std::shared_ptr<HolderOprf::Session> HolderOprf::open_session(
    const std::string& verifier_id, BytesView fresh_material) {
  Bytes id = derive_session_id(secret_.nonce(), verifier_id, fresh_material);
  return std::shared_ptr<Session>(new Session(*this, std::move(id), verifier_id));
}

void HolderOprf::close() { secret_.close(); }

EvalResult HolderOprf::Session::evaluate(const std::vector<GroupElement>& request) {
  switch (state_.load()) {
    case SessionState::open: break;
    case SessionState::exhausted: return {EvalStatus::quota_exceeded, {}};
    case SessionState::closed: return {EvalStatus::session_closed, {}};
  }
  if (owner_.secret_.closed()) return {EvalStatus::session_closed, {}};

  const Group& g = *owner_.group_;
  for (const auto& a : request) {
    if (!g.element_valid(a)) return {EvalStatus::invalid_element, {}};
  }

  auto n = static_cast<uint32_t>(request.size());
  if (!owner_.reserve(n)) {
    state_.store(SessionState::exhausted);
    return {EvalStatus::quota_exceeded, {}};
  }
  used_.fetch_add(n);

  EvalResult out;
  out.status = EvalStatus::ok;
  out.elements.reserve(request.size());
  const Scalar& msk = owner_.secret_.msk();
  for (const auto& a : request) {
    out.elements.push_back(g.exp(a, msk));
  }
  return out;
}

void HolderOprf::Session::close() { state_.store(SessionState::closed); }

void serve_disclosure(FrameChannel& channel, HolderOprf& oprf,
                      const SigningKey& holder_key, const HandshakeResult& handshake,
                      BytesView vp_bytes, BytesView dvp_bytes, RandomSource& rng,
                      HolderTranscript* transcript) {
  OfferBody offer;
  offer.vp_bytes.assign(vp_bytes.begin(), vp_bytes.end());
  offer.dvp_bytes.assign(dvp_bytes.begin(), dvp_bytes.end());
  offer.quota = oprf.quota();
  offer.fresh_nonce = rng.bytes(32);
  offer.offer_sig =
      holder_key.sign(offer_signing_payload(offer, handshake.transcript_hash));

  Frame offer_frame;
  offer_frame.kind = FrameKind::offer;
  offer_frame.body = encode_offer_body(offer);
  channel.send(offer_frame);

  auto session = oprf.open_session(
      handshake.peer_id,
      session_fresh_material(offer.fresh_nonce, handshake.transcript_hash));

  for (;;) {
    std::optional<Frame> frame;
    try {
      frame = channel.recv();
    } catch (const TransportError&) {
      break;  // peer vanished or sent garbage; nothing left to serve
    }
    if (!frame) break;

    if (frame->session_id != session->id()) {
      // Foreign or replayed frame: never reaches the session, but the live
      // peer gets a uniform notice so it is not left waiting.
      if (transcript) transcript->dropped_frames++;
      channel.send(error_frame(session->id(), WireErrorCode::session_mismatch));
      continue;
    }

    if (frame->kind == FrameKind::close) {
      if (transcript) transcript->saw_close = true;
      session->close();
      break;
    }
    if (frame->kind != FrameKind::oprf_request) {
      channel.send(error_frame(session->id(), WireErrorCode::rejected));
      continue;
    }

    std::vector<GroupElement> request;
    try {
      request = decode_element_list(frame->body);
    } catch (const CodecError&) {
      channel.send(error_frame(session->id(), WireErrorCode::rejected));
      continue;
    }

    if (transcript) {
      transcript->request_sizes.push_back(request.size());
      for (const auto& e : request) transcript->received_elements.push_back(e.encoding);
    }

    EvalResult result = session->evaluate(request);
    switch (result.status) {
      case EvalStatus::ok: {
        Frame response;
        response.kind = FrameKind::oprf_response;
        response.session_id = session->id();
        response.body = encode_element_list(result.elements);
        channel.send(response);
        break;
      }
      case EvalStatus::quota_exceeded:
        if (transcript) transcript->quota_refused = true;
        channel.send(error_frame(session->id(), WireErrorCode::quota_exceeded));
        break;
      case EvalStatus::invalid_element:
        channel.send(error_frame(session->id(), WireErrorCode::invalid_element));
        break;
      case EvalStatus::session_closed:
        channel.send(error_frame(session->id(), WireErrorCode::rejected));
        break;
    }
  }
  session->close();
}

DisclosureClient::DisclosureClient(FrameChannel& channel, const KeyDirectory& directory,
                                   std::shared_ptr<const Group> group,
                                   HandshakeResult handshake, std::string verifier_id,
                                   RandomSource& rng)
    : channel_(channel),
      directory_(directory),
      group_(std::move(group)),
      handshake_(std::move(handshake)),
      verifier_id_(std::move(verifier_id)),
      rng_(rng) {}

const DisclosureClient::Offer& DisclosureClient::await_offer(int64_t now) {
  std::optional<Frame> frame = channel_.recv();
  if (!frame) throw SessionRejected("peer closed before offering");
  if (frame->kind != FrameKind::offer) throw SessionRejected("expected an offer");

  OfferBody body;
  Offer offer;
  try {
    body = decode_offer_body(frame->body);
    offer.vp = decode_presentation(body.vp_bytes);
    offer.d_vp = decode_presentation_data(body.dvp_bytes);
  } catch (const CodecError&) {
    throw SessionRejected("malformed offer");
  }
  offer.quota = body.quota;

  if (offer.vp.metadata.holder_id != handshake_.peer_id) {
    throw SessionRejected("presentation holder is not the authenticated peer");
  }
  auto holder_key = directory_.lookup(handshake_.peer_id);
  if (!holder_key ||
      !signature_verify(*holder_key,
                        offer_signing_payload(body, handshake_.transcript_hash),
                        body.offer_sig)) {
    throw SessionRejected("offer signature check failed");
  }
  PresentationCheck check =
      validate_presentation(offer.vp, offer.d_vp, directory_, verifier_id_, now);
  if (check != PresentationCheck::accept) {
    throw SessionRejected(std::string("presentation rejected: ") + to_string(check));
  }
  if (offer.quota < 1) throw SessionRejected("offer carries no quota");

  session_id_ = derive_session_id(
      offer.vp.metadata.nonce, verifier_id_,
      session_fresh_material(body.fresh_nonce, handshake_.transcript_hash));
  offer_ = std::move(offer);
  return *offer_;
}

const EncryptedClaimEntry& DisclosureClient::entry_for(size_t credential_index,
                                                       const std::string& name) const {
  if (credential_index >= offer_->d_vp.sets.size()) {
    throw SelectionError("credential index out of range");
  }
  const EncryptedClaimEntry* entry = offer_->d_vp.sets[credential_index].find(name);
  if (!entry) throw SelectionError("no such claim: " + name);
  return *entry;
}

std::vector<GroupElement> DisclosureClient::exchange(
    const std::vector<GroupElement>& blinded) {
  Frame request;
  request.kind = FrameKind::oprf_request;
  request.session_id = session_id_;
  request.body = encode_element_list(blinded);
  channel_.send(request);

  for (;;) {
    std::optional<Frame> frame = channel_.recv();
    if (!frame) throw TransportError("peer closed mid-session");
    if (frame->session_id != session_id_) {
      dropped_frames_++;  // replayed or foreign frame; keep waiting
      continue;
    }
    if (frame->kind == FrameKind::error) {
      ErrorBody err;
      try {
        err = decode_error_body(frame->body);
      } catch (const CodecError&) {
        throw TransportError("malformed frame");
      }
      if (err.code == WireErrorCode::quota_exceeded) throw QuotaExceededError();
      throw SessionRejected("holder refused the request");
    }
    if (frame->kind != FrameKind::oprf_response) {
      throw SessionRejected("unexpected frame kind");
    }
    std::vector<GroupElement> elements;
    try {
      elements = decode_element_list(frame->body);
    } catch (const CodecError&) {
      throw TransportError("malformed frame");
    }
    if (elements.size() != blinded.size()) {
      throw SessionRejected("response element count mismatch");
    }
    return elements;
  }
}

DisclosedClaim DisclosureClient::open_claim(size_t credential_index,
                                            const std::string& name,
                                            const Blinded& blinded,
                                            const GroupElement& evaluated) {
  const EncryptedClaimEntry& entry = entry_for(credential_index, name);
  try {
    ClaimKey key = finalize(*group_, entry.digest, evaluated, blinded.r);
    std::optional<Bytes> plaintext = aead_open(key, entry.box, entry.digest.view());
    if (!plaintext) throw ClaimVerificationFailure();
    auto parts = split_box_plaintext(*plaintext);
    if (!parts) throw ClaimVerificationFailure();
    if (!verify_opening(entry.digest, parts->first, parts->second)) {
      throw ClaimVerificationFailure();
    }
    DisclosedClaim claim;
    claim.credential_index = credential_index;
    claim.claim_name = name;
    claim.value = std::move(parts->first);
    claim.salt = std::move(parts->second);
    claim.digest = entry.digest;
    return claim;
  } catch (const InvalidElement&) {
    throw ClaimVerificationFailure();
  }
}

std::vector<DisclosedClaim> DisclosureClient::disclose_batch(
    const DisclosureSelection& selection) {
  if (!offer_) throw Error("no offer received yet");
  if (aborted_) throw SessionRejected("session already aborted");
  if (selection.picks.empty()) throw SelectionError("empty selection");
  if (selection.picks.size() > offer_->quota) {
    throw SelectionError("selection exceeds advertised quota");
  }
  std::set<std::pair<size_t, std::string>> seen;
  for (const auto& pick : selection.picks) {
    if (!seen.insert(pick).second) throw SelectionError("duplicate pick");
    entry_for(pick.first, pick.second);  // existence check before any traffic
  }

  std::vector<Blinded> blinds;
  std::vector<GroupElement> request;
  blinds.reserve(selection.picks.size());
  for (const auto& [index, name] : selection.picks) {
    blinds.push_back(blind(*group_, entry_for(index, name).digest, rng_));
    request.push_back(blinds.back().element);
  }

  std::vector<GroupElement> response = exchange(request);

  std::vector<DisclosedClaim> out;
  out.reserve(selection.picks.size());
  for (size_t i = 0; i < selection.picks.size(); ++i) {
    try {
      out.push_back(open_claim(selection.picks[i].first, selection.picks[i].second,
                               blinds[i], response[i]));
    } catch (const ClaimVerificationFailure&) {
      aborted_ = true;
      throw;
    }
  }
  return out;
}

std::vector<DisclosedClaim> DisclosureClient::disclose_adaptive(const Picker& picker) {
  if (!offer_) throw Error("no offer received yet");
  if (aborted_) throw SessionRejected("session already aborted");

  std::vector<DisclosedClaim> disclosed;
  std::set<std::pair<size_t, std::string>> seen;
  for (;;) {
    std::optional<std::pair<size_t, std::string>> pick = picker(disclosed);
    if (!pick) break;
    if (disclosed.size() >= offer_->quota) throw QuotaExceededError();
    if (!seen.insert(*pick).second) throw SelectionError("duplicate pick");
    const EncryptedClaimEntry& entry = entry_for(pick->first, pick->second);

    Blinded blinded = blind(*group_, entry.digest, rng_);
    std::vector<GroupElement> response = exchange({blinded.element});
    try {
      disclosed.push_back(open_claim(pick->first, pick->second, blinded, response[0]));
    } catch (const ClaimVerificationFailure&) {
      aborted_ = true;
      throw;
    }
  }
  return disclosed;
}

void DisclosureClient::finish() {
  if (session_id_.empty()) return;
  Frame close_frame;
  close_frame.kind = FrameKind::close;
  close_frame.session_id = session_id_;
  channel_.send(close_frame);
}

}  // namespace codssi
