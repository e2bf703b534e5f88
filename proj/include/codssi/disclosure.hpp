#pragma once

#include <atomic>
#include <functional>
#include <memory>

#include "codssi/presentation.hpp"
#include "codssi/transport.hpp"

namespace codssi {

inline constexpr size_t kSessionIdBytes = 32;

// session_id = H(vp nonce, verifier id, fresh material). Fresh material is
// the holder's offer nonce framed together with the handshake transcript
// hash, so ids never collide across connections or presentations.
Bytes derive_session_id(BytesView vp_nonce, std::string_view verifier_id,
                        BytesView fresh_material);
Bytes session_fresh_material(BytesView holder_fresh_nonce, BytesView transcript_hash);

enum class SessionState { open, exhausted, closed };

enum class EvalStatus { ok, quota_exceeded, invalid_element, session_closed };

struct EvalResult {
  EvalStatus status = EvalStatus::ok;
  std::vector<GroupElement> elements;
};

// Holder-side OPRF server over one presentation secret. The quota pool is
// shared by every session opened from this instance: concurrent sessions
// draw evaluations from one atomic counter, all-or-nothing per request.
class HolderOprf {
 public:
  HolderOprf(std::shared_ptr<const Group> group, PresentationSecret secret,
             uint32_t quota);
  HolderOprf(const HolderOprf&) = delete;
  HolderOprf& operator=(const HolderOprf&) = delete;

  class Session {
   public:
    const Bytes& id() const { return id_; }
    const std::string& verifier_id() const { return verifier_id_; }
    SessionState state() const { return state_.load(); }
    uint32_t used() const { return used_.load(); }

    // Validates every element, then reserves quota for the whole request
    // atomically; a request that does not fit is rejected in full.
    EvalResult evaluate(const std::vector<GroupElement>& request);
    void close();

   private:
    friend class HolderOprf;
    Session(HolderOprf& owner, Bytes id, std::string verifier_id)
        : owner_(owner), id_(std::move(id)), verifier_id_(std::move(verifier_id)) {}

    HolderOprf& owner_;
    Bytes id_;
    std::string verifier_id_;
    std::atomic<SessionState> state_{SessionState::open};
    std::atomic<uint32_t> used_{0};  // granted to this session
  };

  // Sessions keep a reference to this instance; it must outlive them.
  std::shared_ptr<Session> open_session(const std::string& verifier_id,
                                        BytesView fresh_material);

  uint32_t quota() const { return quota_; }
  uint32_t used() const { return used_.load(); }
  const Group& group() const { return *group_; }

  // Closes the secret; subsequent session opens and evaluations fail.
  void close();

 private:
  friend class Session;
  bool reserve(uint32_t n);

  std::shared_ptr<const Group> group_;
  PresentationSecret secret_;
  uint32_t quota_;
  std::atomic<uint32_t> used_{0};
};

struct DisclosureSelection {
  std::vector<std::pair<size_t, std::string>> picks;  // (credential index, claim name)
};

struct DisclosedClaim {
  size_t credential_index = 0;
  std::string claim_name;
  Bytes value;
  Bytes salt;
  Digest digest;
};

// A local validation failure: duplicate or unknown picks, or more picks than
// the advertised quota. Raised before anything is sent.
class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& what) : Error(what) {}
};

// Holder-side view of one served session, recorded for analysis: everything
// the holder's disclosure logic ever sees from the verifier.
struct HolderTranscript {
  std::vector<Bytes> received_elements;
  std::vector<size_t> request_sizes;
  size_t dropped_frames = 0;
  bool saw_close = false;
  bool quota_refused = false;
};

// Serves offer + evaluation loop on an authenticated channel until the peer
// closes. vp_bytes/dvp_bytes are sent as-is; the offer signature covers them
// together with the handshake transcript.
void serve_disclosure(FrameChannel& channel, HolderOprf& oprf,
                      const SigningKey& holder_key, const HandshakeResult& handshake,
                      BytesView vp_bytes, BytesView dvp_bytes, RandomSource& rng,
                      HolderTranscript* transcript = nullptr);

// Verifier-side client: receives and validates the offer, then runs batch or
// adaptive disclosure. Aborts the session on the first claim that fails to
// verify and sends nothing further.
class DisclosureClient {
 public:
  struct Offer {
    VerifiablePresentation vp;
    PresentationData d_vp;
    uint32_t quota = 0;
  };

  using Picker = std::function<std::optional<std::pair<size_t, std::string>>(
      const std::vector<DisclosedClaim>& so_far)>;

  DisclosureClient(FrameChannel& channel, const KeyDirectory& directory,
                   std::shared_ptr<const Group> group, HandshakeResult handshake,
                   std::string verifier_id, RandomSource& rng);

  // Throws SessionRejected on any offer that fails validation.
  const Offer& await_offer(int64_t now = unix_now());

  std::vector<DisclosedClaim> disclose_batch(const DisclosureSelection& selection);
  std::vector<DisclosedClaim> disclose_adaptive(const Picker& picker);

  void finish();  // polite close
  size_t dropped_frames() const { return dropped_frames_; }

 private:
  std::vector<GroupElement> exchange(const std::vector<GroupElement>& blinded);
  DisclosedClaim open_claim(size_t credential_index, const std::string& name,
                            const Blinded& blinded, const GroupElement& evaluated);
  const EncryptedClaimEntry& entry_for(size_t credential_index,
                                       const std::string& name) const;

  FrameChannel& channel_;
  const KeyDirectory& directory_;
  std::shared_ptr<const Group> group_;
  HandshakeResult handshake_;
  std::string verifier_id_;
  RandomSource& rng_;
  std::optional<Offer> offer_;
  Bytes session_id_;
  size_t dropped_frames_ = 0;
  bool aborted_ = false;
};

}  // namespace codssi
