#include "codssi/attacks.hpp"

#include <cstdio>
#include <deque>
#include <optional>
#include <sstream>
#include <thread>

#include "codssi/aead.hpp"
#include "codssi/oprf.hpp"
#include "codssi/sha3.hpp"

namespace codssi {
namespace {

struct Actors {
  SigningKey issuer_key;
  SigningKey holder_key;
  SigningKey verifier_key;
  KeyDirectory directory;
  CredentialMetadata metadata;
};

Actors make_actors(RandomSource& rng) {
  Actors a{SigningKey::generate(rng), SigningKey::generate(rng),
           SigningKey::generate(rng), {}, {}};
  a.directory.add("issuer", a.issuer_key.public_key());
  a.directory.add("holder", a.holder_key.public_key());
  a.directory.add("verifier", a.verifier_key.public_key());
  a.metadata = CredentialMetadata{"issuer", "holder", "attack-fixture", unix_now(), 0};
  return a;
}

std::vector<std::pair<std::string, Bytes>> make_claims(RandomSource& rng, size_t n) {
  std::vector<std::pair<std::string, Bytes>> claims;
  claims.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    char name[8];
    std::snprintf(name, sizeof(name), "k%02zu", i);
    claims.emplace_back(name, to_bytes(to_hex(rng.bytes(15))));
  }
  return claims;
}

template <typename T>
void shuffle_with(std::vector<T>& v, RandomSource& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng.next_u64() % i;
    std::swap(v[i - 1], v[j]);
  }
}

struct Corrupt {
  size_t message = 0;  // write_all call index on the wrapped side
  size_t offset = 0;
  uint8_t mask = 0x01;
};

// Wraps one party's end of a stream. Can flip one byte of one outgoing
// message (in-flight tampering as the receiver sees it), feed recorded bytes
// into the read path ahead of live traffic (replay injection), and record
// every message sent. One message = one write_all call, which is how the
// frame channel sends blobs.
class MeddlerStream final : public ByteStream {
 public:
  explicit MeddlerStream(std::unique_ptr<ByteStream> inner)
      : inner_(std::move(inner)) {}

  void set_corruption(Corrupt c) { corrupt_ = c; }
  void set_injection(size_t after_write, Bytes data) {
    inject_after_ = after_write;
    inject_data_ = std::move(data);
  }
  const std::vector<Bytes>& writes() const { return writes_; }

  bool read_exact(std::span<uint8_t> out) override {
    size_t got = 0;
    while (got < out.size() && !pending_.empty()) {
      out[got++] = pending_.front();
      pending_.pop_front();
    }
    if (got == out.size()) return true;
    bool ok = inner_->read_exact(out.subspan(got));
    if (!ok && got > 0) throw TransportError("stream closed mid-message");
    return ok;
  }

  void write_all(BytesView data) override {
    Bytes copy(data.begin(), data.end());
    size_t idx = write_index_++;
    if (corrupt_ && idx == corrupt_->message && corrupt_->offset < copy.size()) {
      copy[corrupt_->offset] ^= corrupt_->mask;
    }
    writes_.push_back(copy);
    inner_->write_all(copy);
    if (inject_data_ && idx == inject_after_) {
      pending_.insert(pending_.end(), inject_data_->begin(), inject_data_->end());
      inject_data_.reset();
    }
  }

  void close() override { inner_->close(); }
  void set_read_timeout(std::chrono::milliseconds timeout) override {
    inner_->set_read_timeout(timeout);
  }

 private:
  std::unique_ptr<ByteStream> inner_;
  std::optional<Corrupt> corrupt_;
  std::optional<size_t> inject_after_;
  std::optional<Bytes> inject_data_;
  std::deque<uint8_t> pending_;
  std::vector<Bytes> writes_;
  size_t write_index_ = 0;
};

using DataMutator =
    std::function<void(PresentationData&, const PresentationSecret&, RandomSource&)>;

struct SessionSpec {
  std::vector<std::string> picks;  // claim names, credential 0
  bool adaptive = false;
  uint32_t quota = 0;  // 0 = picks.size()
  DataMutator mutate_data;
  std::optional<Corrupt> client_corrupt;
  std::optional<Corrupt> holder_corrupt;
  std::optional<std::pair<size_t, Bytes>> client_inject;
  std::optional<std::pair<size_t, Bytes>> holder_inject;
  std::chrono::milliseconds timeout{2000};
};

struct RunOutcome {
  bool client_completed = false;
  bool values_correct = false;
  std::string error_kind;  // "", "claim_verification", "quota", "session_rejected",
                           // "transport", "handshake", "other"
  HolderTranscript transcript;
  uint32_t evaluations = 0;
  size_t client_dropped = 0;
  std::vector<Bytes> client_writes;
  std::vector<Bytes> holder_writes;
};

// One full protocol run over an in-process pipe: handshake, offer, batch or
// adaptive disclosure, close. The holder serves on a spawned thread; every
// failure mode is recorded rather than propagated.
RunOutcome run_session(const Actors& a, const IssuedCredential& issued,
                       std::shared_ptr<const Group> group, const SessionSpec& spec,
                       uint64_t seed) {
  RunOutcome out;
  SeededRandom setup_rng(seed * 4 + 1);
  SeededRandom holder_rng(seed * 4 + 2);
  SeededRandom client_rng(seed * 4 + 3);

  std::vector<IssuedCredential> inputs{issued};
  PresentationBundle bundle =
      create_presentation(*group, a.holder_key, "holder", inputs, "verifier", setup_rng);
  Bytes vp_bytes = encode_presentation(bundle.vp);
  PresentationData data = bundle.data;
  if (spec.mutate_data) spec.mutate_data(data, bundle.secret, setup_rng);
  Bytes dvp_bytes = encode_presentation_data(data);

  uint32_t quota = spec.quota ? spec.quota : static_cast<uint32_t>(spec.picks.size());
  HolderOprf oprf(group, std::move(bundle.secret), quota);

  auto [client_end, holder_end] = loopback_pair();
  auto client_wrap = std::make_unique<MeddlerStream>(std::move(client_end));
  auto holder_wrap = std::make_unique<MeddlerStream>(std::move(holder_end));
  MeddlerStream* client_tap = client_wrap.get();
  MeddlerStream* holder_tap = holder_wrap.get();
  client_wrap->set_read_timeout(spec.timeout);
  holder_wrap->set_read_timeout(spec.timeout);
  if (spec.client_corrupt) client_tap->set_corruption(*spec.client_corrupt);
  if (spec.holder_corrupt) holder_tap->set_corruption(*spec.holder_corrupt);
  if (spec.client_inject) {
    client_tap->set_injection(spec.client_inject->first, spec.client_inject->second);
  }
  if (spec.holder_inject) {
    holder_tap->set_injection(spec.holder_inject->first, spec.holder_inject->second);
  }

  FrameChannel client_ch(std::move(client_wrap));
  FrameChannel holder_ch(std::move(holder_wrap));

  std::thread holder_thread([&] {
    try {
      HandshakeResult hs =
          holder_ch.handshake_server(a.directory, a.holder_key, "holder", holder_rng);
      serve_disclosure(holder_ch, oprf, a.holder_key, hs, vp_bytes, dvp_bytes,
                       holder_rng, &out.transcript);
    } catch (const Error&) {
    }
    holder_ch.close();
  });

  std::vector<DisclosedClaim> got;
  std::optional<DisclosureClient> client;
  try {
    HandshakeResult hs =
        client_ch.handshake_client(a.directory, a.verifier_key, "verifier", client_rng);
    client.emplace(client_ch, a.directory, group, hs, "verifier", client_rng);
    client->await_offer();
    if (spec.adaptive) {
      size_t next = 0;
      DisclosureClient::Picker picker =
          [&](const std::vector<DisclosedClaim>&)
          -> std::optional<std::pair<size_t, std::string>> {
        if (next >= spec.picks.size()) return std::nullopt;
        return std::make_pair(size_t{0}, spec.picks[next++]);
      };
      got = client->disclose_adaptive(picker);
    } else {
      DisclosureSelection sel;
      for (const auto& name : spec.picks) sel.picks.emplace_back(0, name);
      got = client->disclose_batch(sel);
    }
    client->finish();
    out.client_completed = true;
  } catch (const ClaimVerificationFailure&) {
    out.error_kind = "claim_verification";
  } catch (const QuotaExceededError&) {
    out.error_kind = "quota";
  } catch (const SessionRejected&) {
    out.error_kind = "session_rejected";
  } catch (const HandshakeFailure&) {
    out.error_kind = "handshake";
  } catch (const TransportError&) {
    out.error_kind = "transport";
  } catch (const Error&) {
    out.error_kind = "other";
  }
  if (client) out.client_dropped = client->dropped_frames();
  client_ch.close();
  holder_thread.join();

  out.evaluations = oprf.used();
  out.client_writes = client_tap->writes();
  out.holder_writes = holder_tap->writes();

  if (out.client_completed) {
    out.values_correct = got.size() == spec.picks.size();
    for (size_t i = 0; i < got.size() && out.values_correct; ++i) {
      const ClaimRecord* rec = issued.data.find(spec.picks[i]);
      out.values_correct = rec != nullptr && got[i].claim_name == spec.picks[i] &&
                           got[i].value == rec->value && got[i].salt == rec->salt;
    }
  }
  return out;
}

// Tampering counts as detected when some party raised, or when the holder's
// transcript shows the disturbance (lost close, dropped frames). A completed
// run is a miss unless the recovered values are right AND both transcripts
// are clean, i.e. silent wrong output is the worst miss of all.
bool tamper_detected(const RunOutcome& out) {
  if (!out.client_completed) return true;
  if (!out.values_correct) return false;
  return !out.transcript.saw_close || out.transcript.dropped_frames > 0 ||
         out.client_dropped > 0;
}

std::string outcome_brief(const RunOutcome& out) {
  std::ostringstream os;
  os << (out.client_completed ? "completed" : "failed:" + out.error_kind)
     << " values=" << (out.values_correct ? "ok" : "bad")
     << " close=" << (out.transcript.saw_close ? "y" : "n")
     << " holder_dropped=" << out.transcript.dropped_frames
     << " client_dropped=" << out.client_dropped;
  return os.str();
}

}  // namespace

SelectiveFailureReport attack_selective_failure(uint64_t seed, size_t scenarios) {
  SelectiveFailureReport report;
  SeededRandom rng(seed);
  auto group = secp256k1_group();
  Actors a = make_actors(rng);

  for (size_t k = 0; k < scenarios; ++k) {
    SelectiveFailureCase c;
    c.index = k;
    c.deviation = (k % 4 < 2) ? 1 : 2;
    c.target_selected = (k % 2 == 0);
    c.adaptive = (k / 2) % 2 == 1;
    c.predicted_abort = c.target_selected;

    size_t n = 4 + rng.next_u64() % 9;
    c.n_claims = n;
    auto claims = make_claims(rng, n);
    IssuedCredential issued = issue(a.issuer_key, a.metadata, claims, rng);
    size_t target = rng.next_u64() % n;
    c.target_claim = claims[target].first;

    std::vector<size_t> pool;
    for (size_t i = 0; i < n; ++i) {
      if (i != target) pool.push_back(i);
    }
    shuffle_with(pool, rng);
    size_t s = c.target_selected ? 1 + rng.next_u64() % n : 1 + rng.next_u64() % (n - 1);
    std::vector<size_t> chosen;
    if (c.target_selected) {
      chosen.push_back(target);
      for (size_t i = 0; i + 1 < s; ++i) chosen.push_back(pool[i]);
      shuffle_with(chosen, rng);
    } else {
      chosen.assign(pool.begin(), pool.begin() + static_cast<long>(s));
    }

    SessionSpec spec;
    spec.adaptive = c.adaptive;
    spec.quota = static_cast<uint32_t>(n);
    for (size_t i : chosen) spec.picks.push_back(claims[i].first);
    spec.mutate_data = [&](PresentationData& d, const PresentationSecret& secret,
                           RandomSource& mrng) {
      for (auto& entry : d.sets[0].entries) {
        if (entry.name != c.target_claim) continue;
        const ClaimRecord* rec = issued.data.find(entry.name);
        std::array<uint8_t, kAeadIvBytes> iv{};
        mrng.fill(iv);
        if (c.deviation == 1) {
          Bytes v = rec->value;
          v[0] ^= 0x01;
          ClaimKey key = derive_key_direct(*group, secret.msk(), entry.digest);
          entry.box = aead_seal(key, iv, encode_box_plaintext(v, rec->salt),
                                entry.digest.view());
        } else {
          Digest wrong = entry.digest;
          wrong.bytes[0] ^= 0x01;
          ClaimKey key = derive_key_direct(*group, secret.msk(), wrong);
          entry.box = aead_seal(key, iv, encode_box_plaintext(rec->value, rec->salt),
                                entry.digest.view());
        }
        // White-box probe with the honest key, independent of the protocol
        // run: which stage would reject this box?
        ClaimKey true_key = derive_key_direct(*group, secret.msk(), entry.digest);
        auto m = aead_open(true_key, entry.box, entry.digest.view());
        if (!m) {
          c.failure_stage = "aead";
        } else {
          auto parts = split_box_plaintext(*m);
          bool opens = parts && verify_opening(entry.digest, parts->first, parts->second);
          c.failure_stage = opens ? "none" : "opening";
        }
      }
    };

    RunOutcome out = run_session(a, issued, group, spec, seed + 101 * (k + 1));
    c.observed_abort = out.error_kind == "claim_verification";
    c.holder_saw_completion = out.transcript.saw_close;

    bool clean = out.client_completed && out.values_correct;
    std::string expected_stage = c.deviation == 1 ? "opening" : "aead";
    c.agrees = c.observed_abort == c.predicted_abort &&
               clean == !c.predicted_abort &&
               c.holder_saw_completion == !c.predicted_abort &&
               c.failure_stage == expected_stage;
    report.cases.push_back(c);
  }

  report.all_agree = true;
  for (const auto& c : report.cases) report.all_agree = report.all_agree && c.agrees;
  return report;
}

std::string SelectiveFailureReport::text() const {
  std::ostringstream os;
  os << "selective-failure scenarios: " << cases.size() << "\n";
  for (const auto& c : cases) {
    os << "  #" << c.index << " dev=" << c.deviation << " n=" << c.n_claims
       << " target=" << c.target_claim << (c.target_selected ? " selected" : " skipped")
       << (c.adaptive ? " adaptive" : " batch")
       << " predicted=" << (c.predicted_abort ? "abort" : "complete")
       << " observed=" << (c.observed_abort ? "abort" : "complete")
       << " holder_saw_close=" << (c.holder_saw_completion ? "y" : "n")
       << " stage=" << c.failure_stage << (c.agrees ? "" : "  <-- DISAGREES") << "\n";
  }
  os << (all_agree ? "all scenarios agree with the predicted outcome table\n"
                   : "DISAGREEMENT with the predicted outcome table\n");
  return os.str();
}

TamperReport attack_tamper_and_replay(uint64_t seed) {
  TamperReport report;
  SeededRandom rng(seed);
  auto group = secp256k1_group();
  Actors a = make_actors(rng);

  auto claims = make_claims(rng, 4);
  IssuedCredential issued = issue(a.issuer_key, a.metadata, claims, rng);
  uint64_t scenario_seed = seed + 7000;

  // Field sizes of one encrypted entry, from a probe presentation.
  size_t ct_len = 0;
  {
    SeededRandom probe_rng(seed + 5);
    std::vector<IssuedCredential> inputs{issued};
    PresentationBundle probe = create_presentation(*group, a.holder_key, "holder",
                                                   inputs, "verifier", probe_rng);
    ct_len = probe.data.sets[0].entries[0].box.ciphertext.size();
  }

  // Part 1: every byte of every field of the encrypted claim set, flipped at
  // the holder before the offer; the verifier then requests that claim.
  struct FieldSpec {
    const char* name;
    size_t size;
  };
  const FieldSpec fields[] = {
      {"iv", kAeadIvBytes}, {"ct", ct_len}, {"tag", kAeadTagBytes}, {"aad", kSha3_512Bytes}};
  for (size_t e = 0; e < claims.size(); ++e) {
    for (const auto& field : fields) {
      for (size_t off = 0; off < field.size; ++off) {
        SessionSpec spec;
        spec.picks = {claims[e].first};
        spec.quota = 4;
        spec.timeout = std::chrono::milliseconds(500);
        std::string field_name = field.name;
        spec.mutate_data = [&, field_name, off, e](PresentationData& d,
                                                   const PresentationSecret&,
                                                   RandomSource&) {
          auto& entry = d.sets[0].entries[e];
          if (field_name == "iv") {
            entry.box.iv[off] ^= 0x01;
          } else if (field_name == "ct") {
            entry.box.ciphertext[off] ^= 0x01;
          } else if (field_name == "tag") {
            entry.box.tag[off] ^= 0x01;
          } else {
            entry.digest.bytes[off] ^= 0x01;
          }
        };
        RunOutcome out = run_session(a, issued, group, spec, scenario_seed++);
        report.dvp_flips++;
        if (tamper_detected(out)) {
          report.dvp_detected++;
        } else {
          std::ostringstream label;
          label << "dvp entry=" << e << " field=" << field.name << " off=" << off;
          report.misses.push_back({label.str(), outcome_brief(out)});
        }
      }
    }
  }

  // Part 2: every byte of every in-flight message of one honest session,
  // length prefixes and handshake included. An honest run fixes the message
  // sizes; all sizes are nonce-length and value-length determined, so they
  // are identical across runs.
  SessionSpec base;
  base.picks = {claims[0].first, claims[2].first};
  base.quota = 4;
  RunOutcome honest = run_session(a, issued, group, base, scenario_seed++);
  if (!honest.client_completed || !honest.values_correct || !honest.transcript.saw_close) {
    throw Error("tamper sweep: honest reference session failed");
  }

  for (int dir = 0; dir < 2; ++dir) {
    const auto& messages = dir == 0 ? honest.client_writes : honest.holder_writes;
    for (size_t m = 0; m < messages.size(); ++m) {
      for (size_t off = 0; off < messages[m].size(); ++off) {
        SessionSpec spec = base;
        spec.timeout = std::chrono::milliseconds(150);
        Corrupt c{m, off, 0x01};
        if (dir == 0) {
          spec.client_corrupt = c;
        } else {
          spec.holder_corrupt = c;
        }
        RunOutcome out = run_session(a, issued, group, spec, scenario_seed++);
        report.frame_flips++;
        if (tamper_detected(out)) {
          report.frame_detected++;
        } else {
          std::ostringstream label;
          label << "frame dir=" << (dir == 0 ? "verifier->holder" : "holder->verifier")
                << " msg=" << m << " off=" << off;
          report.misses.push_back({label.str(), outcome_brief(out)});
        }
      }
    }
  }

  // Part 3a: a response frame recorded from a finished session is injected
  // into a later session's read path. The client must drop it on the session
  // id and still complete with correct values from the live response.
  for (int t = 0; t < 3; ++t) {
    SessionSpec first;
    first.picks = {claims[static_cast<size_t>(t) % claims.size()].first};
    first.quota = 4;
    RunOutcome r1 = run_session(a, issued, group, first, scenario_seed++);
    report.replay_trials++;
    if (!r1.client_completed || r1.holder_writes.size() < 3) {
      report.misses.push_back({"replay response setup " + std::to_string(t),
                               outcome_brief(r1)});
      continue;
    }
    Bytes stale_response = r1.holder_writes[2];

    SessionSpec second;
    second.picks = {claims[0].first, claims[1].first};
    second.adaptive = true;
    second.quota = 4;
    // Client writes: hello, auth, request, request, close. The stale frame
    // surfaces while the client waits for the second live response.
    second.client_inject = {{3, stale_response}};
    RunOutcome r2 = run_session(a, issued, group, second, scenario_seed++);
    bool rejected = r2.client_completed && r2.values_correct &&
                    r2.client_dropped == 1 && r2.transcript.saw_close;
    if (rejected) {
      report.replay_rejected++;
    } else {
      report.misses.push_back({"replay response trial " + std::to_string(t),
                               outcome_brief(r2)});
    }
  }

  // Part 3b: a request frame from an old session replayed at the holder. It
  // must be refused without consuming an evaluation; only the live request
  // is ever answered.
  {
    SessionSpec first;
    first.picks = {claims[1].first};
    first.quota = 4;
    RunOutcome r1 = run_session(a, issued, group, first, scenario_seed++);
    report.replay_trials++;
    if (!r1.client_completed || r1.client_writes.size() < 3) {
      report.misses.push_back({"replay request setup", outcome_brief(r1)});
    } else {
      Bytes stale_request = r1.client_writes[2];
      SessionSpec second;
      second.picks = {claims[0].first};
      second.quota = 4;
      // Holder writes: server hello, offer. The stale request is read before
      // the live one and must be answered only with a mismatch error.
      second.holder_inject = {{1, stale_request}};
      RunOutcome r2 = run_session(a, issued, group, second, scenario_seed++);
      bool rejected = r2.transcript.dropped_frames == 1 && r2.evaluations <= 1 &&
                      !r2.values_correct;
      if (rejected) {
        report.replay_rejected++;
      } else {
        report.misses.push_back({"replay request trial", outcome_brief(r2)});
      }
    }
  }

  return report;
}

std::string TamperReport::text() const {
  std::ostringstream os;
  os << "encrypted-data byte flips: " << dvp_detected << "/" << dvp_flips
     << " detected\n"
     << "in-flight message byte flips: " << frame_detected << "/" << frame_flips
     << " detected\n"
     << "cross-session replays: " << replay_rejected << "/" << replay_trials
     << " rejected\n";
  for (const auto& miss : misses) {
    os << "  MISS " << miss.label << ": " << miss.outcome << "\n";
  }
  return os.str();
}

}  // namespace codssi
