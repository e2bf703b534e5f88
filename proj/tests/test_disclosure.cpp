#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "codssi/disclosure.hpp"
#include "codssi/errors.hpp"
#include "codssi/rng.hpp"

using namespace codssi;
using namespace std::chrono_literals;

namespace {

constexpr int64_t kNow = 1700000000;

struct Actors {
  SigningKey issuer_key = SigningKey::from_seed(Bytes(32, 0x01));
  SigningKey holder_key = SigningKey::from_seed(Bytes(32, 0x02));
  SigningKey verifier_key = SigningKey::from_seed(Bytes(32, 0x03));
  KeyDirectory directory;
  std::shared_ptr<const Group> group = secp256k1_group();
  SeededRandom rng{500};

  Actors() {
    directory.add("issuer", issuer_key.public_key());
    directory.add("holder", holder_key.public_key());
    directory.add("verifier", verifier_key.public_key());
  }

  IssuedCredential issue_n(size_t n, const std::string& prefix = "claim") {
    std::vector<std::pair<std::string, Bytes>> claims;
    for (size_t i = 0; i < n; ++i) {
      claims.emplace_back(prefix + std::to_string(i), rng.bytes(12));
    }
    CredentialMetadata meta{"issuer", "subject", "test", kNow - 100, 0};
    return issue(issuer_key, meta, claims, rng);
  }

  PresentationBundle present(const std::vector<IssuedCredential>& creds) {
    return create_presentation(*group, holder_key, "holder", creds, "verifier",
                               rng, kNow);
  }
};

// One served loopback session. The client body runs on the main thread; the
// holder serves on a helper thread until the stream drains.
struct SessionRun {
  HolderTranscript transcript;
  std::vector<DisclosedClaim> disclosed;
  std::string client_error;
};

SessionRun run_session(
    Actors& actors, HolderOprf& oprf, const PresentationBundle& bundle,
    const std::function<std::vector<DisclosedClaim>(DisclosureClient&)>& body,
    Bytes dvp_override = {}) {
  Bytes vp_bytes = encode_presentation(bundle.vp);
  Bytes dvp_bytes =
      dvp_override.empty() ? encode_presentation_data(bundle.data) : dvp_override;

  auto [cs, hs] = loopback_pair();
  cs->set_read_timeout(3000ms);
  hs->set_read_timeout(3000ms);
  FrameChannel client_channel(std::move(cs));
  FrameChannel holder_channel(std::move(hs));

  SessionRun run;
  std::thread holder([&] {
    SeededRandom rng(901);
    try {
      HandshakeResult hsr =
          holder_channel.handshake_server(actors.directory, actors.holder_key,
                                          "holder", rng);
      serve_disclosure(holder_channel, oprf, actors.holder_key, hsr, vp_bytes,
                       dvp_bytes, rng, &run.transcript);
    } catch (const ProtocolError&) {
    }
    holder_channel.close();
  });

  SeededRandom rng(902);
  try {
    HandshakeResult hsr = client_channel.handshake_client(
        actors.directory, actors.verifier_key, "verifier", rng);
    DisclosureClient client(client_channel, actors.directory, actors.group,
                            std::move(hsr), "verifier", rng);
    client.await_offer(kNow);
    run.disclosed = body(client);
    client.finish();
  } catch (const std::exception& e) {
    run.client_error = e.what();
  }
  client_channel.close();
  holder.join();
  return run;
}

void expect_matches_issued(const std::vector<DisclosedClaim>& disclosed,
                           const std::vector<IssuedCredential>& issued) {
  for (const auto& claim : disclosed) {
    ASSERT_LT(claim.credential_index, issued.size());
    const ClaimRecord* rec = issued[claim.credential_index].data.find(claim.claim_name);
    ASSERT_NE(rec, nullptr) << claim.claim_name;
    EXPECT_EQ(claim.value, rec->value) << claim.claim_name;
    EXPECT_EQ(claim.salt, rec->salt) << claim.claim_name;
    EXPECT_TRUE(verify_opening(claim.digest, claim.value, claim.salt));
  }
}

}  // namespace

// Vector computed with an independent SHA3-512 implementation over
// "CODSSI-SID-v1" and the three framed fields.
TEST(SessionId, KnownVector) {
  Bytes sid = derive_session_id(Bytes(32, 0x01), "verifier", Bytes(8, 0x02));
  EXPECT_EQ(sid.size(), kSessionIdBytes);
  EXPECT_EQ(to_hex(sid),
            "7790550374d1d981fe487b63e6fe8e0bb3186b00e54753b22807c21c42ee58c7");
}

TEST(SessionId, SensitiveToEveryInput) {
  Bytes base = derive_session_id(Bytes(32, 0x01), "verifier", Bytes(8, 0x02));
  EXPECT_NE(base, derive_session_id(Bytes(32, 0x02), "verifier", Bytes(8, 0x02)));
  EXPECT_NE(base, derive_session_id(Bytes(32, 0x01), "verified", Bytes(8, 0x02)));
  EXPECT_NE(base, derive_session_id(Bytes(32, 0x01), "verifier", Bytes(8, 0x03)));
}

TEST(Quota, CountsAndSticksWhenExhausted) {
  Actors a;
  auto bundle = a.present({a.issue_n(4)});
  HolderOprf oprf(a.group, std::move(bundle.secret), 3);
  auto session = oprf.open_session("verifier", Bytes(8, 0x01));

  auto element = [&](uint64_t i) {
    Digest x = commit(a.rng.bytes(8), a.rng.bytes(8));
    (void)i;
    return a.group->hash_to_group(x);
  };

  EXPECT_EQ(session->evaluate({element(0), element(1)}).status, EvalStatus::ok);
  EXPECT_EQ(oprf.used(), 2u);
  EXPECT_EQ(session->used(), 2u);

  // Two more do not fit; nothing is granted partially.
  EXPECT_EQ(session->evaluate({element(2), element(3)}).status,
            EvalStatus::quota_exceeded);
  EXPECT_EQ(oprf.used(), 2u);
  EXPECT_EQ(session->state(), SessionState::exhausted);

  // Exhaustion is sticky even for a request that would fit.
  EXPECT_EQ(session->evaluate({element(4)}).status, EvalStatus::quota_exceeded);
  EXPECT_EQ(oprf.used(), 2u);

  // A fresh session still draws from the remaining pool.
  auto second = oprf.open_session("verifier", Bytes(8, 0x02));
  EXPECT_EQ(second->evaluate({element(5)}).status, EvalStatus::ok);
  EXPECT_EQ(oprf.used(), 3u);
  EXPECT_EQ(second->evaluate({element(6)}).status, EvalStatus::quota_exceeded);
}

TEST(Quota, SessionCloseAndSecretClose) {
  Actors a;
  auto bundle = a.present({a.issue_n(2)});
  HolderOprf oprf(a.group, std::move(bundle.secret), 2);
  auto session = oprf.open_session("verifier", Bytes(8, 0x01));
  Digest x = commit(a.rng.bytes(8), a.rng.bytes(8));
  GroupElement e = a.group->hash_to_group(x);

  session->close();
  EXPECT_EQ(session->state(), SessionState::closed);
  EXPECT_EQ(session->evaluate({e}).status, EvalStatus::session_closed);

  auto live = oprf.open_session("verifier", Bytes(8, 0x02));
  oprf.close();
  EXPECT_EQ(live->evaluate({e}).status, EvalStatus::session_closed);
  EXPECT_THROW(oprf.open_session("verifier", Bytes(8, 0x03)), SecretClosed);
}

TEST(Quota, InvalidElementRefusedWithoutSpending) {
  Actors a;
  auto bundle = a.present({a.issue_n(2)});
  HolderOprf oprf(a.group, std::move(bundle.secret), 2);
  auto session = oprf.open_session("verifier", Bytes(8, 0x01));

  GroupElement good = a.group->hash_to_group(commit(a.rng.bytes(8), a.rng.bytes(8)));
  GroupElement bad{Bytes(33, 0x00)};
  EXPECT_EQ(session->evaluate({good, bad}).status, EvalStatus::invalid_element);
  EXPECT_EQ(oprf.used(), 0u);
  EXPECT_EQ(session->state(), SessionState::open);
  EXPECT_EQ(session->evaluate({good}).status, EvalStatus::ok);
}

TEST(Quota, DistinctSessionIds) {
  Actors a;
  auto bundle = a.present({a.issue_n(2)});
  HolderOprf oprf(a.group, std::move(bundle.secret), 2);
  auto s1 = oprf.open_session("verifier", Bytes(8, 0x01));
  auto s2 = oprf.open_session("verifier", Bytes(8, 0x02));
  auto s3 = oprf.open_session("other-verifier", Bytes(8, 0x01));
  EXPECT_NE(s1->id(), s2->id());
  EXPECT_NE(s1->id(), s3->id());
  EXPECT_NE(s2->id(), s3->id());
}

TEST(Quota, ConcurrentUnitRequestsGrantExactly) {
  Actors a;
  constexpr uint32_t kQuota = 5;
  constexpr int kClients = 8;
  for (int rep = 0; rep < 20; ++rep) {
    auto bundle = a.present({a.issue_n(2)});
    HolderOprf oprf(a.group, std::move(bundle.secret), kQuota);
    GroupElement e = a.group->hash_to_group(commit(a.rng.bytes(8), a.rng.bytes(8)));

    std::atomic<int> granted{0}, refused{0};
    std::vector<std::thread> threads;
    for (int c = 0; c < kClients; ++c) {
      threads.emplace_back([&, c] {
        auto session = oprf.open_session("v" + std::to_string(c), Bytes(8, uint8_t(c)));
        if (session->evaluate({e}).status == EvalStatus::ok) {
          granted.fetch_add(1);
        } else {
          refused.fetch_add(1);
        }
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(granted.load(), int(kQuota)) << "rep " << rep;
    EXPECT_EQ(refused.load(), kClients - int(kQuota));
    EXPECT_EQ(oprf.used(), kQuota);
  }
}

TEST(Session, BatchDisclosesSelectedClaims) {
  Actors a;
  auto issued = a.issue_n(8);
  auto bundle = a.present({issued});
  HolderOprf oprf(a.group, std::move(bundle.secret), 8);

  auto run = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    return c.disclose_batch({{{0, "claim2"}, {0, "claim5"}}});
  });

  EXPECT_TRUE(run.client_error.empty()) << run.client_error;
  ASSERT_EQ(run.disclosed.size(), 2u);
  EXPECT_EQ(run.disclosed[0].claim_name, "claim2");
  EXPECT_EQ(run.disclosed[1].claim_name, "claim5");
  expect_matches_issued(run.disclosed, {issued});
  EXPECT_EQ(oprf.used(), 2u);
  EXPECT_TRUE(run.transcript.saw_close);
  ASSERT_EQ(run.transcript.request_sizes.size(), 1u);
  EXPECT_EQ(run.transcript.request_sizes[0], 2u);
}

TEST(Session, FullDisclosureEqualsIssuance) {
  Actors a;
  auto issued = a.issue_n(8);
  auto bundle = a.present({issued});
  HolderOprf oprf(a.group, std::move(bundle.secret), 8);

  DisclosureSelection all;
  for (const auto& [name, digest] : issued.credential.commitments) {
    all.picks.emplace_back(0, name);
  }
  auto run = run_session(a, oprf, bundle,
                         [&](DisclosureClient& c) { return c.disclose_batch(all); });
  EXPECT_TRUE(run.client_error.empty()) << run.client_error;
  ASSERT_EQ(run.disclosed.size(), 8u);
  expect_matches_issued(run.disclosed, {issued});
  EXPECT_EQ(oprf.used(), 8u);
}

TEST(Session, BatchAndAdaptiveAgree) {
  Actors a;
  auto issued = a.issue_n(6);
  const std::vector<std::string> picks{"claim1", "claim3", "claim4"};

  auto bundle1 = a.present({issued});
  HolderOprf oprf1(a.group, std::move(bundle1.secret), 6);
  auto batch = run_session(a, oprf1, bundle1, [&](DisclosureClient& c) {
    DisclosureSelection sel;
    for (const auto& name : picks) sel.picks.emplace_back(0, name);
    return c.disclose_batch(sel);
  });

  auto bundle2 = a.present({issued});
  HolderOprf oprf2(a.group, std::move(bundle2.secret), 6);
  auto adaptive = run_session(a, oprf2, bundle2, [&](DisclosureClient& c) {
    size_t next = 0;
    return c.disclose_adaptive(
        [&](const std::vector<DisclosedClaim>&)
            -> std::optional<std::pair<size_t, std::string>> {
          if (next >= picks.size()) return std::nullopt;
          return std::make_pair(size_t{0}, picks[next++]);
        });
  });

  EXPECT_TRUE(batch.client_error.empty()) << batch.client_error;
  EXPECT_TRUE(adaptive.client_error.empty()) << adaptive.client_error;
  ASSERT_EQ(batch.disclosed.size(), picks.size());
  ASSERT_EQ(adaptive.disclosed.size(), picks.size());
  for (size_t i = 0; i < picks.size(); ++i) {
    EXPECT_EQ(batch.disclosed[i].claim_name, adaptive.disclosed[i].claim_name);
    EXPECT_EQ(batch.disclosed[i].value, adaptive.disclosed[i].value);
    EXPECT_EQ(batch.disclosed[i].salt, adaptive.disclosed[i].salt);
  }
  // Adaptive pays one round trip per claim, batch pays one total.
  EXPECT_EQ(batch.transcript.request_sizes, (std::vector<size_t>{3}));
  EXPECT_EQ(adaptive.transcript.request_sizes, (std::vector<size_t>{1, 1, 1}));
}

TEST(Session, AdaptivePickDependsOnDisclosedValue) {
  Actors a;
  auto issued = a.issue_n(4);
  Bytes claim0_value = issued.data.find("claim0")->value;
  // Route on the parity of the first disclosed byte.
  std::string branch = (claim0_value[0] % 2 == 0) ? "claim1" : "claim2";

  auto bundle = a.present({issued});
  HolderOprf oprf(a.group, std::move(bundle.secret), 4);
  auto run = run_session(a, oprf, bundle, [&](DisclosureClient& c) {
    return c.disclose_adaptive(
        [&](const std::vector<DisclosedClaim>& so_far)
            -> std::optional<std::pair<size_t, std::string>> {
          if (so_far.empty()) return std::make_pair(size_t{0}, std::string("claim0"));
          if (so_far.size() == 1) {
            std::string next = (so_far[0].value[0] % 2 == 0) ? "claim1" : "claim2";
            return std::make_pair(size_t{0}, next);
          }
          return std::nullopt;
        });
  });

  EXPECT_TRUE(run.client_error.empty()) << run.client_error;
  ASSERT_EQ(run.disclosed.size(), 2u);
  EXPECT_EQ(run.disclosed[1].claim_name, branch);
  expect_matches_issued(run.disclosed, {issued});
}

TEST(Session, MultiCredentialSelection) {
  Actors a;
  auto first = a.issue_n(3, "a");
  auto second = a.issue_n(3, "b");
  auto bundle = a.present({first, second});
  HolderOprf oprf(a.group, std::move(bundle.secret), 6);

  auto run = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    return c.disclose_batch({{{0, "a1"}, {1, "b2"}}});
  });
  EXPECT_TRUE(run.client_error.empty()) << run.client_error;
  ASSERT_EQ(run.disclosed.size(), 2u);
  EXPECT_EQ(run.disclosed[0].credential_index, 0u);
  EXPECT_EQ(run.disclosed[1].credential_index, 1u);
  expect_matches_issued(run.disclosed, {first, second});
}

TEST(Session, LocalSelectionErrorsSendNothing) {
  Actors a;
  auto issued = a.issue_n(4);

  struct Case {
    const char* label;
    DisclosureSelection selection;
  };
  std::vector<Case> cases;
  cases.push_back({"over quota", {{{0, "claim0"}, {0, "claim1"}, {0, "claim2"}}}});
  cases.push_back({"duplicate", {{{0, "claim0"}, {0, "claim0"}}}});
  cases.push_back({"unknown name", {{{0, "nope"}}}});
  cases.push_back({"bad index", {{{3, "claim0"}}}});
  cases.push_back({"empty", {}});

  for (auto& c : cases) {
    auto bundle = a.present({issued});
    HolderOprf oprf(a.group, std::move(bundle.secret), 2);
    auto run = run_session(a, oprf, bundle, [&](DisclosureClient& cl) {
      return cl.disclose_batch(c.selection);
    });
    EXPECT_FALSE(run.client_error.empty()) << c.label;
    EXPECT_TRUE(run.transcript.request_sizes.empty())
        << c.label << ": selection errors must precede any request";
    EXPECT_EQ(oprf.used(), 0u) << c.label;
  }
}

TEST(Session, AdaptiveOverQuotaRefusedBeforeSending) {
  Actors a;
  auto issued = a.issue_n(4);
  auto bundle = a.present({issued});
  HolderOprf oprf(a.group, std::move(bundle.secret), 2);

  auto run = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    size_t i = 0;
    return c.disclose_adaptive(
        [&](const std::vector<DisclosedClaim>&)
            -> std::optional<std::pair<size_t, std::string>> {
          if (i >= 3) return std::nullopt;
          return std::make_pair(size_t{0}, "claim" + std::to_string(i++));
        });
  });

  // The client stops itself at the advertised quota; the holder never sees
  // a third request, so the refusal leaks nothing about the extra pick.
  EXPECT_NE(run.client_error.find("quota"), std::string::npos) << run.client_error;
  EXPECT_EQ(oprf.used(), 2u);
  EXPECT_EQ(run.transcript.request_sizes, (std::vector<size_t>{1, 1}));
  EXPECT_FALSE(run.transcript.quota_refused);
}

TEST(Session, DrainedPoolRefusedByHolder) {
  Actors a;
  auto issued = a.issue_n(4);
  auto bundle = a.present({issued});
  HolderOprf oprf(a.group, std::move(bundle.secret), 4);

  auto first = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    return c.disclose_batch({{{0, "claim0"}, {0, "claim1"}, {0, "claim2"}}});
  });
  EXPECT_TRUE(first.client_error.empty()) << first.client_error;
  EXPECT_EQ(oprf.used(), 3u);

  // The second session still sees the full advertised quota, but the shared
  // pool has one evaluation left; the holder refuses the whole request.
  auto second = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    return c.disclose_batch({{{0, "claim2"}, {0, "claim3"}}});
  });
  EXPECT_NE(second.client_error.find("quota"), std::string::npos)
      << second.client_error;
  EXPECT_TRUE(second.transcript.quota_refused);
  EXPECT_EQ(oprf.used(), 3u);  // all-or-nothing: the remaining one is untouched
}

TEST(Session, VerifierGetsOnlySelectedClaims) {
  Actors a;
  auto issued = a.issue_n(6);
  auto bundle = a.present({issued});
  Scalar msk = bundle.secret.msk();  // copied before the holder takes the secret
  HolderOprf oprf(a.group, std::move(bundle.secret), 2);

  auto run = run_session(a, oprf, bundle, [](DisclosureClient& c) {
    return c.disclose_batch({{{0, "claim1"}, {0, "claim4"}}});
  });
  EXPECT_TRUE(run.client_error.empty()) << run.client_error;

  std::set<std::string> got;
  for (const auto& claim : run.disclosed) got.insert(claim.claim_name);
  EXPECT_EQ(got, (std::set<std::string>{"claim1", "claim4"}));

  // The quota is spent; the session cannot be widened after the fact.
  EXPECT_EQ(oprf.used(), oprf.quota());

  // Boxes of unselected claims stay sealed: only the per-claim key opens
  // them, and deriving it needs the msk the holder never sent.
  for (const auto& entry : bundle.data.sets[0].entries) {
    if (got.count(entry.name)) continue;
    ClaimKey key = derive_key_direct(*a.group, msk, entry.digest);
    EXPECT_TRUE(aead_open(key, entry.box, entry.digest.view()).has_value());
    ClaimKey wrong{};
    EXPECT_FALSE(aead_open(wrong, entry.box, entry.digest.view()).has_value());
  }
}

TEST(Session, HolderViewIsSelectionIndependent) {
  Actors a;
  auto issued = a.issue_n(6);

  std::vector<HolderTranscript> transcripts;
  for (const std::string pick : {"claim0", "claim3", "claim5"}) {
    auto bundle = a.present({issued});
    HolderOprf oprf(a.group, std::move(bundle.secret), 1);
    auto run = run_session(a, oprf, bundle, [&](DisclosureClient& c) {
      return c.disclose_batch({{{0, pick}}});
    });
    EXPECT_TRUE(run.client_error.empty()) << run.client_error;
    transcripts.push_back(run.transcript);
  }

  // Same request shape regardless of which claim was picked.
  for (const auto& t : transcripts) {
    ASSERT_EQ(t.request_sizes, (std::vector<size_t>{1}));
    ASSERT_EQ(t.received_elements.size(), 1u);
    EXPECT_EQ(t.received_elements[0].size(), 33u);
    EXPECT_TRUE(t.saw_close);
  }

  // The blinded element never equals the bare hashed commitment of any
  // claim, selected or not.
  std::set<Bytes> hashed;
  for (const auto& [name, digest] : issued.credential.commitments) {
    hashed.insert(a.group->hash_to_group(digest).encoding);
  }
  for (const auto& t : transcripts) {
    EXPECT_FALSE(hashed.count(t.received_elements[0]));
  }
}

// With the toy group the whole blinded-element distribution is enumerable:
// every claim reaches exactly the same ten elements, so the received element
// narrows nothing down.
TEST(Session, ToyReachabilitySetsCoincide) {
  auto g = toy_group();
  Actors a;
  auto issued = a.issue_n(4);

  std::set<Bytes> reference;
  for (const auto& [name, digest] : issued.credential.commitments) {
    std::set<Bytes> reachable;
    for (uint64_t r = 1; r <= 10; ++r) {
      reachable.insert(blind_with(*g, digest, g->scalar_from_u64(r)).element.encoding);
    }
    EXPECT_EQ(reachable.size(), 10u) << name;
    if (reference.empty()) {
      reference = reachable;
    } else {
      EXPECT_EQ(reachable, reference) << name;
    }
  }
}

TEST(Session, AbortsOnTamperedBoxAndSendsNothingFurther) {
  Actors a;
  auto issued = a.issue_n(4);
  auto bundle = a.present({issued});

  // Flip one ciphertext byte of claim1: structure still validates, opening fails.
  PresentationData tampered = bundle.data;
  for (auto& entry : tampered.sets[0].entries) {
    if (entry.name == "claim1") entry.box.ciphertext[3] ^= 0x01;
  }
  Bytes dvp_bytes = encode_presentation_data(tampered);

  HolderOprf oprf(a.group, std::move(bundle.secret), 4);
  auto run = run_session(
      a, oprf, bundle,
      [](DisclosureClient& c) {
        size_t i = 0;
        return c.disclose_adaptive(
            [&](const std::vector<DisclosedClaim>&)
                -> std::optional<std::pair<size_t, std::string>> {
              static const char* order[] = {"claim1", "claim2", "claim3"};
              if (i >= 3) return std::nullopt;
              return std::make_pair(size_t{0}, std::string(order[i++]));
            });
      },
      dvp_bytes);

  EXPECT_NE(run.client_error.find("claim verification"), std::string::npos)
      << run.client_error;
  // Abort after the first round: exactly one request, no close frame.
  EXPECT_EQ(run.transcript.request_sizes, (std::vector<size_t>{1}));
  EXPECT_FALSE(run.transcript.saw_close);
}

TEST(Session, TamperedBoxAbortInBatchMode) {
  Actors a;
  auto issued = a.issue_n(4);
  auto bundle = a.present({issued});

  PresentationData tampered = bundle.data;
  tampered.sets[0].entries[2].box.tag[0] ^= 0x01;
  Bytes dvp_bytes = encode_presentation_data(tampered);

  HolderOprf oprf(a.group, std::move(bundle.secret), 4);
  auto run = run_session(
      a, oprf, bundle,
      [](DisclosureClient& c) {
        return c.disclose_batch({{{0, "claim1"}, {0, "claim2"}, {0, "claim3"}}});
      },
      dvp_bytes);

  EXPECT_NE(run.client_error.find("claim verification"), std::string::npos)
      << run.client_error;
  EXPECT_EQ(run.transcript.request_sizes, (std::vector<size_t>{3}));
  EXPECT_FALSE(run.transcript.saw_close);
}

TEST(Session, RoundtripMatrix) {
  Actors a;
  for (size_t n : {2u, 8u}) {
    auto issued = a.issue_n(n);
    for (size_t n_o : {size_t{1}, (n + 1) / 2, n}) {
      auto bundle = a.present({issued});
      HolderOprf oprf(a.group, std::move(bundle.secret), uint32_t(n_o));
      DisclosureSelection sel;
      for (size_t i = 0; i < n_o; ++i) {
        sel.picks.emplace_back(0, "claim" + std::to_string(i));
      }
      auto run = run_session(a, oprf, bundle, [&](DisclosureClient& c) {
        return c.disclose_batch(sel);
      });
      EXPECT_TRUE(run.client_error.empty())
          << "n=" << n << " n_o=" << n_o << ": " << run.client_error;
      EXPECT_EQ(run.disclosed.size(), n_o);
      expect_matches_issued(run.disclosed, {issued});
      EXPECT_EQ(oprf.used(), n_o);
    }
  }
}
