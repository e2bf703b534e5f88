// Acceptance gate: one check per shipped guarantee, one line per result.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <optional>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "codssi/attacks.hpp"
#include "codssi/bench.hpp"
#include "codssi/disclosure.hpp"
#include "codssi/errors.hpp"
#include "codssi/presentation.hpp"
#include "codssi/rng.hpp"

using namespace codssi;
using namespace std::chrono_literals;

namespace {

constexpr int64_t kNow = 1700000000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double run_timed(const std::function<Outcome()>& fn, Outcome& out) {
  auto start = std::chrono::steady_clock::now();
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Actors {
  SigningKey issuer_key = SigningKey::from_seed(Bytes(32, 0x01));
  SigningKey holder_key = SigningKey::from_seed(Bytes(32, 0x02));
  SigningKey verifier_key = SigningKey::from_seed(Bytes(32, 0x03));
  KeyDirectory directory;
  std::shared_ptr<const Group> group = secp256k1_group();
  SeededRandom rng{0xACCE97};

  Actors() {
    directory.add("issuer", issuer_key.public_key());
    directory.add("holder", holder_key.public_key());
    directory.add("verifier", verifier_key.public_key());
  }

  IssuedCredential issue_n(size_t n, size_t value_bytes = 12,
                           const char* name_fmt = "claim%04zu") {
    std::vector<std::pair<std::string, Bytes>> claims;
    char name[32];
    for (size_t i = 0; i < n; ++i) {
      std::snprintf(name, sizeof name, name_fmt, i);
      claims.emplace_back(name, rng.bytes(value_bytes));
    }
    CredentialMetadata meta{"issuer", "subject", "test", kNow - 100, 0};
    return issue(issuer_key, meta, claims, rng);
  }

  PresentationBundle present(const std::vector<IssuedCredential>& creds) {
    return create_presentation(*group, holder_key, "holder", creds, "verifier",
                               rng, kNow);
  }
};

std::vector<DisclosedClaim> run_loopback_session(
    Actors& actors, HolderOprf& oprf, const PresentationBundle& bundle,
    const std::function<std::vector<DisclosedClaim>(DisclosureClient&)>& body) {
  Bytes vp_bytes = encode_presentation(bundle.vp);
  Bytes dvp_bytes = encode_presentation_data(bundle.data);

  auto [cs, hs] = loopback_pair();
  cs->set_read_timeout(5000ms);
  hs->set_read_timeout(5000ms);
  FrameChannel client_channel(std::move(cs));
  FrameChannel holder_channel(std::move(hs));

  std::thread holder([&] {
    SeededRandom rng(11);
    try {
      HandshakeResult hsr = holder_channel.handshake_server(
          actors.directory, actors.holder_key, "holder", rng);
      serve_disclosure(holder_channel, oprf, actors.holder_key, hsr, vp_bytes,
                       dvp_bytes, rng, nullptr);
    } catch (const ProtocolError&) {
    }
    holder_channel.close();
  });

  std::vector<DisclosedClaim> disclosed;
  std::exception_ptr failure;
  try {
    SeededRandom rng(12);
    HandshakeResult hsr = client_channel.handshake_client(
        actors.directory, actors.verifier_key, "verifier", rng);
    DisclosureClient client(client_channel, actors.directory, actors.group,
                            std::move(hsr), "verifier", rng);
    client.await_offer(kNow);
    disclosed = body(client);
    client.finish();
  } catch (...) {
    failure = std::current_exception();
  }
  client_channel.close();
  holder.join();
  if (failure) std::rethrow_exception(failure);
  return disclosed;
}

// --- criterion 1: blinded evaluation equals direct derivation -------------

Outcome criterion_oprf_equivalence() {
  auto secp = secp256k1_group();
  SeededRandom rng(0xC1);
  for (int i = 0; i < 100; ++i) {
    Digest x = commit(rng.bytes(24), rng.bytes(16));
    Scalar msk = secp->random_scalar(rng);
    Blinded bl = blind(*secp, x, rng);
    ClaimKey via = finalize(*secp, x, evaluate(*secp, msk, bl.element), bl.r);
    if (!(via == derive_key_direct(*secp, msk, x))) {
      return {false, "production pair " + std::to_string(i) + " diverged"};
    }
  }

  // Toy group: the ten fixture digests map onto all ten non-identity
  // elements, so (msk, r) over 1..10 x 1..10 covers every reachable
  // element/exponent combination; the eleventh element (identity) must be
  // rejected for every exponent.
  auto toy = toy_group();
  const char* fixtures[] = {"claim-13", "claim-11", "claim-0", "claim-57",
                            "claim-3",  "claim-4",  "claim-9", "claim-2",
                            "claim-5",  "claim-31"};
  Bytes salt = to_bytes("fixed-salt-0001");
  std::set<Bytes> h1_outputs;
  size_t combos = 0;
  for (const char* value : fixtures) {
    Digest x = commit(to_bytes(value), salt);
    h1_outputs.insert(toy->hash_to_group(x).encoding);
    for (uint64_t m = 1; m <= 10; ++m) {
      Scalar msk = toy->scalar_from_u64(m);
      ClaimKey direct = derive_key_direct(*toy, msk, x);
      for (uint64_t r = 1; r <= 10; ++r) {
        Blinded bl = blind_with(*toy, x, toy->scalar_from_u64(r));
        ClaimKey via = finalize(*toy, x, evaluate(*toy, msk, bl.element), bl.r);
        if (!(via == direct)) {
          return {false, std::string(value) + " diverged at msk=" +
                             std::to_string(m) + " r=" + std::to_string(r)};
        }
        ++combos;
      }
    }
  }
  if (h1_outputs.size() != 10) {
    return {false, "fixtures cover only " + std::to_string(h1_outputs.size()) +
                       " of 10 elements"};
  }
  size_t identity_rejections = 0;
  for (uint64_t m = 1; m <= 10; ++m) {
    try {
      evaluate(*toy, toy->scalar_from_u64(m), GroupElement{Bytes{1}});
    } catch (const InvalidElement&) {
      ++identity_rejections;
    }
  }
  if (identity_rejections != 10) {
    return {false, "identity element accepted by evaluate"};
  }
  return {true, "100 production pairs + " + std::to_string(combos) +
                    " toy combinations + identity row"};
}

// --- criterion 2: roundtrip across sizes and modes ------------------------

Outcome criterion_roundtrip() {
  Actors actors;
  size_t sessions = 0;
  for (size_t n : {2u, 8u, 64u}) {
    auto issued = actors.issue_n(n);
    for (size_t n_o : std::set<size_t>{1, (n + 1) / 2, n}) {
      std::vector<std::pair<size_t, std::string>> picks;
      for (size_t i = 0; i < n_o; ++i) {
        picks.emplace_back(0, issued.credential.commitments[i].first);
      }

      auto bundle_b = actors.present({issued});
      HolderOprf oprf_b(actors.group, std::move(bundle_b.secret), uint32_t(n_o));
      auto batch = run_loopback_session(actors, oprf_b, bundle_b,
                                        [&](DisclosureClient& c) {
                                          return c.disclose_batch({picks});
                                        });

      auto bundle_a = actors.present({issued});
      HolderOprf oprf_a(actors.group, std::move(bundle_a.secret), uint32_t(n_o));
      auto adaptive = run_loopback_session(
          actors, oprf_a, bundle_a, [&](DisclosureClient& c) {
            size_t next = 0;
            return c.disclose_adaptive(
                [&](const std::vector<DisclosedClaim>&)
                    -> std::optional<std::pair<size_t, std::string>> {
                  if (next >= picks.size()) return std::nullopt;
                  return picks[next++];
                });
          });

      if (batch.size() != n_o || adaptive.size() != n_o) {
        return {false, "wrong disclosure count at n=" + std::to_string(n)};
      }
      for (size_t i = 0; i < n_o; ++i) {
        const ClaimRecord* rec = issued.data.find(batch[i].claim_name);
        if (!rec || batch[i].value != rec->value || batch[i].salt != rec->salt) {
          return {false, "batch value mismatch at n=" + std::to_string(n) +
                             " claim " + batch[i].claim_name};
        }
        if (adaptive[i].claim_name != batch[i].claim_name ||
            adaptive[i].value != batch[i].value ||
            adaptive[i].salt != batch[i].salt) {
          return {false, "modes disagree at n=" + std::to_string(n) + " claim " +
                             batch[i].claim_name};
        }
      }
      sessions += 2;
    }
  }
  return {true, std::to_string(sessions) + " sessions, all values byte-equal"};
}

// --- criterion 3: every byte flip is detected ------------------------------

Outcome criterion_integrity_sweep() {
  TamperReport report = attack_tamper_and_replay(0xC3);
  std::string detail =
      std::to_string(report.dvp_detected) + "/" + std::to_string(report.dvp_flips) +
      " data flips, " + std::to_string(report.frame_detected) + "/" +
      std::to_string(report.frame_flips) + " frame flips, " +
      std::to_string(report.replay_rejected) + "/" +
      std::to_string(report.replay_trials) + " replays rejected";
  if (!report.all_detected()) {
    detail += "; misses:";
    for (const auto& m : report.misses) detail += " [" + m.label + "]";
    return {false, detail};
  }
  return {true, detail};
}

// --- criterion 4: concurrent quota is exact --------------------------------

Outcome criterion_quota_concurrency() {
  Actors actors;
  constexpr uint32_t kQuota = 5;
  constexpr int kClients = 8;
  for (int rep = 0; rep < 100; ++rep) {
    auto bundle = actors.present({actors.issue_n(2)});
    HolderOprf oprf(actors.group, std::move(bundle.secret), kQuota);
    GroupElement e =
        actors.group->hash_to_group(commit(actors.rng.bytes(8), actors.rng.bytes(8)));

    std::atomic<int> granted{0};
    std::atomic<int> quota_refused{0};
    std::vector<std::thread> threads;
    threads.reserve(kClients);
    for (int c = 0; c < kClients; ++c) {
      threads.emplace_back([&, c] {
        auto session =
            oprf.open_session("v" + std::to_string(c), Bytes(8, uint8_t(c)));
        EvalResult r = session->evaluate({e});
        if (r.status == EvalStatus::ok) granted.fetch_add(1);
        if (r.status == EvalStatus::quota_exceeded) quota_refused.fetch_add(1);
      });
    }
    for (auto& t : threads) t.join();
    if (granted.load() != int(kQuota) || oprf.used() != kQuota ||
        quota_refused.load() != kClients - int(kQuota)) {
      return {false, "interleaving " + std::to_string(rep) + ": granted " +
                         std::to_string(granted.load()) + ", counter " +
                         std::to_string(oprf.used())};
    }
  }
  return {true, "100 interleavings, exactly 5 grants each, counter 5"};
}

// --- criterion 5: storage formula is exact ----------------------------------

Outcome criterion_storage_formula() {
  Actors actors;
  constexpr size_t kValueBytes = 30;
  // Uniform plaintext: framed value + framed salt.
  constexpr size_t kPlain = 8 + kValueBytes + 8 + kDefaultSaltBytes;

  // Encoding overhead on top of the raw boxes must be affine in n with
  // integer coefficients; measure it at the two ends and cross-check.
  std::map<size_t, size_t> overhead;
  for (size_t n : {2u, 64u, 1024u}) {
    auto issued = actors.issue_n(n, kValueBytes);
    auto bundle = actors.present({issued});
    size_t payload = encrypted_payload_bytes(bundle.data);
    size_t expect = n * (kAeadIvBytes + kPlain + kAeadTagBytes);
    if (payload != expect) {
      return {false, "n=" + std::to_string(n) + ": payload " +
                         std::to_string(payload) + " != " + std::to_string(expect)};
    }
    overhead[n] = encode_presentation_data(bundle.data).size() - payload;
  }
  size_t per_entry = (overhead[64] - overhead[2]) / 62;
  size_t fixed = overhead[2] - 2 * per_entry;
  if (overhead[1024] != fixed + 1024 * per_entry) {
    return {false, "encoding overhead is not affine in n"};
  }
  return {true, "payload = n*(12+" + std::to_string(kPlain) +
                    "+16) exactly; framing = " + std::to_string(fixed) + " + n*" +
                    std::to_string(per_entry)};
}

// --- criterion 6: communication formula is exact ----------------------------

Outcome criterion_communication_formula() {
  SeededRandom rng(0xC6);
  auto secp = secp256k1_group();
  auto toy = toy_group();
  for (size_t n_o : {1u, 5u, 32u, 64u}) {
    std::vector<GroupElement> secp_elems, toy_elems;
    for (size_t i = 0; i < n_o; ++i) {
      Digest x = commit(rng.bytes(8), rng.bytes(8));
      secp_elems.push_back(secp->hash_to_group(x));
      toy_elems.push_back(toy->hash_to_group(x));
    }
    size_t secp_body = encode_element_list(secp_elems).size();
    size_t toy_body = encode_element_list(toy_elems).size();
    if (secp_body != 4 + n_o * (secp->element_size() + 1)) {
      return {false, "secp256k1 body " + std::to_string(secp_body) + " at n_o=" +
                         std::to_string(n_o)};
    }
    if (toy_body != 4 + n_o * (toy->element_size() + 1)) {
      return {false, "toy body " + std::to_string(toy_body) + " at n_o=" +
                         std::to_string(n_o)};
    }
  }
  return {true, "request/response body = 4 + n_o*(|element|+1) on both groups"};
}

// --- criteria 7 and 8: scaling shapes and orderings -------------------------

struct DeskRun {
  BenchConfig config = BenchConfig::desk();
  std::vector<StatRecord> records;

  void ensure() {
    if (records.empty()) records = bench_all(config);
  }
};

Outcome criterion_scaling_shapes(DeskRun& desk) {
  desk.ensure();
  std::vector<std::pair<double, double>> vp_points, enc_points;
  for (uint64_t n : desk.config.claim_counts) {
    const auto* vp = find_record(desk.records, "vp.create.time", n);
    const auto* enc = find_record(desk.records, "dvp.encrypt.time", n);
    if (!vp || !enc) return {false, "missing records at n=" + std::to_string(n)};
    vp_points.emplace_back(double(n), vp->mean);
    enc_points.emplace_back(double(n), enc->mean);
  }
  double vp_slope = loglog_slope(vp_points);
  double enc_slope = loglog_slope(enc_points);

  std::vector<std::pair<double, double>> quota_points;
  for (const auto& r : desk.records) {
    if (r.phase == "disclosure.compute.time") {
      quota_points.emplace_back(double(r.n), r.mean);
    }
  }
  if (quota_points.size() < 3) return {false, "too few quota points"};
  LinearFit fit = linear_fit(quota_points);
  double quota_slope = loglog_slope(quota_points);

  char detail[160];
  std::snprintf(detail, sizeof detail,
                "vp.create %.3f, dvp.encrypt %.3f, disclosure vs quota %.3f "
                "(linear r2 %.4f)",
                vp_slope, enc_slope, quota_slope, fit.r_squared);
  bool pass = vp_slope >= 0.9 && vp_slope <= 1.1 && enc_slope >= 0.9 &&
              enc_slope <= 1.1 && quota_slope >= 0.9 && quota_slope <= 1.1 &&
              fit.slope > 0 && fit.r_squared >= 0.9;
  return {pass, detail};
}

Outcome criterion_orderings(DeskRun& desk) {
  desk.ensure();
  std::vector<std::string> violations =
      check_expected_orderings(desk.records, desk.config);
  if (!violations.empty()) {
    std::string detail = std::to_string(violations.size()) + " violations:";
    for (const auto& v : violations) detail += " [" + v + "]";
    return {false, detail};
  }
  size_t checked = 0;
  for (uint64_t n : desk.config.claim_counts) {
    if (n >= 8) ++checked;
  }
  return {true, "all orderings hold at " + std::to_string(checked) +
                    " claim counts >= 8"};
}

// --- criterion 9: selective-failure outcome table ---------------------------

Outcome criterion_selective_failure() {
  SelectiveFailureReport report = attack_selective_failure(42, 20);
  size_t agreeing = 0;
  for (const auto& c : report.cases) {
    if (c.agrees) ++agreeing;
  }
  std::string detail = std::to_string(agreeing) + "/" +
                       std::to_string(report.cases.size()) +
                       " scenarios agree with the prediction table";
  if (!report.all_agree || report.cases.size() != 20) {
    for (const auto& c : report.cases) {
      if (!c.agrees) detail += " [case " + std::to_string(c.index) + "]";
    }
    return {false, detail};
  }
  return {true, detail};
}

// --- criterion 10: no cross-presentation repeats ----------------------------

Outcome criterion_unlinkability() {
  Actors actors;
  auto issued = actors.issue_n(3);
  constexpr size_t kRuns = 10000;

  std::set<Bytes> iv_ct_pairs;
  std::vector<std::set<Bytes>> keys_per_claim(3);
  for (size_t run = 0; run < kRuns; ++run) {
    auto bundle = actors.present({issued});
    const Scalar& msk = bundle.secret.msk();
    for (size_t j = 0; j < 3; ++j) {
      const auto& entry = bundle.data.sets[0].entries[j];
      Bytes pair(entry.box.iv.begin(), entry.box.iv.end());
      pair.insert(pair.end(), entry.box.ciphertext.begin(),
                  entry.box.ciphertext.end());
      if (!iv_ct_pairs.insert(std::move(pair)).second) {
        return {false, "repeated (iv, ciphertext) at run " + std::to_string(run)};
      }
      ClaimKey key = derive_key_direct(*actors.group, msk, entry.digest);
      Bytes kb(key.bytes.begin(), key.bytes.end());
      if (!keys_per_claim[j].insert(std::move(kb)).second) {
        return {false, "repeated key for claim " + std::to_string(j) + " at run " +
                           std::to_string(run)};
      }
    }
  }
  return {true, std::to_string(kRuns) + " presentations, " +
                    std::to_string(iv_ct_pairs.size()) +
                    " distinct (iv, ciphertext) pairs, all keys distinct"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> fn;
    double budget_seconds;  // 0 = no budget asserted
  };

  DeskRun desk;
  const std::vector<Criterion> criteria = {
      {1, "blinded evaluation equals direct derivation", criterion_oprf_equivalence,
       5.0},
      {2, "end-to-end roundtrip across sizes and modes", criterion_roundtrip, 60.0},
      {3, "single-byte tampering always detected", criterion_integrity_sweep, 120.0},
      {4, "concurrent quota grants are exact", criterion_quota_concurrency, 30.0},
      {5, "storage follows the per-claim formula exactly", criterion_storage_formula,
       0.0},
      {6, "message bodies follow the element formula exactly",
       criterion_communication_formula, 0.0},
      {7, "time scales linearly in claims and quota",
       [&] { return criterion_scaling_shapes(desk); }, 0.0},
      {8, "measured orderings match the published ones",
       [&] { return criterion_orderings(desk); }, 0.0},
      {9, "selective-failure outcomes match the prediction table",
       criterion_selective_failure, 0.0},
      {10, "no repeated ivs, ciphertexts, or keys across presentations",
       criterion_unlinkability, 0.0},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    double secs = run_timed(c.fn, out);
    bool in_budget = c.budget_seconds == 0.0 || secs < c.budget_seconds;
    bool pass = out.pass && in_budget;
    std::printf("criterion %2d: %s  %s (%.1fs%s)\n", c.id, pass ? "PASS" : "FAIL",
                c.title, secs,
                in_budget ? ""
                          : (" > budget " + std::to_string(c.budget_seconds) + "s")
                                .c_str());
    if (!out.detail.empty()) std::printf("              %s\n", out.detail.c_str());
    if (!pass) ++failed;
  }
  if (failed) std::printf("%d criterion(s) failed\n", failed);
  return failed;
}
