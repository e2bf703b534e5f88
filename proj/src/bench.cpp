#include "codssi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codssi/aead.hpp"
#include "codssi/codec.hpp"
#include "codssi/credential.hpp"
#include "codssi/errors.hpp"
#include "codssi/oprf.hpp"
#include "codssi/presentation.hpp"
#include "codssi/wire.hpp"

namespace codssi {
namespace {

using Clock = std::chrono::steady_clock;

double time_us(const std::function<void()>& fn) {
  auto start = Clock::now();
  fn();
  auto stop = Clock::now();
  return std::chrono::duration<double, std::micro>(stop - start).count();
}

std::string claim_name(size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%06zu", i);
  return buf;
}

// 30-byte hex string values, as in the published measurements.
Bytes hex_value(RandomSource& rng, size_t value_bytes) {
  std::string hex = to_hex(rng.bytes((value_bytes + 1) / 2));
  hex.resize(value_bytes);
  return to_bytes(hex);
}

std::vector<std::pair<std::string, Bytes>> make_claims(RandomSource& rng, size_t n,
                                                       size_t value_bytes) {
  std::vector<std::pair<std::string, Bytes>> claims;
  claims.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    claims.emplace_back(claim_name(i), hex_value(rng, value_bytes));
  }
  return claims;
}

struct BenchActors {
  SigningKey issuer_key;
  SigningKey holder_key;
  KeyDirectory directory;
  CredentialMetadata metadata;
};

BenchActors make_actors(RandomSource& rng) {
  BenchActors a{SigningKey::generate(rng), SigningKey::generate(rng), {}, {}};
  a.directory.add("issuer", a.issuer_key.public_key());
  a.directory.add("holder", a.holder_key.public_key());
  a.metadata = CredentialMetadata{"issuer", "holder", "bench", unix_now(), 0};
  return a;
}

// Plain selective disclosure: request = claim names, response = openings.
Bytes sd_request_bytes(const std::vector<std::pair<std::string, Bytes>>& claims) {
  Writer w;
  w.u32(static_cast<uint32_t>(claims.size()));
  for (const auto& [name, value] : claims) w.str(name);
  return w.take();
}

Bytes sd_response_bytes(const CredentialData& data) {
  Writer w;
  w.u32(static_cast<uint32_t>(data.openings.size()));
  for (const auto& rec : data.openings) {
    w.bytes(rec.value);
    w.bytes(rec.salt);
  }
  return w.take();
}

class Collector {
 public:
  Collector(std::vector<StatRecord>& out, double trim) : out_(out), trim_(trim) {}

  void add(const std::string& phase, uint64_t n, const std::string& metric,
           std::vector<double> samples) {
    out_.push_back(trim_stats(phase, n, metric, std::move(samples), trim_));
  }

 private:
  std::vector<StatRecord>& out_;
  double trim_;
};

void bench_claim_level(const BenchConfig& cfg, RandomSource& rng, Collector& collect) {
  const Group& g = *secp256k1_group();
  uint32_t reps = cfg.repetitions;

  std::vector<double> hash_t(reps), verify_t(reps), encrypt_t(reps), decrypt_t(reps),
      request_t(reps), response_t(reps);

  for (uint32_t i = 0; i < reps; ++i) {
    Bytes value = hex_value(rng, cfg.claim_value_bytes);
    Bytes salt = rng.bytes(kDefaultSaltBytes);
    Scalar msk = g.random_scalar(rng);

    Digest x;
    hash_t[i] = time_us([&] { x = commit(value, salt); });
    verify_t[i] = time_us([&] {
      if (!verify_opening(x, value, salt)) throw Error("bench self-check failed");
    });

    Bytes m = encode_box_plaintext(value, salt);
    std::array<uint8_t, kAeadIvBytes> iv{};
    rng.fill(iv);
    AeadBox box;
    encrypt_t[i] = time_us([&] {
      ClaimKey key = derive_key_direct(g, msk, x);
      box = aead_seal(key, iv, m, x.view());
    });

    Blinded blinded;
    request_t[i] = time_us([&] { blinded = blind(g, x, rng); });
    GroupElement b;
    response_t[i] = time_us([&] { b = evaluate(g, msk, blinded.element); });
    decrypt_t[i] = time_us([&] {
      ClaimKey key = finalize(g, x, b, blinded.r);
      if (!aead_open(key, box, x.view())) throw Error("bench self-check failed");
    });
  }

  collect.add("claim.hash.time", 1, "time_us", std::move(hash_t));
  collect.add("claim.verify.time", 1, "time_us", std::move(verify_t));
  collect.add("claim.encrypt.time", 1, "time_us", std::move(encrypt_t));
  collect.add("claim.decrypt.time", 1, "time_us", std::move(decrypt_t));
  collect.add("oprf.request.time", 1, "time_us", std::move(request_t));
  collect.add("oprf.response.time", 1, "time_us", std::move(response_t));
}

void bench_at_n(const BenchConfig& cfg, const BenchActors& actors, RandomSource& rng,
                uint64_t n, Collector& collect) {
  const Group& g = *secp256k1_group();
  auto group = secp256k1_group();
  uint32_t reps = cfg.repetitions;
  int64_t now = unix_now();

  std::vector<double> vc_create(reps), vc_verify(reps), vc_size(reps), dvc_size(reps);
  std::vector<double> vp_create(reps), vp_validate(reps), vp_size(reps), dvp_size(reps);
  std::vector<double> dvp_encrypt(reps), dvp_decrypt(reps);
  std::vector<double> ob_req_t(reps), ob_resp_t(reps), ob_req_b(reps), ob_resp_b(reps);
  std::vector<double> sd_req_t(reps), sd_resp_t(reps), sd_req_b(reps), sd_resp_b(reps);

  auto claims = make_claims(rng, n, cfg.claim_value_bytes);

  for (uint32_t rep = 0; rep < reps; ++rep) {
    IssuedCredential issued;
    vc_create[rep] = time_us([&] {
      issued = issue(actors.issuer_key, actors.metadata, claims, rng);
    });
    vc_verify[rep] = time_us([&] {
      if (verify_credential(issued.credential, actors.directory, now) !=
          CredentialCheck::accept) {
        throw Error("bench self-check failed");
      }
    });
    vc_size[rep] = static_cast<double>(encode_credential(issued.credential).size());
    dvc_size[rep] = static_cast<double>(encode_credential_data(issued.data).size());

    std::vector<IssuedCredential> inputs;
    inputs.push_back(std::move(issued));
    std::optional<PresentationBundle> bundle;
    vp_create[rep] = time_us([&] {
      bundle = create_presentation(g, actors.holder_key, "holder", inputs, "verifier",
                                   rng, now);
    });
    vp_validate[rep] = time_us([&] {
      if (validate_presentation(bundle->vp, bundle->data, actors.directory, "verifier",
                                now) != PresentationCheck::accept) {
        throw Error("bench self-check failed");
      }
    });
    vp_size[rep] = static_cast<double>(encode_presentation(bundle->vp).size());
    dvp_size[rep] = static_cast<double>(encode_presentation_data(bundle->data).size());

    // Encryption phase in isolation: keys plus boxes for every claim under a
    // fixed master secret.
    const Scalar& msk = bundle->secret.msk();
    const auto& commitments = inputs[0].credential.commitments;
    dvp_encrypt[rep] = time_us([&] {
      for (const auto& [name, digest] : commitments) {
        const ClaimRecord* rec = inputs[0].data.find(name);
        ClaimKey key = derive_key_direct(g, msk, digest);
        std::array<uint8_t, kAeadIvBytes> iv{};
        rng.fill(iv);
        Bytes m = encode_box_plaintext(rec->value, rec->salt);
        aead_seal(key, iv, m, digest.view());
      }
    });

    // Decryption phase with keys in hand; key retrieval is measured by the
    // OPRF phases below.
    std::vector<ClaimKey> keys;
    keys.reserve(commitments.size());
    for (const auto& [name, digest] : commitments) {
      keys.push_back(derive_key_direct(g, msk, digest));
    }
    const auto& set = bundle->data.sets[0];
    dvp_decrypt[rep] = time_us([&] {
      for (size_t i = 0; i < set.entries.size(); ++i) {
        const auto& entry = set.entries[i];
        auto plaintext = aead_open(keys[i], entry.box, entry.digest.view());
        if (!plaintext) throw Error("bench self-check failed");
        auto parts = split_box_plaintext(*plaintext);
        if (!parts || !verify_opening(entry.digest, parts->first, parts->second)) {
          throw Error("bench self-check failed");
        }
      }
    });

    // Worst-case disclosure: the verifier requests every claim.
    std::vector<Blinded> blinds;
    blinds.reserve(commitments.size());
    ob_req_t[rep] = time_us([&] {
      for (const auto& [name, digest] : commitments) {
        blinds.push_back(blind(g, digest, rng));
      }
    });
    std::vector<GroupElement> request;
    request.reserve(blinds.size());
    for (const auto& bl : blinds) request.push_back(bl.element);
    ob_req_b[rep] = static_cast<double>(encode_element_list(request).size());

    std::vector<GroupElement> response;
    response.reserve(request.size());
    ob_resp_t[rep] = time_us([&] {
      for (const auto& a : request) response.push_back(evaluate(g, msk, a));
    });
    ob_resp_b[rep] = static_cast<double>(encode_element_list(response).size());

    // Plain selective-disclosure baseline over the same claims.
    Bytes sd_req, sd_resp;
    sd_req_t[rep] = time_us([&] { sd_req = sd_request_bytes(claims); });
    sd_resp_t[rep] = time_us([&] { sd_resp = sd_response_bytes(inputs[0].data); });
    sd_req_b[rep] = static_cast<double>(sd_req.size());
    sd_resp_b[rep] = static_cast<double>(sd_resp.size());
  }

  collect.add("vc.create.time", n, "time_us", std::move(vc_create));
  collect.add("vc.verify.time", n, "time_us", std::move(vc_verify));
  collect.add("vc.size.bytes", n, "bytes", std::move(vc_size));
  collect.add("dvc.size.bytes", n, "bytes", std::move(dvc_size));
  collect.add("vp.create.time", n, "time_us", std::move(vp_create));
  collect.add("vp.validate.time", n, "time_us", std::move(vp_validate));
  collect.add("vp.size.bytes", n, "bytes", std::move(vp_size));
  collect.add("dvp.size.bytes", n, "bytes", std::move(dvp_size));
  collect.add("dvp.encrypt.time", n, "time_us", std::move(dvp_encrypt));
  collect.add("dvp.decrypt.time", n, "time_us", std::move(dvp_decrypt));
  collect.add("oprf.batch.request.time", n, "time_us", std::move(ob_req_t));
  collect.add("oprf.batch.response.time", n, "time_us", std::move(ob_resp_t));
  collect.add("oprf.batch.request.bytes", n, "bytes", std::move(ob_req_b));
  collect.add("oprf.batch.response.bytes", n, "bytes", std::move(ob_resp_b));
  collect.add("sd.request.time", n, "time_us", std::move(sd_req_t));
  collect.add("sd.response.time", n, "time_us", std::move(sd_resp_t));
  collect.add("sd.request.bytes", n, "bytes", std::move(sd_req_b));
  collect.add("sd.response.bytes", n, "bytes", std::move(sd_resp_b));
}

// Disclosure compute as a function of the quota with the claim count fixed
// at the largest configured n: blind, evaluate, finalize, decrypt for each
// selected claim. validate_presentation is re-measured alongside to show it
// does not depend on the selection size.
void bench_quota_scaling(const BenchConfig& cfg, const BenchActors& actors,
                         RandomSource& rng, Collector& collect) {
  const Group& g = *secp256k1_group();
  uint64_t n = cfg.claim_counts.back();
  int64_t now = unix_now();

  auto claims = make_claims(rng, n, cfg.claim_value_bytes);
  IssuedCredential issued = issue(actors.issuer_key, actors.metadata, claims, rng);
  std::vector<IssuedCredential> inputs;
  inputs.push_back(std::move(issued));
  PresentationBundle bundle =
      create_presentation(g, actors.holder_key, "holder", inputs, "verifier", rng, now);
  const Scalar& msk = bundle.secret.msk();
  const auto& set = bundle.data.sets[0];

  std::vector<uint64_t> quotas;
  for (uint64_t q = 1; q <= n; q *= 2) quotas.push_back(q);

  for (uint64_t quota : quotas) {
    std::vector<double> compute(cfg.repetitions), validate(cfg.repetitions);
    for (uint32_t rep = 0; rep < cfg.repetitions; ++rep) {
      compute[rep] = time_us([&] {
        for (uint64_t i = 0; i < quota; ++i) {
          const auto& entry = set.entries[i];
          Blinded bl = blind(g, entry.digest, rng);
          GroupElement b = evaluate(g, msk, bl.element);
          ClaimKey key = finalize(g, entry.digest, b, bl.r);
          auto plaintext = aead_open(key, entry.box, entry.digest.view());
          if (!plaintext) throw Error("bench self-check failed");
          auto parts = split_box_plaintext(*plaintext);
          if (!parts || !verify_opening(entry.digest, parts->first, parts->second)) {
            throw Error("bench self-check failed");
          }
        }
      });
      validate[rep] = time_us([&] {
        if (validate_presentation(bundle.vp, bundle.data, actors.directory, "verifier",
                                  now) != PresentationCheck::accept) {
          throw Error("bench self-check failed");
        }
      });
    }
    collect.add("disclosure.compute.time", quota, "time_us", std::move(compute));
    collect.add("vp.validate.at_full_n.time", quota, "time_us", std::move(validate));
  }
}

}  // namespace

BenchConfig BenchConfig::desk() {
  BenchConfig cfg;
  cfg.claim_counts = {2, 4, 8, 16, 32, 64, 128};
  cfg.repetitions = 50;
  return cfg;
}

void BenchConfig::validate() const {
  if (claim_counts.empty()) throw Error("claim_counts must be non-empty");
  for (size_t i = 0; i < claim_counts.size(); ++i) {
    if (claim_counts[i] < 1) throw Error("claim counts must be positive");
    if (i > 0 && claim_counts[i] <= claim_counts[i - 1]) {
      throw Error("claim counts must be strictly increasing");
    }
  }
  if (repetitions < 10) throw Error("repetitions must be at least 10");
  if (trim_fraction < 0 || trim_fraction >= 0.5) throw Error("bad trim fraction");
  if (claim_value_bytes < 1) throw Error("claim values must be non-empty");
}

std::string BenchConfig::to_json() const {
  nlohmann::json j;
  j["claim_counts"] = claim_counts;
  j["repetitions"] = repetitions;
  j["trim_fraction"] = trim_fraction;
  j["claim_value_bytes"] = claim_value_bytes;
  j["seed"] = seed;
  return j.dump(2);
}

BenchConfig BenchConfig::from_json(const std::string& text) {
  BenchConfig cfg;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("claim_counts")) cfg.claim_counts = j["claim_counts"].get<std::vector<uint64_t>>();
    if (j.contains("repetitions")) cfg.repetitions = j["repetitions"].get<uint32_t>();
    if (j.contains("trim_fraction")) cfg.trim_fraction = j["trim_fraction"].get<double>();
    if (j.contains("claim_value_bytes")) cfg.claim_value_bytes = j["claim_value_bytes"].get<size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad benchmark config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<StatRecord> bench_all(const BenchConfig& config) {
  config.validate();
  SeededRandom rng(config.seed);
  BenchActors actors = make_actors(rng);

  std::vector<StatRecord> records;
  Collector collect(records, config.trim_fraction);

  bench_claim_level(config, rng, collect);
  for (uint64_t n : config.claim_counts) {
    bench_at_n(config, actors, rng, n, collect);
  }
  bench_quota_scaling(config, actors, rng, collect);
  return records;
}

std::vector<StatRecord> bench_baseline_sd(const BenchConfig& config) {
  config.validate();
  SeededRandom rng(config.seed);
  BenchActors actors = make_actors(rng);

  std::vector<StatRecord> records;
  Collector collect(records, config.trim_fraction);

  for (uint64_t n : config.claim_counts) {
    auto claims = make_claims(rng, n, config.claim_value_bytes);
    IssuedCredential issued = issue(actors.issuer_key, actors.metadata, claims, rng);
    std::vector<double> req_t(config.repetitions), resp_t(config.repetitions),
        req_b(config.repetitions), resp_b(config.repetitions);
    for (uint32_t rep = 0; rep < config.repetitions; ++rep) {
      Bytes req, resp;
      req_t[rep] = time_us([&] { req = sd_request_bytes(claims); });
      resp_t[rep] = time_us([&] { resp = sd_response_bytes(issued.data); });
      req_b[rep] = static_cast<double>(req.size());
      resp_b[rep] = static_cast<double>(resp.size());
    }
    collect.add("sd.request.time", n, "time_us", std::move(req_t));
    collect.add("sd.response.time", n, "time_us", std::move(resp_t));
    collect.add("sd.request.bytes", n, "bytes", std::move(req_b));
    collect.add("sd.response.bytes", n, "bytes", std::move(resp_b));
  }
  return records;
}

std::vector<std::string> check_expected_orderings(const std::vector<StatRecord>& records,
                                                  const BenchConfig& config) {
  std::vector<std::string> violations;
  auto need = [&](const std::string& phase, uint64_t n) -> const StatRecord* {
    const StatRecord* r = find_record(records, phase, n);
    if (!r) violations.push_back("missing record " + phase + " at n=" + std::to_string(n));
    return r;
  };
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  };

  for (uint64_t n : config.claim_counts) {
    if (n < 8) continue;
    const auto* oreq_t = need("oprf.batch.request.time", n);
    const auto* oresp_t = need("oprf.batch.response.time", n);
    const auto* oreq_b = need("oprf.batch.request.bytes", n);
    const auto* oresp_b = need("oprf.batch.response.bytes", n);
    const auto* vp_b = need("vp.size.bytes", n);
    const auto* dvp_b = need("dvp.size.bytes", n);
    const auto* sreq_t = need("sd.request.time", n);
    const auto* sresp_t = need("sd.response.time", n);
    const auto* sreq_b = need("sd.request.bytes", n);
    const auto* sresp_b = need("sd.response.bytes", n);
    if (!oreq_t || !oresp_t || !oreq_b || !oresp_b || !vp_b || !dvp_b || !sreq_t ||
        !sresp_t || !sreq_b || !sresp_b) {
      continue;
    }
    std::string at = " at n=" + std::to_string(n);
    check(oreq_t->mean > oresp_t->mean,
          "verifier OPRF compute must exceed holder OPRF compute" + at);
    check(dvp_b->mean > vp_b->mean,
          "encrypted data must be larger than its presentation" + at);
    check(sreq_b->mean < oreq_b->mean,
          "baseline request must be smaller than OPRF request" + at);
    check(sresp_b->mean > oresp_b->mean,
          "baseline response must be larger than OPRF response" + at);
    check(oreq_t->mean > 10 * sreq_t->mean && oresp_t->mean > 10 * sresp_t->mean,
          "baseline must be at least 10x faster than OPRF" + at);
  }

  // Scaling shapes over the configured claim counts.
  std::vector<std::pair<double, double>> vp_points, enc_points;
  for (uint64_t n : config.claim_counts) {
    const auto* vp = find_record(records, "vp.create.time", n);
    const auto* enc = find_record(records, "dvp.encrypt.time", n);
    if (vp) vp_points.emplace_back(static_cast<double>(n), vp->mean);
    if (enc) enc_points.emplace_back(static_cast<double>(n), enc->mean);
  }
  if (vp_points.size() >= 3) {
    double slope = loglog_slope(vp_points);
    check(slope >= 0.9 && slope <= 1.1,
          "presentation creation must scale linearly in n (log-log slope " +
              std::to_string(slope) + ")");
  }
  if (enc_points.size() >= 3) {
    double slope = loglog_slope(enc_points);
    check(slope >= 0.9 && slope <= 1.1,
          "data encryption must scale linearly in n (log-log slope " +
              std::to_string(slope) + ")");
  }

  // Disclosure compute affine in the quota at fixed n.
  std::vector<std::pair<double, double>> quota_points;
  std::vector<double> validate_means;
  for (const auto& r : records) {
    if (r.phase == "disclosure.compute.time") {
      quota_points.emplace_back(static_cast<double>(r.n), r.mean);
    }
    if (r.phase == "vp.validate.at_full_n.time") validate_means.push_back(r.mean);
  }
  if (quota_points.size() >= 3) {
    LinearFit fit = linear_fit(quota_points);
    double slope = loglog_slope(quota_points);
    check(fit.slope > 0 && fit.r_squared >= 0.9 && slope >= 0.9 && slope <= 1.1,
          "disclosure compute must be affine in the quota (r2 " +
              std::to_string(fit.r_squared) + ", log-log slope " +
              std::to_string(slope) + ")");
  }
  if (validate_means.size() >= 2) {
    double lo = *std::min_element(validate_means.begin(), validate_means.end());
    double hi = *std::max_element(validate_means.begin(), validate_means.end());
    check(hi <= 2 * lo, "validation time must not depend on the quota");
  }

  return violations;
}

std::string summarize(const std::vector<StatRecord>& records) {
  std::ostringstream os;
  os << records.size() << " records\n";
  for (const auto& r : records) {
    os << "  " << r.phase << " n=" << r.n << " mean=" << r.mean << " " << r.metric
       << " (max " << r.max << ", p50 " << r.p50 << ", trimmed " << r.outliers << ")\n";
  }
  return os.str();
}

}  // namespace codssi
