#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "codssi/attacks.hpp"
#include "codssi/bench.hpp"
#include "codssi/codec.hpp"
#include "codssi/disclosure.hpp"

namespace fs = std::filesystem;
using namespace codssi;

namespace {

constexpr std::string_view kKeyMagic = "CODSSI/KEY1";

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

void write_file(const fs::path& path, BytesView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

struct PartyKey {
  std::string id;
  SigningKey key;
};

Bytes encode_key_file(const std::string& id, const SigningKey& key) {
  Writer w;
  w.str(std::string(kKeyMagic));
  w.str(id);
  w.bytes(key.seed());
  return w.take();
}

PartyKey load_key(const fs::path& path) {
  Bytes data = read_file(path);
  try {
    Reader r(data);
    if (r.str() != kKeyMagic) throw IoError("not a key file: " + path.string());
    std::string id = r.str();
    Bytes seed = r.bytes();
    r.expect_end();
    return PartyKey{id, SigningKey::from_seed(seed)};
  } catch (const CodecError&) {
    throw IoError("malformed key file: " + path.string());
  }
}

fs::path default_dir() {
  if (const char* env = std::getenv("CODSSI_DIR")) return fs::path(env);
  return fs::path(".codssi");
}

KeyDirectory load_directory(const fs::path& dir) {
  return KeyDirectory::parse_signed(read_file(dir / "directory.bin"));
}

std::vector<std::pair<std::string, Bytes>> parse_claims_file(const fs::path& path) {
  Bytes raw = read_file(path);
  std::vector<std::pair<std::string, Bytes>> claims;
  std::string text = to_string(raw);
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("claims file line is not name=value: " + line);
    }
    claims.emplace_back(line.substr(0, eq), to_bytes(line.substr(eq + 1)));
    if (pos > text.size()) break;
  }
  if (claims.empty()) throw Error("claims file contains no claims");
  return claims;
}

std::pair<size_t, std::string> parse_pick(const std::string& pick) {
  size_t colon = pick.find(':');
  if (colon == std::string::npos) return {0, pick};
  size_t idx = 0;
  try {
    idx = std::stoul(pick.substr(0, colon));
  } catch (const std::exception&) {
    throw Error("bad pick, expected [credential:]claim: " + pick);
  }
  return {idx, pick.substr(colon + 1)};
}

// ---- keygen ----

struct KeygenOpts {
  std::string id;
  std::string dir;
};

int cmd_keygen(const KeygenOpts& o) {
  fs::path dir = o.dir.empty() ? default_dir() : fs::path(o.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());

  SystemRandom rng;
  fs::path root_path = dir / "root.key";
  SigningKey root = fs::exists(root_path) ? load_key(root_path).key
                                          : SigningKey::generate(rng);
  if (!fs::exists(root_path)) write_file(root_path, encode_key_file("root", root));

  fs::path dir_path = dir / "directory.bin";
  KeyDirectory directory;
  if (fs::exists(dir_path)) directory = load_directory(dir);

  SigningKey key = SigningKey::generate(rng);
  directory.add(o.id, key.public_key());
  write_file(dir / (o.id + ".key"), encode_key_file(o.id, key));
  write_file(dir_path, directory.serialize_signed(root));
  std::cout << "registered " << o.id << " in " << dir.string() << "\n";
  return 0;
}

// ---- issue ----

struct IssueOpts {
  std::string key_path;
  std::string subject;
  std::string type = "generic";
  std::string claims_path;
  std::string out;
  std::string data_out;
  int64_t expires = 0;
  std::string dir;
};

int cmd_issue(const IssueOpts& o) {
  fs::path dir = o.dir.empty() ? default_dir() : fs::path(o.dir);
  PartyKey issuer = load_key(o.key_path);
  KeyDirectory directory = load_directory(dir);
  auto claims = parse_claims_file(o.claims_path);

  SystemRandom rng;
  CredentialMetadata md{issuer.id, o.subject, o.type, unix_now(), o.expires};
  IssuedCredential issued = issue(issuer.key, md, claims, rng);
  CredentialCheck check = verify_credential(issued.credential, directory, unix_now());
  if (check != CredentialCheck::accept) {
    throw Error(std::string("issued credential fails verification: ") +
                to_string(check));
  }
  write_file(o.out, encode_credential(issued.credential));
  write_file(o.data_out, encode_credential_data(issued.data));
  std::cout << "issued " << claims.size() << " claims to " << o.subject << "\n";
  return 0;
}

// ---- present ----

struct PresentOpts {
  std::string key_path;
  std::vector<std::string> vc_paths;
  std::vector<std::string> data_paths;
  std::string audience;
  std::string out;
  std::string data_out;
  std::string secret_out;
  std::string group_name = "secp256k1";
  std::string dir;
};

int cmd_present(const PresentOpts& o) {
  if (o.vc_paths.size() != o.data_paths.size()) {
    throw Error("--vc and --data must be given the same number of times");
  }
  PartyKey holder = load_key(o.key_path);
  auto group = group_by_name(o.group_name);

  std::vector<IssuedCredential> inputs;
  for (size_t i = 0; i < o.vc_paths.size(); ++i) {
    IssuedCredential ic;
    ic.credential = decode_credential(read_file(o.vc_paths[i]));
    ic.data = decode_credential_data(read_file(o.data_paths[i]));
    inputs.push_back(std::move(ic));
  }

  SystemRandom rng;
  PresentationBundle bundle =
      create_presentation(*group, holder.key, holder.id, inputs, o.audience, rng);
  write_file(o.out, encode_presentation(bundle.vp));
  write_file(o.data_out, encode_presentation_data(bundle.data));
  write_file(o.secret_out, encode_presentation_secret(bundle.secret, group->name()));
  std::cout << "presentation for " << o.audience << " over " << inputs.size()
            << " credential(s)\n";
  return 0;
}

// ---- serve ----

struct ServeOpts {
  std::string key_path;
  std::string vp_path;
  std::string data_path;
  std::string secret_path;
  uint32_t quota = 1;
  std::string endpoint;
  uint32_t sessions = 1;
  bool keep_secret = false;
  std::string dir;
};

int cmd_serve(const ServeOpts& o) {
  fs::path dir = o.dir.empty() ? default_dir() : fs::path(o.dir);
  PartyKey holder = load_key(o.key_path);
  KeyDirectory directory = load_directory(dir);
  Bytes vp_bytes = read_file(o.vp_path);
  Bytes dvp_bytes = read_file(o.data_path);
  auto [secret, group_name] = decode_presentation_secret(read_file(o.secret_path));
  auto group = group_by_name(group_name);

  HolderOprf oprf(group, std::move(secret), o.quota);
  auto listener = listen_endpoint(o.endpoint);
  std::cout << "listening on " << listener->bound_endpoint() << std::endl;

  std::vector<std::thread> workers;
  for (uint32_t s = 0; s < o.sessions; ++s) {
    auto stream = listener->accept();
    workers.emplace_back([&, stream = std::move(stream)]() mutable {
      SystemRandom rng;
      FrameChannel channel(std::move(stream));
      try {
        HandshakeResult hs =
            channel.handshake_server(directory, holder.key, holder.id, rng);
        serve_disclosure(channel, oprf, holder.key, hs, vp_bytes, dvp_bytes, rng);
      } catch (const Error& e) {
        std::cerr << "session error: " << e.what() << "\n";
      }
      channel.close();
    });
  }
  for (auto& w : workers) w.join();
  listener->shutdown();
  oprf.close();
  if (!o.keep_secret) {
    std::error_code ec;
    fs::remove(o.secret_path, ec);
  }
  std::cout << "served " << o.sessions << " session(s), quota used " << oprf.used()
            << "/" << oprf.quota() << "\n";
  return 0;
}

// ---- disclose ----

struct DiscloseOpts {
  std::string key_path;
  std::string endpoint;
  std::string mode = "batch";
  std::vector<std::string> picks;
  std::string script_path;
  std::string group_name = "secp256k1";
  std::string dir;
};

struct ScriptRule {
  std::pair<size_t, std::string> after;
  Bytes prefix;
  std::pair<size_t, std::string> next;
};

struct AdaptiveScript {
  std::pair<size_t, std::string> start;
  std::vector<ScriptRule> rules;
};

// start <pick>
// if <pick> prefix <hex> then next <pick>
AdaptiveScript parse_script(const fs::path& path) {
  AdaptiveScript script;
  bool have_start = false;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string word;
    is >> word;
    if (word == "start") {
      std::string pick;
      if (!(is >> pick)) throw Error("bad script line: " + line);
      script.start = parse_pick(pick);
      have_start = true;
    } else if (word == "if") {
      std::string after, kw1, hex, kw2, kw3, next;
      if (!(is >> after >> kw1 >> hex >> kw2 >> kw3 >> next) || kw1 != "prefix" ||
          kw2 != "then" || kw3 != "next") {
        throw Error("bad script line: " + line);
      }
      auto prefix = from_hex(hex);
      if (!prefix) throw Error("bad hex in script line: " + line);
      script.rules.push_back({parse_pick(after), *prefix, parse_pick(next)});
    } else {
      throw Error("bad script line: " + line);
    }
  }
  if (!have_start) throw Error("script has no start rule");
  return script;
}

int cmd_disclose(const DiscloseOpts& o) {
  fs::path dir = o.dir.empty() ? default_dir() : fs::path(o.dir);
  PartyKey verifier = load_key(o.key_path);
  KeyDirectory directory = load_directory(dir);
  auto group = group_by_name(o.group_name);

  SystemRandom rng;
  FrameChannel channel(connect_endpoint(o.endpoint));
  HandshakeResult hs =
      channel.handshake_client(directory, verifier.key, verifier.id, rng);
  DisclosureClient client(channel, directory, group, hs, verifier.id, rng);
  client.await_offer();

  std::vector<DisclosedClaim> got;
  if (o.mode == "batch") {
    if (o.picks.empty()) throw Error("batch mode needs at least one --pick");
    DisclosureSelection sel;
    for (const auto& p : o.picks) sel.picks.push_back(parse_pick(p));
    got = client.disclose_batch(sel);
  } else if (o.mode == "adaptive") {
    DisclosureClient::Picker picker;
    if (!o.script_path.empty()) {
      AdaptiveScript script = parse_script(o.script_path);
      picker = [script](const std::vector<DisclosedClaim>& so_far)
          -> std::optional<std::pair<size_t, std::string>> {
        if (so_far.empty()) return script.start;
        const DisclosedClaim& last = so_far.back();
        for (const auto& rule : script.rules) {
          if (rule.after.first != last.credential_index ||
              rule.after.second != last.claim_name) {
            continue;
          }
          if (last.value.size() < rule.prefix.size()) continue;
          if (!std::equal(rule.prefix.begin(), rule.prefix.end(), last.value.begin())) {
            continue;
          }
          return rule.next;
        }
        return std::nullopt;
      };
    } else {
      if (o.picks.empty()) throw Error("adaptive mode needs --pick or --script");
      std::vector<std::pair<size_t, std::string>> picks;
      for (const auto& p : o.picks) picks.push_back(parse_pick(p));
      size_t next = 0;
      picker = [picks, next](const std::vector<DisclosedClaim>&) mutable
          -> std::optional<std::pair<size_t, std::string>> {
        if (next >= picks.size()) return std::nullopt;
        return picks[next++];
      };
    }
    got = client.disclose_adaptive(picker);
  } else {
    throw Error("mode must be batch or adaptive");
  }
  client.finish();
  channel.close();
  for (const auto& claim : got) {
    std::cout << claim.claim_name << "=" << to_string(BytesView(claim.value)) << "\n";
  }
  return 0;
}

// ---- bench ----

struct BenchOpts {
  std::string config_path;
  bool full_scale = false;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "bench.csv";
  bool check = false;
  bool summary = false;
};

int cmd_bench(const BenchOpts& o) {
  BenchConfig cfg = BenchConfig::desk();
  if (o.full_scale) cfg = BenchConfig{};
  if (!o.config_path.empty()) {
    cfg = BenchConfig::from_json(to_string(read_file(o.config_path)));
  }
  if (o.seed_set) cfg.seed = o.seed;
  cfg.validate();

  auto records = bench_all(cfg);
  write_file(o.out, to_bytes(write_csv(records)));
  std::cout << "wrote " << o.out << " (" << records.size() << " records)\n";
  if (o.summary) std::cout << summarize(records);
  if (o.check) {
    auto violations = check_expected_orderings(records, cfg);
    for (const auto& v : violations) std::cout << "VIOLATION: " << v << "\n";
    if (!violations.empty()) return 2;
    std::cout << "all asserted orderings and scaling shapes hold\n";
  }
  return 0;
}

// ---- attack ----

struct AttackOpts {
  uint64_t seed = 42;
  size_t scenarios = 20;
  bool selective_only = false;
};

int cmd_attack(const AttackOpts& o) {
  SelectiveFailureReport sf = attack_selective_failure(o.seed, o.scenarios);
  std::cout << sf.text();
  bool ok = sf.all_agree;
  if (!o.selective_only) {
    TamperReport tr = attack_tamper_and_replay(o.seed);
    std::cout << tr.text();
    ok = ok && tr.all_detected();
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oblivious selective-disclosure credentials"};
  app.require_subcommand(1);

  KeygenOpts kg;
  auto* keygen = app.add_subcommand("keygen", "create a party key and register it");
  keygen->add_option("id", kg.id, "party identifier")->required();
  keygen->add_option("--dir", kg.dir, "key directory path");

  IssueOpts is;
  auto* issue = app.add_subcommand("issue", "issue a credential over a claims file");
  issue->add_option("--key", is.key_path, "issuer key file")->required();
  issue->add_option("--subject", is.subject, "subject party id")->required();
  issue->add_option("--type", is.type, "credential type label");
  issue->add_option("--claims", is.claims_path, "claims file, name=value lines")
      ->required();
  issue->add_option("--out", is.out, "credential output file")->required();
  issue->add_option("--data-out", is.data_out, "credential data output file")
      ->required();
  issue->add_option("--expires", is.expires, "expiry unix time, 0 = never");
  issue->add_option("--dir", is.dir, "key directory path");

  PresentOpts pr;
  auto* present = app.add_subcommand("present", "derive a presentation");
  present->add_option("--key", pr.key_path, "holder key file")->required();
  present->add_option("--vc", pr.vc_paths, "credential file (repeatable)")->required();
  present->add_option("--data", pr.data_paths, "credential data file (repeatable)")
      ->required();
  present->add_option("--audience", pr.audience, "verifier party id")->required();
  present->add_option("--out", pr.out, "presentation output file")->required();
  present->add_option("--data-out", pr.data_out, "encrypted data output file")
      ->required();
  present->add_option("--secret-out", pr.secret_out, "holder secret output file")
      ->required();
  present->add_option("--group", pr.group_name, "group backend name");
  present->add_option("--dir", pr.dir, "key directory path");

  ServeOpts sv;
  auto* serve = app.add_subcommand("serve", "serve oblivious disclosures");
  serve->add_option("--key", sv.key_path, "holder key file")->required();
  serve->add_option("--vp", sv.vp_path, "presentation file")->required();
  serve->add_option("--data", sv.data_path, "encrypted data file")->required();
  serve->add_option("--secret", sv.secret_path, "holder secret file")->required();
  serve->add_option("--quota", sv.quota, "total evaluation quota")->required();
  serve->add_option("--endpoint", sv.endpoint, "loop:<name> or tcp:<host>:<port>")
      ->required();
  serve->add_option("--sessions", sv.sessions, "sessions to serve before exiting");
  serve->add_flag("--keep-secret", sv.keep_secret, "do not delete the secret file");
  serve->add_option("--dir", sv.dir, "key directory path");

  DiscloseOpts dc;
  auto* disclose = app.add_subcommand("disclose", "request disclosures from a holder");
  disclose->add_option("--key", dc.key_path, "verifier key file")->required();
  disclose->add_option("--endpoint", dc.endpoint, "holder endpoint")->required();
  disclose->add_option("--mode", dc.mode, "batch or adaptive");
  disclose->add_option("--pick", dc.picks, "claim pick, [credential:]name (repeatable)");
  disclose->add_option("--script", dc.script_path, "adaptive rule file");
  disclose->add_option("--group", dc.group_name, "group backend name");
  disclose->add_option("--dir", dc.dir, "key directory path");

  BenchOpts bn;
  auto* bench = app.add_subcommand("bench", "run the measurement harness");
  bench->add_option("--config", bn.config_path, "JSON config file");
  bench->add_flag("--full-scale", bn.full_scale, "full-scale claim counts and reps");
  auto* seed_opt = bench->add_option("--seed", bn.seed, "override config seed");
  bench->add_option("--out", bn.out, "CSV output path");
  bench->add_flag("--check", bn.check, "assert orderings and scaling shapes");
  bench->add_flag("--summary", bn.summary, "print per-record summary");

  AttackOpts at;
  auto* attack = app.add_subcommand("attack", "run the adversarial harness");
  attack->add_option("--seed", at.seed, "scenario seed");
  attack->add_option("--scenarios", at.scenarios, "selective-failure scenario count");
  attack->add_flag("--selective-only", at.selective_only, "skip the tamper sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  bn.seed_set = seed_opt->count() > 0;

  try {
    if (app.got_subcommand(keygen)) return cmd_keygen(kg);
    if (app.got_subcommand(issue)) return cmd_issue(is);
    if (app.got_subcommand(present)) return cmd_present(pr);
    if (app.got_subcommand(serve)) return cmd_serve(sv);
    if (app.got_subcommand(disclose)) return cmd_disclose(dc);
    if (app.got_subcommand(bench)) return cmd_bench(bn);
    if (app.got_subcommand(attack)) return cmd_attack(at);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
