#pragma once

#include "codssi/stats.hpp"

namespace codssi {

// Experiment shape. Defaults mirror the published measurement design: claim
// counts doubling from 2 to 1024, 1000 repetitions, 1% trimmed per tail,
// 30-byte hex claim values. desk() is the CI-sized variant.
struct BenchConfig {
  std::vector<uint64_t> claim_counts = {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  uint32_t repetitions = 1000;
  double trim_fraction = 0.01;
  size_t claim_value_bytes = 30;
  uint64_t seed = 1;

  static BenchConfig desk();
  void validate() const;

  std::string to_json() const;
  static BenchConfig from_json(const std::string& text);
};

// Full measurement sweep: claim-level primitives, credential and
// presentation phases, worst-case full-disclosure OPRF exchange, the plain
// selective-disclosure baseline, and quota scaling at the largest n.
std::vector<StatRecord> bench_all(const BenchConfig& config);

// Just the plain selective-disclosure baseline (request is a claim-name
// list, response carries values and salts; no obliviousness).
std::vector<StatRecord> bench_baseline_sd(const BenchConfig& config);

// Asserted orderings and scaling shapes. Returns human-readable violations;
// empty means everything holds.
std::vector<std::string> check_expected_orderings(const std::vector<StatRecord>& records,
                                                  const BenchConfig& config);

std::string summarize(const std::vector<StatRecord>& records);

}  // namespace codssi
