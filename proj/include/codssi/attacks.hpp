#pragma once

#include "codssi/disclosure.hpp"

namespace codssi {

// One malicious-holder trial: the holder deviates on a single target claim
// and the run records whether the verifier aborts and what the holder can
// infer from session completion.
//   deviation 1: claim value swapped before encryption, key left honest
//   deviation 2: key derived from a manipulated digest, stored data honest
struct SelectiveFailureCase {
  size_t index = 0;
  int deviation = 0;
  size_t n_claims = 0;
  std::string target_claim;
  bool target_selected = false;
  bool adaptive = false;
  bool predicted_abort = false;
  bool observed_abort = false;
  bool holder_saw_completion = false;
  std::string failure_stage;  // "aead", "opening", or "none" (white-box probe)
  bool agrees = false;
};

struct SelectiveFailureReport {
  std::vector<SelectiveFailureCase> cases;
  bool all_agree = false;
  std::string text() const;
};

// Runs the full protocol with a deviating holder across randomized
// scenarios; the outcome table (abort iff the target was selected, silent
// completion otherwise, holder inference from the close frame) is the data.
SelectiveFailureReport attack_selective_failure(uint64_t seed, size_t scenarios = 20);

struct TamperMiss {
  std::string label;
  std::string outcome;
};

struct TamperReport {
  size_t dvp_flips = 0;
  size_t dvp_detected = 0;
  size_t frame_flips = 0;
  size_t frame_detected = 0;
  size_t replay_trials = 0;
  size_t replay_rejected = 0;
  std::vector<TamperMiss> misses;

  bool all_detected() const {
    return misses.empty() && dvp_detected == dvp_flips &&
           frame_detected == frame_flips && replay_rejected == replay_trials;
  }
  std::string text() const;
};

// Integrity sweep: flips every byte of every field of a 4-claim encrypted
// claim set, then every byte of every message of a live session (handshake
// included), then replays stale frames across sessions. Every case must end
// in a detectable failure; silent success, right or wrong, is a miss.
TamperReport attack_tamper_and_replay(uint64_t seed);

}  // namespace codssi
