#pragma once

#include <cstdint>

#include "claims.hpp"

namespace frauddet {

// Configuration of the synthetic claims generator. The generator is a pure
// function of this struct: identical configs yield byte-identical datasets.
struct GenConfig {
  int64_t n_claims = 10000;
  double fraud_rate = 0.0995;
  // Scales the planted fraud pattern's log-odds contribution; 0 makes the
  // label independent of every feature.
  double signal_strength = 1.0;
  // When set, exactly round(n_claims * fraud_rate) claims are labelled fraud
  // (the top-k by sampled propensity, ties broken at random).
  bool exact_counts = false;
  uint64_t seed = 1;
  int n_diagnosis_codes = 40;
  int n_providers = 300;
  int n_districts = 30;
};

Dataset generate(const GenConfig& config);

// The planted per-claim fraud score before scaling; exposed for tests.
double planted_signal(const ClaimRecord& rec, double paid_ratio);

}  // namespace frauddet
