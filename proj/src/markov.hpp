#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "claims.hpp"
#include "discretize.hpp"

namespace frauddet {

// A claim reduced to its category tuple plus the fraud flag; the input of the
// core fitting routine.
struct CategorizedClaim {
  StateTable::Tuple categories;
  bool fraud = false;
};

struct StateFraudStats {
  int64_t fraud_count = 0;
  int64_t total_count = 0;
  double p_fraud = 0.0;  // smoothed (fraud+a)/(total+2a)
};

struct ChainScore {
  double joint = 0.0;       // P(X1)*prod P(X_{i+1}|X_i)*P(Fraud|state)
  double normalized = 0.0;  // joint / (joint + joint with the complement factor)
};

// Feature-chain fraud model: initial/transition distributions over the
// categorized features plus a per-state fraud probability table.
struct MarkovFraudModel {
  std::vector<std::string> feature_order;
  std::vector<BinningSpec> bins;  // binning used to categorize raw claims

  StateTable states;
  std::vector<std::vector<std::string>> vocab;  // [feature][j], first-appearance order
  std::vector<std::vector<int64_t>> category_counts;  // [feature][j] training counts
  std::vector<double> initial;                        // P(X1 = vocab[0][j]), smoothed
  // transitions[f][a][b] = P(X_{f+1} = vocab[f+1][b] | X_f = vocab[f][a])
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<StateFraudStats> state_fraud;  // index = state id - 1

  double alpha = 1.0;
  double threshold = 0.5;
  double global_prior = 0.0;  // training fraud fraction, unsmoothed
  int64_t n_train = 0;

  std::optional<size_t> vocab_index(size_t feature, const std::string& category) const;
  void reindex();  // rebuild the category lookup maps (after load)

 private:
  std::vector<std::unordered_map<std::string, size_t>> vocab_ids_;
};

// Fits initial/transition tables as smoothed relative frequencies over
// adjacent feature pairs and the per-state fraud table; deterministic.
MarkovFraudModel fit_markov(const std::vector<CategorizedClaim>& train,
                            std::vector<std::string> feature_order, double alpha);

// Smoothed P(Fraud|state); UNSEEN (nullopt) falls back to the global prior.
double score_state(const MarkovFraudModel& model, std::optional<int> state_id);

// The chain-product form. On seen tuples the transition product cancels in
// the normalization, so normalized == score_state; unseen categories take
// smoothed fallback factors instead of failing.
ChainScore score_chain(const MarkovFraudModel& model, const StateTable::Tuple& tuple);

// Fraud iff score > threshold (strict; ties go to NotFraud).
Label classify(double score, double threshold);

// ---- raw-claim pipeline -------------------------------------------------

struct MarkovConfig {
  double alpha = 1.0;
  double threshold = 0.5;
  int days_stayed_bins = 3;
  int net_amount_bins = 3;
};

// The five chain features, in state-table column order.
inline const std::vector<std::string> kMarkovFeatures = {
    "benefit_type", "days_stayed", "diagnosis_code", "hospital_type", "net_amount"};

std::vector<std::string> default_bin_labels(int k, bool amount_style);

StateTable::Tuple categorize_claim(const ClaimRecord& rec, const BinningSpec& days_bins,
                                   const BinningSpec& net_bins);

// Quantile-bins the numeric features on `train`, categorizes every claim and
// fits the chain model.
MarkovFraudModel train_markov(const Dataset& train, const MarkovConfig& cfg);

// Per-claim P(Fraud|state) under the fitted model.
std::vector<double> markov_scores(const MarkovFraudModel& model, const Dataset& data);

}  // namespace frauddet
