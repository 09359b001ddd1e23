#include "markov.hpp"

#include <cmath>

#include "common.hpp"

namespace frauddet {

std::optional<size_t> MarkovFraudModel::vocab_index(size_t feature,
                                                    const std::string& category) const {
  const auto& ids = vocab_ids_[feature];
  const auto it = ids.find(category);
  if (it == ids.end()) return std::nullopt;
  return it->second;
}

void MarkovFraudModel::reindex() {
  vocab_ids_.assign(vocab.size(), {});
  for (size_t f = 0; f < vocab.size(); ++f)
    for (size_t j = 0; j < vocab[f].size(); ++j) vocab_ids_[f].emplace(vocab[f][j], j);
}

MarkovFraudModel fit_markov(const std::vector<CategorizedClaim>& train,
                            std::vector<std::string> feature_order, double alpha) {
  if (train.empty()) throw_invalid("fit_markov: training set is empty");
  if (alpha < 0.0) throw_invalid("fit_markov: alpha must be >= 0");
  const size_t n_features = feature_order.size();
  if (n_features == 0) throw_invalid("fit_markov: feature_order is empty");

  MarkovFraudModel model;
  model.feature_order = feature_order;
  model.alpha = alpha;
  model.states = StateTable(std::move(feature_order));
  model.vocab.resize(n_features);
  model.category_counts.resize(n_features);

  std::vector<std::unordered_map<std::string, size_t>> vocab_ids(n_features);
  auto category_id = [&](size_t f, const std::string& cat) {
    const auto [it, inserted] = vocab_ids[f].try_emplace(cat, model.vocab[f].size());
    if (inserted) {
      model.vocab[f].push_back(cat);
      model.category_counts[f].push_back(0);
    }
    return it->second;
  };

  // first pass: vocabularies, per-category counts, state fraud counts
  std::vector<std::vector<size_t>> encoded(train.size());
  int64_t fraud_total = 0;
  for (size_t i = 0; i < train.size(); ++i) {
    const auto& claim = train[i];
    const int state = model.states.insert(claim.categories);
    if (state > static_cast<int>(model.state_fraud.size()))
      model.state_fraud.push_back({});
    auto& stats = model.state_fraud[static_cast<size_t>(state - 1)];
    stats.total_count += 1;
    if (claim.fraud) {
      stats.fraud_count += 1;
      ++fraud_total;
    }
    encoded[i].resize(n_features);
    for (size_t f = 0; f < n_features; ++f) {
      const size_t j = category_id(f, claim.categories[f]);
      model.category_counts[f][j] += 1;
      encoded[i][f] = j;
    }
  }

  const auto n = static_cast<int64_t>(train.size());
  model.n_train = n;
  model.global_prior = static_cast<double>(fraud_total) / static_cast<double>(n);
  for (auto& stats : model.state_fraud)
    stats.p_fraud = (static_cast<double>(stats.fraud_count) + alpha) /
                    (static_cast<double>(stats.total_count) + 2.0 * alpha);

  // initial distribution over the first feature
  {
    const size_t v0 = model.vocab[0].size();
    model.initial.resize(v0);
    for (size_t j = 0; j < v0; ++j)
      model.initial[j] = (static_cast<double>(model.category_counts[0][j]) + alpha) /
                         (static_cast<double>(n) + alpha * static_cast<double>(v0));
  }

  // transition tables over adjacent feature pairs
  model.transitions.resize(n_features > 0 ? n_features - 1 : 0);
  for (size_t f = 0; f + 1 < n_features; ++f) {
    const size_t va = model.vocab[f].size();
    const size_t vb = model.vocab[f + 1].size();
    std::vector<std::vector<int64_t>> counts(va, std::vector<int64_t>(vb, 0));
    for (const auto& row : encoded) counts[row[f]][row[f + 1]] += 1;
    model.transitions[f].assign(va, std::vector<double>(vb, 0.0));
    for (size_t a = 0; a < va; ++a) {
      const auto row_total = static_cast<double>(model.category_counts[f][a]);
      for (size_t b = 0; b < vb; ++b)
        model.transitions[f][a][b] = (static_cast<double>(counts[a][b]) + alpha) /
                                     (row_total + alpha * static_cast<double>(vb));
    }
  }

  model.reindex();
  return model;
}

double score_state(const MarkovFraudModel& model, std::optional<int> state_id) {
  if (!state_id) return model.global_prior;
  const int id = *state_id;
  if (id < 1 || id > model.states.state_count())
    throw_invalid("score_state: state id " + std::to_string(id) + " out of range");
  return model.state_fraud[static_cast<size_t>(id - 1)].p_fraud;
}

namespace {

// Smoothed factor for a category never seen at this position: pretend its
// pair count is zero while keeping the stored rows intact.
double fallback_transition(const MarkovFraudModel& model, size_t f,
                           std::optional<size_t> from) {
  const double alpha = model.alpha;
  const double vb = static_cast<double>(model.vocab[f + 1].size());
  const double row_total =
      from ? static_cast<double>(model.category_counts[f][*from]) : 0.0;
  const double denom = row_total + alpha * vb;
  return denom > 0.0 ? alpha / denom : 0.0;
}

}  // namespace

ChainScore score_chain(const MarkovFraudModel& model, const StateTable::Tuple& tuple) {
  const size_t n_features = model.feature_order.size();
  if (tuple.size() != n_features)
    throw_invalid("score_chain: tuple has " + std::to_string(tuple.size()) +
                  " categories, expected " + std::to_string(n_features));

  double product = 1.0;
  {
    const auto j = model.vocab_index(0, tuple[0]);
    if (j) {
      product *= model.initial[*j];
    } else {
      const double v0 = static_cast<double>(model.vocab[0].size());
      const double denom = static_cast<double>(model.n_train) + model.alpha * v0;
      product *= denom > 0.0 ? model.alpha / denom : 0.0;
    }
  }
  for (size_t f = 0; f + 1 < n_features; ++f) {
    const auto a = model.vocab_index(f, tuple[f]);
    const auto b = model.vocab_index(f + 1, tuple[f + 1]);
    if (a && b) {
      product *= model.transitions[f][*a][*b];
    } else {
      product *= fallback_transition(model, f, a);
    }
  }

  const auto state = model.states.encode(tuple);
  const double p_fraud = score_state(model, state);
  ChainScore score;
  score.joint = product * p_fraud;
  const double joint_complement = product * (1.0 - p_fraud);
  const double denom = score.joint + joint_complement;
  // product can vanish when alpha == 0 meets an unseen category; fall back to
  // the state-level probability rather than dividing by zero
  score.normalized = denom > 0.0 ? score.joint / denom : p_fraud;
  return score;
}

Label classify(double score, double threshold) {
  return score > threshold ? Label::Fraud : Label::NotFraud;
}

std::vector<std::string> default_bin_labels(int k, bool amount_style) {
  if (k == 3) {
    return amount_style ? std::vector<std::string>{"low", "medium", "high"}
                        : std::vector<std::string>{"short", "medium", "long"};
  }
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(k));
  for (int j = 1; j <= k; ++j) labels.push_back("q" + std::to_string(j));
  return labels;
}

StateTable::Tuple categorize_claim(const ClaimRecord& rec, const BinningSpec& days_bins,
                                   const BinningSpec& net_bins) {
  return {to_string(rec.benefit_type),
          apply_bins(static_cast<double>(rec.days_stayed), days_bins),
          rec.diagnosis_code, to_string(rec.hospital_type),
          apply_bins(rec.net_amount, net_bins)};
}

MarkovFraudModel train_markov(const Dataset& train, const MarkovConfig& cfg) {
  if (train.records.empty()) throw_invalid("train_markov: training set is empty");
  if (cfg.alpha < 0.0) throw_invalid("train_markov: alpha must be >= 0");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0))
    throw_invalid("train_markov: threshold must be in [0,1]");
  if (cfg.days_stayed_bins < 1 || cfg.net_amount_bins < 1)
    throw_invalid("train_markov: bin counts must be >= 1");

  std::vector<double> days, amounts;
  days.reserve(train.records.size());
  amounts.reserve(train.records.size());
  for (const auto& r : train.records) {
    days.push_back(static_cast<double>(r.days_stayed));
    amounts.push_back(r.net_amount);
  }
  BinningSpec days_bins = fit_bins(days, cfg.days_stayed_bins,
                                   default_bin_labels(cfg.days_stayed_bins, false),
                                   "days_stayed");
  BinningSpec net_bins = fit_bins(amounts, cfg.net_amount_bins,
                                  default_bin_labels(cfg.net_amount_bins, true),
                                  "net_amount");

  std::vector<CategorizedClaim> categorized;
  categorized.reserve(train.records.size());
  for (const auto& r : train.records)
    categorized.push_back({categorize_claim(r, days_bins, net_bins),
                           r.label == Label::Fraud});

  MarkovFraudModel model = fit_markov(categorized, kMarkovFeatures, cfg.alpha);
  model.threshold = cfg.threshold;
  model.bins = {std::move(days_bins), std::move(net_bins)};
  return model;
}

std::vector<double> markov_scores(const MarkovFraudModel& model, const Dataset& data) {
  if (model.bins.size() != 2)
    throw_invalid("markov_scores: model lacks binning specs; was it trained on raw claims?");
  std::vector<double> scores;
  scores.reserve(data.records.size());
  for (const auto& r : data.records) {
    const auto tuple = categorize_claim(r, model.bins[0], model.bins[1]);
    scores.push_back(score_state(model, model.states.encode(tuple)));
  }
  return scores;
}

}  // namespace frauddet
