#include "gbm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "common.hpp"
#include "rng.hpp"

namespace frauddet {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

constexpr double kProbClamp = 1e-15;
constexpr double kHessianGuard = 1e-12;
constexpr uint64_t kFoldseedSalt = 0x9E3779B97F4A7C15ULL;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

}  // namespace

double bernoulli_deviance(std::span<const int32_t> labels,
                          std::span<const double> probs) {
  if (labels.size() != probs.size())
    throw_invalid("bernoulli_deviance: labels and probs differ in length");
  if (labels.empty()) throw_invalid("bernoulli_deviance: empty input");
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    total += labels[i] != 0 ? std::log(p) : std::log(1.0 - p);
  }
  return -2.0 * total / static_cast<double>(labels.size());
}

double RegressionTree::predict(std::span<const double> row) const {
  size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<size_t>(row[static_cast<size_t>(n.feature)] <= n.threshold
                                ? n.left
                                : n.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  std::function<int(size_t)> walk = [&](size_t i) -> int {
    const auto& n = nodes[i];
    if (n.feature < 0) return 0;
    return 1 + std::max(walk(static_cast<size_t>(n.left)),
                        walk(static_cast<size_t>(n.right)));
  };
  return nodes.empty() ? 0 : walk(0);
}

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

namespace {

// Row indices sorted per column (stable, so ties keep row order); computed
// once per training matrix and shared by every tree fit.
struct SortedColumns {
  explicit SortedColumns(const Matrix& x) {
    order.resize(x.cols);
    for (size_t c = 0; c < x.cols; ++c) {
      auto& idx = order[c];
      idx.resize(x.rows);
      std::iota(idx.begin(), idx.end(), 0u);
      std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        return x.at(a, c) < x.at(b, c);
      });
    }
  }
  std::vector<std::vector<uint32_t>> order;
};

struct NodeStats {
  int64_t count = 0;
  double sum_target = 0.0;
};

struct SplitChoice {
  double gain = 0.0;
  int32_t feature = -1;
  double threshold = 0.0;
};

// Level-wise exact greedy tree growth. `node_of` maps each matrix row to its
// current node (-1 for rows outside this fit) and doubles as scratch; on
// return it holds each row's leaf so callers can apply leaf values in O(n).
RegressionTree grow_tree(const Matrix& x, const SortedColumns& sorted,
                         std::span<const double> targets,
                         std::span<const double> hessians, int max_depth,
                         int min_leaf_count, std::vector<int32_t>& node_of) {
  RegressionTree tree;
  tree.nodes.push_back({});
  std::vector<NodeStats> stats(1);
  for (size_t r = 0; r < x.rows; ++r) {
    if (node_of[r] != 0) continue;
    stats[0].count += 1;
    stats[0].sum_target += targets[r];
  }

  std::vector<int32_t> frontier{0};
  std::vector<int32_t> slot_of_node;
  std::vector<int64_t> run_count;
  std::vector<double> run_sum, prev_value;
  std::vector<SplitChoice> best;

  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<int32_t> splittable;
    for (const int32_t node : frontier)
      if (stats[static_cast<size_t>(node)].count >=
          2 * static_cast<int64_t>(min_leaf_count))
        splittable.push_back(node);
    if (splittable.empty()) break;

    slot_of_node.assign(tree.nodes.size(), -1);
    for (size_t s = 0; s < splittable.size(); ++s)
      slot_of_node[static_cast<size_t>(splittable[s])] = static_cast<int32_t>(s);
    best.assign(splittable.size(), {});
    run_count.resize(splittable.size());
    run_sum.resize(splittable.size());
    prev_value.resize(splittable.size());

    for (size_t f = 0; f < x.cols; ++f) {
      std::fill(run_count.begin(), run_count.end(), int64_t{0});
      std::fill(run_sum.begin(), run_sum.end(), 0.0);
      for (const uint32_t r : sorted.order[f]) {
        const int32_t node = node_of[r];
        if (node < 0) continue;
        const int32_t slot = slot_of_node[static_cast<size_t>(node)];
        if (slot < 0) continue;
        const double v = x.at(r, f);
        const auto s = static_cast<size_t>(slot);
        if (run_count[s] > 0 && v > prev_value[s]) {
          const auto& ns = stats[static_cast<size_t>(node)];
          const int64_t n_left = run_count[s];
          const int64_t n_right = ns.count - n_left;
          if (n_left >= min_leaf_count && n_right >= min_leaf_count) {
            const double sum_left = run_sum[s];
            const double sum_right = ns.sum_target - sum_left;
            const double gain =
                sum_left * sum_left / static_cast<double>(n_left) +
                sum_right * sum_right / static_cast<double>(n_right) -
                ns.sum_target * ns.sum_target / static_cast<double>(ns.count);
            if (gain > best[s].gain) {
              best[s].gain = gain;
              best[s].feature = static_cast<int32_t>(f);
              best[s].threshold = split_threshold(prev_value[s], v);
            }
          }
        }
        run_count[s] += 1;
        run_sum[s] += targets[r];
        prev_value[s] = v;
      }
    }

    std::vector<int32_t> next_frontier;
    for (size_t s = 0; s < splittable.size(); ++s) {
      if (best[s].feature < 0 || !(best[s].gain > 0.0)) continue;
      const auto node = static_cast<size_t>(splittable[s]);
      const auto left = static_cast<int32_t>(tree.nodes.size());
      tree.nodes[node].feature = best[s].feature;
      tree.nodes[node].threshold = best[s].threshold;
      tree.nodes[node].left = left;
      tree.nodes[node].right = left + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      stats.push_back({});
      stats.push_back({});
      next_frontier.push_back(left);
      next_frontier.push_back(left + 1);
    }
    if (next_frontier.empty()) break;

    for (size_t r = 0; r < x.rows; ++r) {
      const int32_t node = node_of[r];
      if (node < 0) continue;
      const auto& n = tree.nodes[static_cast<size_t>(node)];
      if (n.feature < 0) continue;
      const int32_t child =
          x.at(r, static_cast<size_t>(n.feature)) <= n.threshold ? n.left : n.right;
      node_of[r] = child;
      auto& cs = stats[static_cast<size_t>(child)];
      cs.count += 1;
      cs.sum_target += targets[r];
    }
    frontier = std::move(next_frontier);
  }

  // Newton leaf values, guarded against a vanishing hessian sum.
  std::vector<double> sum_hessian(tree.nodes.size(), 0.0);
  for (size_t r = 0; r < x.rows; ++r) {
    const int32_t node = node_of[r];
    if (node >= 0) sum_hessian[static_cast<size_t>(node)] += hessians[r];
  }
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].feature >= 0) continue;
    tree.nodes[i].value =
        sum_hessian[i] > kHessianGuard ? stats[i].sum_target / sum_hessian[i] : 0.0;
  }
  return tree;
}

void validate_config(const GbmConfig& cfg) {
  if (cfg.n_trees < 0) throw_invalid("gbm: n_trees must be >= 0");
  if (cfg.max_depth < 1) throw_invalid("gbm: max_depth must be >= 1");
  if (cfg.learning_rate < 0.0) throw_invalid("gbm: learning_rate must be >= 0");
  if (cfg.min_leaf_count < 1) throw_invalid("gbm: min_leaf_count must be >= 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0))
    throw_invalid("gbm: threshold must be in [0,1]");
}

void validate_matrix(const Matrix& x, std::span<const int32_t> labels) {
  if (x.rows == 0 || x.cols == 0) throw_invalid("gbm: empty training matrix");
  if (labels.size() != x.rows)
    throw_invalid("gbm: label count does not match matrix rows");
  for (const double v : x.values)
    if (!std::isfinite(v)) throw_validation("gbm: features must be finite");
}

struct BoostFit {
  double f0 = 0.0;
  std::vector<RegressionTree> trees;
  std::vector<double> train_deviance;
};

// Shared boosting driver over a row subset; `per_tree` observes each fitted
// tree (the cross-validation harness uses it to track held-out deviance).
BoostFit boost(const Matrix& x, const SortedColumns& sorted,
               std::span<const int32_t> labels, std::span<const uint32_t> rows,
               const GbmConfig& cfg,
               const std::function<void(int, const RegressionTree&)>& per_tree) {
  int64_t positives = 0;
  for (const uint32_t r : rows) positives += labels[r] != 0 ? 1 : 0;
  if (positives == 0 || positives == static_cast<int64_t>(rows.size()))
    throw_validation("gbm: training labels are all identical");

  BoostFit fit;
  const double base_rate =
      static_cast<double>(positives) / static_cast<double>(rows.size());
  fit.f0 = std::log(base_rate / (1.0 - base_rate));

  std::vector<double> score(x.rows, fit.f0);
  std::vector<double> targets(x.rows, 0.0);
  std::vector<double> hessians(x.rows, 0.0);
  std::vector<int32_t> node_of(x.rows);
  std::vector<int32_t> sub_labels(rows.size());
  std::vector<double> sub_probs(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) sub_labels[i] = labels[rows[i]];

  fit.trees.reserve(static_cast<size_t>(cfg.n_trees));
  fit.train_deviance.reserve(static_cast<size_t>(cfg.n_trees));
  for (int m = 1; m <= cfg.n_trees; ++m) {
    std::fill(node_of.begin(), node_of.end(), int32_t{-1});
    for (const uint32_t r : rows) {
      const double p = sigmoid(score[r]);
      targets[r] = static_cast<double>(labels[r]) - p;  // negative gradient
      hessians[r] = p * (1.0 - p);
      node_of[r] = 0;
    }
    RegressionTree tree = grow_tree(x, sorted, targets, hessians, cfg.max_depth,
                                    cfg.min_leaf_count, node_of);
    for (const uint32_t r : rows)
      score[r] += cfg.learning_rate *
                  tree.nodes[static_cast<size_t>(node_of[r])].value;

    for (size_t i = 0; i < rows.size(); ++i) sub_probs[i] = sigmoid(score[rows[i]]);
    fit.train_deviance.push_back(bernoulli_deviance(sub_labels, sub_probs));
    if (per_tree) per_tree(m, tree);
    fit.trees.push_back(std::move(tree));
  }
  return fit;
}

}  // namespace

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets,
                                   std::span<const double> hessians, int max_depth,
                                   int min_leaf_count) {
  if (x.rows == 0) throw_invalid("fit_regression_tree: empty matrix");
  if (targets.size() != x.rows || hessians.size() != x.rows)
    throw_invalid("fit_regression_tree: targets/hessians must match matrix rows");
  if (max_depth < 1) throw_invalid("fit_regression_tree: max_depth must be >= 1");
  if (min_leaf_count < 1) throw_invalid("fit_regression_tree: min_leaf_count must be >= 1");
  SortedColumns sorted(x);
  std::vector<int32_t> node_of(x.rows, 0);
  return grow_tree(x, sorted, targets, hessians, max_depth, min_leaf_count, node_of);
}

GbmModel fit_gbm(const Matrix& x, std::span<const int32_t> labels,
                 const GbmConfig& cfg) {
  validate_config(cfg);
  validate_matrix(x, labels);

  std::vector<uint32_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), 0u);
  SortedColumns sorted(x);
  BoostFit fit = boost(x, sorted, labels, rows, cfg, nullptr);

  GbmModel model;
  model.f0 = fit.f0;
  model.learning_rate = cfg.learning_rate;
  model.trees = std::move(fit.trees);
  model.best_iteration = cfg.n_trees;
  model.threshold = cfg.threshold;
  model.train_deviance = std::move(fit.train_deviance);
  return model;
}

std::vector<std::vector<uint32_t>> make_folds(size_t n, int k, uint64_t seed) {
  if (k < 2) throw_invalid("make_folds: need at least 2 folds");
  if (static_cast<size_t>(k) > n)
    throw_invalid("make_folds: more folds than rows (" + std::to_string(k) + " > " +
                  std::to_string(n) + ")");
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(seed ^ kFoldseedSalt);
  shuffle(order, rng);

  std::vector<std::vector<uint32_t>> folds(static_cast<size_t>(k));
  const size_t base = n / static_cast<size_t>(k);
  const size_t extra = n % static_cast<size_t>(k);
  size_t pos = 0;
  for (size_t f = 0; f < static_cast<size_t>(k); ++f) {
    const size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<long>(pos),
                    order.begin() + static_cast<long>(pos + len));
    pos += len;
  }
  return folds;
}

CvReport cross_validate(const Matrix& x, std::span<const int32_t> labels,
                        const GbmConfig& cfg) {
  validate_config(cfg);
  validate_matrix(x, labels);
  if (cfg.cv_folds < 2) throw_invalid("cross_validate: cv_folds must be >= 2");
  if (cfg.n_trees < 1) throw_invalid("cross_validate: n_trees must be >= 1");

  const auto folds = make_folds(x.rows, cfg.cv_folds, cfg.seed);
  SortedColumns sorted(x);

  CvReport report;
  report.mean_deviance.assign(static_cast<size_t>(cfg.n_trees), 0.0);
  for (const auto& holdout : folds) {
    std::vector<uint8_t> held(x.rows, 0);
    for (const uint32_t r : holdout) held[r] = 1;
    std::vector<uint32_t> train_rows;
    train_rows.reserve(x.rows - holdout.size());
    for (uint32_t r = 0; r < x.rows; ++r)
      if (!held[r]) train_rows.push_back(r);

    std::vector<int32_t> hold_labels(holdout.size());
    for (size_t i = 0; i < holdout.size(); ++i) hold_labels[i] = labels[holdout[i]];

    std::vector<double> hold_score(holdout.size());
    std::vector<double> hold_probs(holdout.size());
    bool primed = false;
    boost(x, sorted, labels, train_rows, cfg,
          [&](int iteration, const RegressionTree& tree) {
            if (!primed) {
              // f0 of this fold's fit: recompute from the train rows
              int64_t pos = 0;
              for (const uint32_t r : train_rows) pos += labels[r] != 0 ? 1 : 0;
              const double rate =
                  static_cast<double>(pos) / static_cast<double>(train_rows.size());
              std::fill(hold_score.begin(), hold_score.end(),
                        std::log(rate / (1.0 - rate)));
              primed = true;
            }
            for (size_t i = 0; i < holdout.size(); ++i)
              hold_score[i] += cfg.learning_rate * tree.predict(x.row(holdout[i]));
            for (size_t i = 0; i < holdout.size(); ++i)
              hold_probs[i] = sigmoid(hold_score[i]);
            report.mean_deviance[static_cast<size_t>(iteration - 1)] +=
                bernoulli_deviance(hold_labels, hold_probs);
          });
  }
  for (auto& d : report.mean_deviance) d /= static_cast<double>(folds.size());

  size_t best = 0;
  for (size_t i = 1; i < report.mean_deviance.size(); ++i)
    if (report.mean_deviance[i] < report.mean_deviance[best]) best = i;
  report.best_iteration = static_cast<int>(best) + 1;
  return report;
}

// ---- feature encoding -----------------------------------------------------

namespace {

constexpr bool kFeatureCategorical[] = {true, false, true, true,
                                        false, true, true, false};

std::string categorical_value(const ClaimRecord& r, size_t feature) {
  switch (feature) {
    case 0: return to_string(r.benefit_type);
    case 2: return r.diagnosis_code;
    case 3: return to_string(r.hospital_type);
    case 5: return r.provider_id;
    default: return r.hospital_district;  // 6
  }
}

double numeric_value(const ClaimRecord& r, size_t feature) {
  switch (feature) {
    case 1: return static_cast<double>(r.days_stayed);
    case 4: return r.net_amount;
    default: return r.amount_paid_to_hospital;  // 7
  }
}

}  // namespace

FeatureEncoder FeatureEncoder::fit(const Dataset& train, bool one_hot) {
  std::vector<FeatureSpec> specs;
  specs.reserve(kGbmFeatures.size());
  for (size_t f = 0; f < kGbmFeatures.size(); ++f)
    specs.push_back({kGbmFeatures[f], kFeatureCategorical[f], {}});

  std::vector<std::unordered_map<std::string, int>> seen(specs.size());
  for (const auto& rec : train.records) {
    for (size_t f = 0; f < specs.size(); ++f) {
      if (!specs[f].categorical) continue;
      const std::string v = categorical_value(rec, f);
      const auto [it, inserted] =
          seen[f].try_emplace(v, static_cast<int>(specs[f].categories.size()));
      if (inserted) specs[f].categories.push_back(v);
      (void)it;
    }
  }
  return from_specs(std::move(specs), one_hot);
}

FeatureEncoder FeatureEncoder::from_specs(std::vector<FeatureSpec> specs, bool one_hot) {
  FeatureEncoder enc;
  enc.specs_ = std::move(specs);
  enc.one_hot_ = one_hot;
  enc.finalize();
  return enc;
}

void FeatureEncoder::finalize() {
  codes_.assign(specs_.size(), {});
  offsets_.assign(specs_.size(), 0);
  columns_ = 0;
  for (size_t f = 0; f < specs_.size(); ++f) {
    offsets_[f] = columns_;
    if (specs_[f].categorical) {
      for (size_t j = 0; j < specs_[f].categories.size(); ++j)
        codes_[f].emplace(specs_[f].categories[j], static_cast<int>(j));
      columns_ += one_hot_ ? specs_[f].categories.size() : 1;
    } else {
      columns_ += 1;
    }
  }
}

void FeatureEncoder::encode_row(const ClaimRecord& rec, std::span<double> out) const {
  for (size_t f = 0; f < specs_.size(); ++f) {
    const size_t at = offsets_[f];
    if (!specs_[f].categorical) {
      out[at] = numeric_value(rec, f);
      continue;
    }
    const std::string v = categorical_value(rec, f);
    const auto it = codes_[f].find(v);
    if (one_hot_) {
      const size_t width = specs_[f].categories.size();
      for (size_t j = 0; j < width; ++j) out[at + j] = 0.0;
      if (it != codes_[f].end()) out[at + static_cast<size_t>(it->second)] = 1.0;
    } else {
      out[at] = it != codes_[f].end() ? static_cast<double>(it->second) : -1.0;
    }
  }
}

Matrix FeatureEncoder::encode(const Dataset& data) const {
  Matrix m;
  m.rows = data.records.size();
  m.cols = columns_;
  m.values.resize(m.rows * m.cols);
  for (size_t r = 0; r < m.rows; ++r)
    encode_row(data.records[r], {m.values.data() + r * m.cols, m.cols});
  return m;
}

double GbmModel::predict_row(std::span<const double> row, int n_trees) const {
  double score = f0;
  const auto limit = std::min<size_t>(trees.size(), static_cast<size_t>(n_trees));
  for (size_t m = 0; m < limit; ++m) score += learning_rate * trees[m].predict(row);
  return clamp_prob(sigmoid(score));
}

double GbmModel::predict_row(std::span<const double> row) const {
  return predict_row(row, best_iteration);
}

double GbmModel::predict_claim(const ClaimRecord& rec) const {
  std::vector<double> row(encoder.column_count());
  encoder.encode_row(rec, row);
  return predict_row(row);
}

GbmTrainResult train_gbm(const Dataset& train, const GbmConfig& cfg) {
  validate_config(cfg);
  if (train.records.empty()) throw_invalid("train_gbm: training set is empty");

  GbmTrainResult result;
  FeatureEncoder encoder = FeatureEncoder::fit(train, cfg.one_hot);
  const Matrix x = encoder.encode(train);
  std::vector<int32_t> y(train.records.size());
  for (size_t i = 0; i < y.size(); ++i)
    y[i] = train.records[i].label == Label::Fraud ? 1 : 0;

  if (cfg.cv_folds >= 2 && cfg.n_trees >= 1)
    result.cv = cross_validate(x, y, cfg);

  result.model = fit_gbm(x, y, cfg);
  result.model.encoder = std::move(encoder);
  if (result.cv && cfg.use_best_iteration)
    result.model.best_iteration = result.cv->best_iteration;
  return result;
}

std::vector<double> gbm_scores(const GbmModel& model, const Dataset& data) {
  std::vector<double> scores;
  scores.reserve(data.records.size());
  std::vector<double> row(model.encoder.column_count());
  for (const auto& rec : data.records) {
    model.encoder.encode_row(rec, row);
    scores.push_back(model.predict_row(row));
  }
  return scores;
}

}  // namespace frauddet
