#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "claims.hpp"

namespace frauddet {

struct GbmConfig {
  int n_trees = 300;
  int max_depth = 5;
  double learning_rate = 0.1;
  int cv_folds = 10;  // < 2 disables cross-validation
  int min_leaf_count = 10;
  uint64_t seed = 1;
  bool one_hot = false;           // expand categoricals to indicator columns
  bool use_best_iteration = true; // predict with the CV-selected iteration
  double threshold = 0.5;
};

// Row-major numeric matrix.
struct Matrix {
  std::vector<double> values;
  size_t rows = 0;
  size_t cols = 0;

  double at(size_t r, size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(size_t r) const { return {values.data() + r * cols, cols}; }
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold routes left
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;  // leaf increment (log-odds scale)
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct FeatureSpec {
  std::string name;
  bool categorical = false;
  std::vector<std::string> categories;  // first-appearance order; empty for numeric
};

// The eight model features in matrix order; numerics pass through, categoricals
// map to first-appearance ordinal codes (unseen -> -1) or one-hot columns
// (unseen -> all zero).
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  static FeatureEncoder fit(const Dataset& train, bool one_hot);
  static FeatureEncoder from_specs(std::vector<FeatureSpec> specs, bool one_hot);

  size_t column_count() const { return columns_; }
  bool one_hot() const { return one_hot_; }
  const std::vector<FeatureSpec>& features() const { return specs_; }

  void encode_row(const ClaimRecord& rec, std::span<double> out) const;
  Matrix encode(const Dataset& data) const;

 private:
  void finalize();

  std::vector<FeatureSpec> specs_;
  std::vector<std::unordered_map<std::string, int>> codes_;
  std::vector<size_t> offsets_;
  size_t columns_ = 0;
  bool one_hot_ = false;
};

struct GbmModel {
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  FeatureEncoder encoder;
  int best_iteration = 0;  // number of trees used by predict
  double threshold = 0.5;
  std::vector<double> train_deviance;  // per iteration; not persisted

  double predict_row(std::span<const double> row) const;
  double predict_row(std::span<const double> row, int n_trees) const;
  double predict_claim(const ClaimRecord& rec) const;
};

struct CvReport {
  std::vector<double> mean_deviance;  // held-out, averaged over folds, per iteration
  int best_iteration = 0;             // 1-indexed argmin, first index on ties
};

double sigmoid(double x);

// Mean of -2[y ln p + (1-y) ln(1-p)]; probabilities clamped at 1e-15.
double bernoulli_deviance(std::span<const int32_t> labels, std::span<const double> probs);

// Depth-limited least-squares tree on `targets` with Newton leaf values
// sum(targets)/sum(hessians). Exact greedy split search over every feature and
// boundary between adjacent distinct values; the best squared-error reduction
// wins, ties broken by lowest feature index then lowest threshold.
RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets,
                                   std::span<const double> hessians, int max_depth,
                                   int min_leaf_count);

// Threshold placed halfway between two adjacent distinct values, nudged down
// to `lo` if rounding lands on `hi`.
double split_threshold(double lo, double hi);

GbmModel fit_gbm(const Matrix& x, std::span<const int32_t> labels, const GbmConfig& cfg);

CvReport cross_validate(const Matrix& x, std::span<const int32_t> labels,
                        const GbmConfig& cfg);

// Seeded balanced partition of 0..n-1 into k folds (sizes differ by at most 1).
std::vector<std::vector<uint32_t>> make_folds(size_t n, int k, uint64_t seed);

// ---- raw-claim pipeline -------------------------------------------------

inline const std::vector<std::string> kGbmFeatures = {
    "benefit_type", "days_stayed",       "diagnosis_code",
    "hospital_type", "net_amount",       "provider_id",
    "hospital_district", "amount_paid_to_hospital"};

struct GbmTrainResult {
  GbmModel model;
  std::optional<CvReport> cv;
};

GbmTrainResult train_gbm(const Dataset& train, const GbmConfig& cfg);

std::vector<double> gbm_scores(const GbmModel& model, const Dataset& data);

}  // namespace frauddet
