#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "claims.hpp"

namespace frauddet {

// Fraud is the positive class throughout.
struct ConfusionMatrix {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Metrics with an empty denominator are reported as undefined (nullopt),
// never silently zero.
struct MetricsReport {
  std::optional<double> sensitivity;  // TP / (TP + FN)
  std::optional<double> specificity;  // TN / (FP + TN)
  std::optional<double> precision;    // TP / (TP + FP)
  std::optional<double> accuracy;     // (TP + TN) / total
  std::optional<double> f1;           // 2TP / (2TP + FP + FN)
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // classify(score, threshold) reproduces this point
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), fpr/tpr non-decreasing
};

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions);

MetricsReport metrics(const ConfusionMatrix& cm);

// One step per distinct score (ties move as a block) plus +/-inf sentinels;
// consecutive duplicate points are collapsed. Requires both classes present.
RocCurve roc(std::span<const Label> labels, std::span<const double> scores);

// Trapezoidal area under the curve.
double auc(const RocCurve& curve);
double auc(std::span<const Label> labels, std::span<const double> scores);

// Full evaluation of a score vector at a decision threshold. ROC/AUC are
// omitted (nullopt/empty) when only one class is present.
struct EvalReport {
  int64_t n = 0;
  double threshold = 0.5;
  ConfusionMatrix cm;
  MetricsReport metric_values;
  RocCurve roc_curve;
  std::optional<double> auc_value;
};

EvalReport evaluate(std::span<const Label> labels, std::span<const double> scores,
                    double threshold);

// ---- report emission ----------------------------------------------------

std::string report_json(const EvalReport& report);   // machine-readable
std::string report_table(const EvalReport& report);  // human-readable
std::string roc_csv(const RocCurve& curve);
std::string roc_svg(const RocCurve& curve, std::optional<double> auc_value);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace frauddet
