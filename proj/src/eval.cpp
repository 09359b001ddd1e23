#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "common.hpp"
#include "markov.hpp"  // classify

namespace frauddet {

ConfusionMatrix confusion(std::span<const Label> labels,
                          std::span<const Label> predictions) {
  if (labels.empty()) throw_invalid("confusion: empty input");
  if (labels.size() != predictions.size())
    throw_invalid("confusion: " + std::to_string(labels.size()) + " labels vs " +
                  std::to_string(predictions.size()) + " predictions");
  ConfusionMatrix cm;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == Label::Fraud;
    const bool pred = predictions[i] == Label::Fraud;
    if (truth && pred) ++cm.tp;
    else if (!truth && pred) ++cm.fp;
    else if (truth && !pred) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

std::optional<double> ratio(int64_t num, int64_t denom) {
  if (denom <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport m;
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.fp + cm.tn);
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return m;
}

RocCurve roc(std::span<const Label> labels, std::span<const double> scores) {
  if (labels.size() != scores.size())
    throw_invalid("roc: labels and scores differ in length");
  if (labels.empty()) throw_invalid("roc: empty input");

  int64_t n_pos = 0, n_neg = 0;
  for (const Label l : labels) (l == Label::Fraud ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw_validation("roc: both classes must be present");
  for (const double s : scores)
    if (std::isnan(s)) throw_validation("roc: scores must not be NaN");

  std::vector<std::pair<double, Label>> ranked(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) ranked[i] = {scores[i], labels[i]};
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  const double inf = std::numeric_limits<double>::infinity();
  auto push = [&](int64_t tp, int64_t fp, double threshold) {
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    if (!curve.points.empty() && curve.points.back().fpr == fpr &&
        curve.points.back().tpr == tpr)
      return;
    curve.points.push_back({fpr, tpr, threshold});
  };

  // point at threshold t = counts of score > t (strict, matching classify)
  int64_t tp = 0, fp = 0;
  push(0, 0, inf);
  size_t i = 0;
  while (i < ranked.size()) {
    const double s = ranked[i].first;
    push(tp, fp, s);
    while (i < ranked.size() && ranked[i].first == s) {
      (ranked[i].second == Label::Fraud ? tp : fp)++;
      ++i;
    }
  }
  push(tp, fp, -inf);
  return curve;
}

double auc(const RocCurve& curve) {
  if (curve.points.size() < 2) throw_invalid("auc: curve has fewer than 2 points");
  double area = 0.0;
  for (size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

double auc(std::span<const Label> labels, std::span<const double> scores) {
  return auc(roc(labels, scores));
}

EvalReport evaluate(std::span<const Label> labels, std::span<const double> scores,
                    double threshold) {
  if (labels.size() != scores.size())
    throw_invalid("evaluate: labels and scores differ in length");
  if (labels.empty()) throw_invalid("evaluate: empty input");

  EvalReport report;
  report.n = static_cast<int64_t>(labels.size());
  report.threshold = threshold;

  std::vector<Label> predictions(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    predictions[i] = classify(scores[i], threshold);
  report.cm = confusion(labels, predictions);
  report.metric_values = metrics(report.cm);

  const bool both_classes =
      (report.cm.tp + report.cm.fn) > 0 && (report.cm.fp + report.cm.tn) > 0;
  if (both_classes) {
    report.roc_curve = roc(labels, scores);
    report.auc_value = auc(report.roc_curve);
  }
  return report;
}

namespace {

constexpr const char* kMetricNames[] = {"sensitivity", "specificity", "precision",
                                        "accuracy", "f1"};

std::optional<double> metric_by_index(const MetricsReport& m, size_t i) {
  switch (i) {
    case 0: return m.sensitivity;
    case 1: return m.specificity;
    case 2: return m.precision;
    case 3: return m.accuracy;
    default: return m.f1;
  }
}

std::string raw15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "frauddet.eval";
  j["format_version"] = 1;
  j["n"] = report.n;
  j["threshold"] = report.threshold;
  j["confusion"] = {{"tp", report.cm.tp},
                    {"fp", report.cm.fp},
                    {"fn", report.cm.fn},
                    {"tn", report.cm.tn}};
  nlohmann::ordered_json jm;
  for (size_t i = 0; i < 5; ++i) {
    const auto v = metric_by_index(report.metric_values, i);
    nlohmann::ordered_json entry;
    entry["defined"] = v.has_value();
    if (v) {
      entry["raw"] = *v;
      entry["rounded_4dp"] = format_fixed(*v, 4);
    }
    jm[kMetricNames[i]] = entry;
  }
  j["metrics"] = jm;
  if (report.auc_value) {
    j["auc"] = {{"defined", true},
                {"raw", *report.auc_value},
                {"rounded_4dp", format_fixed(*report.auc_value, 4)}};
  } else {
    j["auc"] = {{"defined", false}};
  }
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  os << "n = " << report.n << ", threshold = " << format_double(report.threshold)
     << "\n\n";
  os << "                 Reference\n";
  os << "Prediction       Fraud      Not-Fraud\n";
  os << "Fraud         " << std::setw(8) << report.cm.tp << "   " << std::setw(10)
     << report.cm.fp << "\n";
  os << "Not-Fraud     " << std::setw(8) << report.cm.fn << "   " << std::setw(10)
     << report.cm.tn << "\n\n";
  os << "Measure        Value     Raw\n";
  for (size_t i = 0; i < 5; ++i) {
    const auto v = metric_by_index(report.metric_values, i);
    os << std::left << std::setw(14) << kMetricNames[i] << std::right;
    if (v)
      os << format_fixed(*v, 4) << "    " << raw15(*v) << "\n";
    else
      os << "undefined\n";
  }
  os << std::left << std::setw(14) << "auc" << std::right;
  if (report.auc_value)
    os << format_fixed(*report.auc_value, 4) << "    " << raw15(*report.auc_value)
       << "\n";
  else
    os << "undefined\n";
  return os.str();
}

std::string roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : curve.points) {
    out += format_double(p.fpr);
    out += ',';
    out += format_double(p.tpr);
    out += ',';
    out += format_double(p.threshold);
    out += '\n';
  }
  return out;
}

std::string roc_svg(const RocCurve& curve, std::optional<double> auc_value) {
  // 480x480 canvas, 60px margins, y axis flipped
  const double origin = 60.0, span = 360.0;
  auto x = [&](double fpr) { return origin + fpr * span; };
  auto y = [&](double tpr) { return origin + span - tpr * span; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
        "viewBox=\"0 0 480 480\">\n";
  os << "  <rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
  // grid and tick labels at 0.2 steps
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    os << "  <line x1=\"" << format_fixed(x(v), 1) << "\" y1=\"" << format_fixed(y(0), 1)
       << "\" x2=\"" << format_fixed(x(v), 1) << "\" y2=\"" << format_fixed(y(1), 1)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "  <line x1=\"" << format_fixed(x(0), 1) << "\" y1=\"" << format_fixed(y(v), 1)
       << "\" x2=\"" << format_fixed(x(1), 1) << "\" y2=\"" << format_fixed(y(v), 1)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "  <text x=\"" << format_fixed(x(v), 1) << "\" y=\"" << format_fixed(y(0) + 20, 1)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << format_fixed(v, 1)
       << "</text>\n";
    os << "  <text x=\"" << format_fixed(x(0) - 10, 1) << "\" y=\""
       << format_fixed(y(v) + 4, 1) << "\" font-size=\"12\" text-anchor=\"end\">"
       << format_fixed(v, 1) << "</text>\n";
  }
  // axes
  os << "  <line x1=\"" << format_fixed(x(0), 1) << "\" y1=\"" << format_fixed(y(0), 1)
     << "\" x2=\"" << format_fixed(x(1), 1) << "\" y2=\"" << format_fixed(y(0), 1)
     << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << format_fixed(x(0), 1) << "\" y1=\"" << format_fixed(y(0), 1)
     << "\" x2=\"" << format_fixed(x(0), 1) << "\" y2=\"" << format_fixed(y(1), 1)
     << "\" stroke=\"black\"/>\n";
  // chance diagonal
  os << "  <line x1=\"" << format_fixed(x(0), 1) << "\" y1=\"" << format_fixed(y(0), 1)
     << "\" x2=\"" << format_fixed(x(1), 1) << "\" y2=\"" << format_fixed(y(1), 1)
     << "\" stroke=\"#999999\" stroke-dasharray=\"6,4\"/>\n";
  // the curve
  os << "  <polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
  for (size_t i = 0; i < curve.points.size(); ++i) {
    if (i) os << ' ';
    os << format_fixed(x(curve.points[i].fpr), 2) << ','
       << format_fixed(y(curve.points[i].tpr), 2);
  }
  os << "\"/>\n";
  // axis titles + legend
  os << "  <text x=\"240\" y=\"470\" font-size=\"14\" text-anchor=\"middle\">"
        "False positive rate (1 - Specificity)</text>\n";
  os << "  <text x=\"16\" y=\"240\" font-size=\"14\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 16 240)\">True positive rate (Sensitivity)</text>\n";
  os << "  <text x=\"" << format_fixed(x(0.58), 1) << "\" y=\"" << format_fixed(y(0.08), 1)
     << "\" font-size=\"14\">AUC = "
     << (auc_value ? format_fixed(*auc_value, 4) : std::string("undefined"))
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw_io("write failed: " + path);
}

}  // namespace frauddet
