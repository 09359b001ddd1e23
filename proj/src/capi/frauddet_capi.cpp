#include <frauddet/frauddet.h>

#include <cstring>
#include <string>

#include "claims.hpp"
#include "common.hpp"
#include "eval.hpp"
#include "gbm.hpp"
#include "markov.hpp"
#include "model_io.hpp"
#include "synthgen.hpp"

using namespace frauddet;

/* ---- handle definitions -------------------------------------------------- */

struct fd_dataset {
  Dataset value;
};
struct fd_markov_model {
  MarkovFraudModel value;
};
struct fd_gbm_model {
  GbmModel value;
};
struct fd_cv_report {
  CvReport value;
};
struct fd_eval_report {
  EvalReport value;
};

/* ---- error plumbing ------------------------------------------------------ */

namespace {

thread_local std::string tl_error;

void set_error(std::string message) { tl_error = std::move(message); }

fd_status status_of(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::InvalidArgument: return FD_ERR_INVALID_ARG;
    case Error::Kind::Validation: return FD_ERR_VALIDATION;
    case Error::Kind::Io: return FD_ERR_IO;
    case Error::Kind::Internal: return FD_ERR_INTERNAL;
  }
  return FD_ERR_INTERNAL;
}

// Runs fn() inside a catch-all boundary, translating exceptions to codes.
template <typename Fn>
fd_status guarded(Fn&& fn) {
  try {
    fn();
    return FD_OK;
  } catch (const Error& e) {
    set_error(e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return FD_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return FD_ERR_INTERNAL;
  }
}

fd_status null_arg(const char* name) {
  set_error(std::string("null pointer: ") + name);
  return FD_ERR_INVALID_ARG;
}

}  // namespace

#define FD_REQUIRE(ptr) \
  do {                  \
    if (!(ptr)) return null_arg(#ptr); \
  } while (0)

extern "C" {

const char* fd_last_error(void) { return tl_error.c_str(); }

void fd_version(int32_t* major, int32_t* minor) {
  if (major) *major = FD_VERSION_MAJOR;
  if (minor) *minor = FD_VERSION_MINOR;
}

/* ---- datasets ------------------------------------------------------------ */

void fd_gen_config_defaults(fd_gen_config* config) {
  if (!config) return;
  const GenConfig d;
  config->n_claims = d.n_claims;
  config->fraud_rate = d.fraud_rate;
  config->signal_strength = d.signal_strength;
  config->exact_counts = d.exact_counts ? 1 : 0;
  config->seed = d.seed;
  config->n_diagnosis_codes = d.n_diagnosis_codes;
  config->n_providers = d.n_providers;
  config->n_districts = d.n_districts;
}

fd_status fd_dataset_generate(const fd_gen_config* config, fd_dataset** out) {
  FD_REQUIRE(config);
  FD_REQUIRE(out);
  return guarded([&] {
    GenConfig cfg;
    cfg.n_claims = config->n_claims;
    cfg.fraud_rate = config->fraud_rate;
    cfg.signal_strength = config->signal_strength;
    cfg.exact_counts = config->exact_counts != 0;
    cfg.seed = config->seed;
    cfg.n_diagnosis_codes = config->n_diagnosis_codes;
    cfg.n_providers = config->n_providers;
    cfg.n_districts = config->n_districts;
    *out = new fd_dataset{generate(cfg)};
  });
}

fd_status fd_dataset_read(const char* path, fd_dataset** out) {
  FD_REQUIRE(path);
  FD_REQUIRE(out);
  return guarded([&] { *out = new fd_dataset{read_dataset(path)}; });
}

fd_status fd_dataset_write(const fd_dataset* dataset, const char* path) {
  FD_REQUIRE(dataset);
  FD_REQUIRE(path);
  return guarded([&] { write_dataset(dataset->value, path); });
}

fd_status fd_dataset_split(const fd_dataset* dataset, double ratio, uint64_t seed,
                           fd_dataset** out_train, fd_dataset** out_test) {
  FD_REQUIRE(dataset);
  FD_REQUIRE(out_train);
  FD_REQUIRE(out_test);
  return guarded([&] {
    SplitResult split = split_train_test(dataset->value, ratio, seed);
    *out_train = new fd_dataset{std::move(split.train)};
    *out_test = new fd_dataset{std::move(split.test)};
  });
}

int64_t fd_dataset_size(const fd_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->value.size()) : 0;
}

int64_t fd_dataset_fraud_count(const fd_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->value.fraud_count()) : 0;
}

fd_status fd_dataset_labels(const fd_dataset* dataset, int32_t* labels) {
  FD_REQUIRE(dataset);
  FD_REQUIRE(labels);
  for (size_t i = 0; i < dataset->value.size(); ++i)
    labels[i] = dataset->value.records[i].label == Label::Fraud ? 1 : 0;
  return FD_OK;
}

void fd_dataset_free(fd_dataset* dataset) { delete dataset; }

/* ---- markov model ---------------------------------------------------------- */

void fd_markov_config_defaults(fd_markov_config* config) {
  if (!config) return;
  const MarkovConfig d;
  config->alpha = d.alpha;
  config->threshold = d.threshold;
  config->days_stayed_bins = d.days_stayed_bins;
  config->net_amount_bins = d.net_amount_bins;
}

fd_status fd_markov_train(const fd_dataset* train, const fd_markov_config* config,
                          fd_markov_model** out) {
  FD_REQUIRE(train);
  FD_REQUIRE(config);
  FD_REQUIRE(out);
  return guarded([&] {
    MarkovConfig cfg;
    cfg.alpha = config->alpha;
    cfg.threshold = config->threshold;
    cfg.days_stayed_bins = config->days_stayed_bins;
    cfg.net_amount_bins = config->net_amount_bins;
    *out = new fd_markov_model{train_markov(train->value, cfg)};
  });
}

fd_status fd_markov_save(const fd_markov_model* model, const char* path) {
  FD_REQUIRE(model);
  FD_REQUIRE(path);
  return guarded([&] { save_markov_model(model->value, path); });
}

fd_status fd_markov_load(const char* path, fd_markov_model** out) {
  FD_REQUIRE(path);
  FD_REQUIRE(out);
  return guarded([&] { *out = new fd_markov_model{load_markov_model(path)}; });
}

int64_t fd_markov_state_count(const fd_markov_model* model) {
  return model ? model->value.states.state_count() : 0;
}

double fd_markov_threshold(const fd_markov_model* model) {
  return model ? model->value.threshold : 0.0;
}

fd_status fd_markov_score(const fd_markov_model* model, const fd_dataset* data,
                          double* scores) {
  FD_REQUIRE(model);
  FD_REQUIRE(data);
  FD_REQUIRE(scores);
  return guarded([&] {
    const auto values = markov_scores(model->value, data->value);
    std::memcpy(scores, values.data(), values.size() * sizeof(double));
  });
}

void fd_markov_free(fd_markov_model* model) { delete model; }

/* ---- gradient boosted trees ---------------------------------------------- */

void fd_gbm_config_defaults(fd_gbm_config* config) {
  if (!config) return;
  const GbmConfig d;
  config->n_trees = d.n_trees;
  config->max_depth = d.max_depth;
  config->learning_rate = d.learning_rate;
  config->cv_folds = d.cv_folds;
  config->min_leaf_count = d.min_leaf_count;
  config->seed = d.seed;
  config->one_hot = d.one_hot ? 1 : 0;
  config->use_best_iteration = d.use_best_iteration ? 1 : 0;
  config->threshold = d.threshold;
}

fd_status fd_gbm_train(const fd_dataset* train, const fd_gbm_config* config,
                       fd_gbm_model** out_model, fd_cv_report** out_cv) {
  FD_REQUIRE(train);
  FD_REQUIRE(config);
  FD_REQUIRE(out_model);
  return guarded([&] {
    GbmConfig cfg;
    cfg.n_trees = config->n_trees;
    cfg.max_depth = config->max_depth;
    cfg.learning_rate = config->learning_rate;
    cfg.cv_folds = config->cv_folds;
    cfg.min_leaf_count = config->min_leaf_count;
    cfg.seed = config->seed;
    cfg.one_hot = config->one_hot != 0;
    cfg.use_best_iteration = config->use_best_iteration != 0;
    cfg.threshold = config->threshold;
    GbmTrainResult result = train_gbm(train->value, cfg);
    *out_model = new fd_gbm_model{std::move(result.model)};
    if (out_cv)
      *out_cv = result.cv ? new fd_cv_report{std::move(*result.cv)} : nullptr;
  });
}

fd_status fd_gbm_save(const fd_gbm_model* model, const char* path) {
  FD_REQUIRE(model);
  FD_REQUIRE(path);
  return guarded([&] { save_gbm_model(model->value, path); });
}

fd_status fd_gbm_load(const char* path, fd_gbm_model** out) {
  FD_REQUIRE(path);
  FD_REQUIRE(out);
  return guarded([&] { *out = new fd_gbm_model{load_gbm_model(path)}; });
}

int32_t fd_gbm_tree_count(const fd_gbm_model* model) {
  return model ? static_cast<int32_t>(model->value.trees.size()) : 0;
}

int32_t fd_gbm_best_iteration(const fd_gbm_model* model) {
  return model ? model->value.best_iteration : 0;
}

double fd_gbm_threshold(const fd_gbm_model* model) {
  return model ? model->value.threshold : 0.0;
}

int32_t fd_gbm_train_deviance(const fd_gbm_model* model, double* out,
                              int32_t capacity) {
  if (!model) return 0;
  const auto& curve = model->value.train_deviance;
  if (out && capacity > 0) {
    const auto n = std::min<size_t>(curve.size(), static_cast<size_t>(capacity));
    std::memcpy(out, curve.data(), n * sizeof(double));
  }
  return static_cast<int32_t>(curve.size());
}

fd_status fd_gbm_score(const fd_gbm_model* model, const fd_dataset* data,
                       double* scores) {
  FD_REQUIRE(model);
  FD_REQUIRE(data);
  FD_REQUIRE(scores);
  return guarded([&] {
    const auto values = gbm_scores(model->value, data->value);
    std::memcpy(scores, values.data(), values.size() * sizeof(double));
  });
}

void fd_gbm_free(fd_gbm_model* model) { delete model; }

int32_t fd_cv_best_iteration(const fd_cv_report* report) {
  return report ? report->value.best_iteration : 0;
}

int32_t fd_cv_length(const fd_cv_report* report) {
  return report ? static_cast<int32_t>(report->value.mean_deviance.size()) : 0;
}

fd_status fd_cv_deviances(const fd_cv_report* report, double* out, int32_t capacity) {
  FD_REQUIRE(report);
  FD_REQUIRE(out);
  const auto& curve = report->value.mean_deviance;
  const auto n = std::min<size_t>(curve.size(), static_cast<size_t>(capacity));
  std::memcpy(out, curve.data(), n * sizeof(double));
  return FD_OK;
}

fd_status fd_cv_write_csv(const fd_cv_report* report, const char* path) {
  FD_REQUIRE(report);
  FD_REQUIRE(path);
  return guarded([&] {
    std::string csv = "iteration,mean_cv_deviance\n";
    for (size_t i = 0; i < report->value.mean_deviance.size(); ++i) {
      csv += std::to_string(i + 1);
      csv += ',';
      csv += format_double(report->value.mean_deviance[i]);
      csv += '\n';
    }
    csv += "# best_iteration=" + std::to_string(report->value.best_iteration) + "\n";
    write_text_file(path, csv);
  });
}

void fd_cv_free(fd_cv_report* report) { delete report; }

fd_status fd_model_probe(const char* path, int32_t* kind) {
  FD_REQUIRE(path);
  FD_REQUIRE(kind);
  return guarded([&] {
    *kind = probe_model_kind(path) == ModelKind::Markov ? 0 : 1;
  });
}

/* ---- evaluation ------------------------------------------------------------ */

fd_status fd_evaluate(const int32_t* labels, const double* scores, int64_t n,
                      double threshold, fd_eval_report** out) {
  FD_REQUIRE(labels);
  FD_REQUIRE(scores);
  FD_REQUIRE(out);
  if (n <= 0) {
    set_error("fd_evaluate: n must be positive");
    return FD_ERR_INVALID_ARG;
  }
  return guarded([&] {
    std::vector<Label> lab(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
      lab[static_cast<size_t>(i)] = labels[i] != 0 ? Label::Fraud : Label::NotFraud;
    std::span<const double> sc(scores, static_cast<size_t>(n));
    *out = new fd_eval_report{evaluate(lab, sc, threshold)};
  });
}

fd_status fd_report_confusion(const fd_eval_report* report, int64_t* tp, int64_t* fp,
                              int64_t* fn, int64_t* tn) {
  FD_REQUIRE(report);
  if (tp) *tp = report->value.cm.tp;
  if (fp) *fp = report->value.cm.fp;
  if (fn) *fn = report->value.cm.fn;
  if (tn) *tn = report->value.cm.tn;
  return FD_OK;
}

fd_status fd_report_metric(const fd_eval_report* report, fd_metric metric,
                           double* value, int32_t* defined) {
  FD_REQUIRE(report);
  FD_REQUIRE(defined);
  const auto& m = report->value.metric_values;
  std::optional<double> v;
  switch (metric) {
    case FD_METRIC_SENSITIVITY: v = m.sensitivity; break;
    case FD_METRIC_SPECIFICITY: v = m.specificity; break;
    case FD_METRIC_PRECISION: v = m.precision; break;
    case FD_METRIC_ACCURACY: v = m.accuracy; break;
    case FD_METRIC_F1: v = m.f1; break;
    default:
      set_error("fd_report_metric: unknown metric id");
      return FD_ERR_INVALID_ARG;
  }
  *defined = v.has_value() ? 1 : 0;
  if (v && value) *value = *v;
  return FD_OK;
}

fd_status fd_report_auc(const fd_eval_report* report, double* value,
                        int32_t* defined) {
  FD_REQUIRE(report);
  FD_REQUIRE(defined);
  *defined = report->value.auc_value.has_value() ? 1 : 0;
  if (report->value.auc_value && value) *value = *report->value.auc_value;
  return FD_OK;
}

int64_t fd_report_roc_size(const fd_eval_report* report) {
  return report ? static_cast<int64_t>(report->value.roc_curve.points.size()) : 0;
}

fd_status fd_report_roc_point(const fd_eval_report* report, int64_t index,
                              double* fpr, double* tpr, double* threshold) {
  FD_REQUIRE(report);
  const auto& points = report->value.roc_curve.points;
  if (index < 0 || static_cast<size_t>(index) >= points.size()) {
    set_error("fd_report_roc_point: index out of range");
    return FD_ERR_INVALID_ARG;
  }
  const auto& p = points[static_cast<size_t>(index)];
  if (fpr) *fpr = p.fpr;
  if (tpr) *tpr = p.tpr;
  if (threshold) *threshold = p.threshold;
  return FD_OK;
}

fd_status fd_report_write_json(const fd_eval_report* report, const char* path) {
  FD_REQUIRE(report);
  FD_REQUIRE(path);
  return guarded([&] { write_text_file(path, report_json(report->value)); });
}

fd_status fd_report_write_text(const fd_eval_report* report, const char* path) {
  FD_REQUIRE(report);
  FD_REQUIRE(path);
  return guarded([&] { write_text_file(path, report_table(report->value)); });
}

fd_status fd_report_write_roc_csv(const fd_eval_report* report, const char* path) {
  FD_REQUIRE(report);
  FD_REQUIRE(path);
  return guarded([&] { write_text_file(path, roc_csv(report->value.roc_curve)); });
}

fd_status fd_report_write_roc_svg(const fd_eval_report* report, const char* path) {
  FD_REQUIRE(report);
  FD_REQUIRE(path);
  return guarded([&] {
    write_text_file(path,
                    roc_svg(report->value.roc_curve, report->value.auc_value));
  });
}

void fd_report_free(fd_eval_report* report) { delete report; }

} /* extern "C" */
