/*
 * frauddet - health-insurance claim fraud detection library.
 *
 * C interface over the C++ core: opaque handles, integer status codes, and a
 * thread-local error message retrievable via fd_last_error(). Every function
 * returning fd_status yields FD_OK on success; on failure the out-parameters
 * are left untouched.
 */
#ifndef FRAUDDET_H
#define FRAUDDET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FD_VERSION_MAJOR 1
#define FD_VERSION_MINOR 0

typedef enum fd_status {
  FD_OK = 0,
  FD_ERR_INVALID_ARG = 1, /* caller misuse: bad parameter, null pointer */
  FD_ERR_VALIDATION = 2,  /* data content violates an invariant */
  FD_ERR_IO = 3,          /* file system failure */
  FD_ERR_INTERNAL = 4
} fd_status;

/* Thread-local message describing the most recent failure in this thread. */
const char* fd_last_error(void);
void fd_version(int32_t* major, int32_t* minor);

/* ---- datasets ---------------------------------------------------------- */

typedef struct fd_dataset fd_dataset;

typedef struct fd_gen_config {
  int64_t n_claims;
  double fraud_rate;
  double signal_strength;
  int32_t exact_counts; /* nonzero: exactly round(n*rate) fraud labels */
  uint64_t seed;
  int32_t n_diagnosis_codes;
  int32_t n_providers;
  int32_t n_districts;
} fd_gen_config;

void fd_gen_config_defaults(fd_gen_config* config);

fd_status fd_dataset_generate(const fd_gen_config* config, fd_dataset** out);
fd_status fd_dataset_read(const char* path, fd_dataset** out);
fd_status fd_dataset_write(const fd_dataset* dataset, const char* path);
fd_status fd_dataset_split(const fd_dataset* dataset, double ratio, uint64_t seed,
                           fd_dataset** out_train, fd_dataset** out_test);
int64_t fd_dataset_size(const fd_dataset* dataset);
int64_t fd_dataset_fraud_count(const fd_dataset* dataset);
/* labels[i] = 1 for fraud, 0 otherwise; `labels` must hold fd_dataset_size
 * entries. */
fd_status fd_dataset_labels(const fd_dataset* dataset, int32_t* labels);
void fd_dataset_free(fd_dataset* dataset);

/* ---- markov model ------------------------------------------------------ */

typedef struct fd_markov_model fd_markov_model;

typedef struct fd_markov_config {
  double alpha;     /* additive smoothing, >= 0 */
  double threshold; /* decision cutoff in [0,1] */
  int32_t days_stayed_bins;
  int32_t net_amount_bins;
} fd_markov_config;

void fd_markov_config_defaults(fd_markov_config* config);

fd_status fd_markov_train(const fd_dataset* train, const fd_markov_config* config,
                          fd_markov_model** out);
fd_status fd_markov_save(const fd_markov_model* model, const char* path);
fd_status fd_markov_load(const char* path, fd_markov_model** out);
int64_t fd_markov_state_count(const fd_markov_model* model);
double fd_markov_threshold(const fd_markov_model* model);
/* P(Fraud|state) per claim; `scores` must hold fd_dataset_size entries. */
fd_status fd_markov_score(const fd_markov_model* model, const fd_dataset* data,
                          double* scores);
void fd_markov_free(fd_markov_model* model);

/* ---- gradient boosted trees -------------------------------------------- */

typedef struct fd_gbm_model fd_gbm_model;
typedef struct fd_cv_report fd_cv_report;

typedef struct fd_gbm_config {
  int32_t n_trees;
  int32_t max_depth;
  double learning_rate;
  int32_t cv_folds; /* < 2 disables cross-validation */
  int32_t min_leaf_count;
  uint64_t seed;
  int32_t one_hot;            /* nonzero: one-hot categorical encoding */
  int32_t use_best_iteration; /* nonzero: predict with the CV-selected trees */
  double threshold;
} fd_gbm_config;

void fd_gbm_config_defaults(fd_gbm_config* config);

/* out_cv may be NULL; it is populated only when cv_folds >= 2. */
fd_status fd_gbm_train(const fd_dataset* train, const fd_gbm_config* config,
                       fd_gbm_model** out_model, fd_cv_report** out_cv);
fd_status fd_gbm_save(const fd_gbm_model* model, const char* path);
fd_status fd_gbm_load(const char* path, fd_gbm_model** out);
int32_t fd_gbm_tree_count(const fd_gbm_model* model);
int32_t fd_gbm_best_iteration(const fd_gbm_model* model);
double fd_gbm_threshold(const fd_gbm_model* model);
/* Per-iteration training deviance of a freshly trained model. Returns the
 * curve length; copies min(capacity, length) values when out != NULL. Loaded
 * models report 0 (the curve is not persisted). */
int32_t fd_gbm_train_deviance(const fd_gbm_model* model, double* out,
                              int32_t capacity);
fd_status fd_gbm_score(const fd_gbm_model* model, const fd_dataset* data,
                       double* scores);
void fd_gbm_free(fd_gbm_model* model);

int32_t fd_cv_best_iteration(const fd_cv_report* report);
int32_t fd_cv_length(const fd_cv_report* report);
fd_status fd_cv_deviances(const fd_cv_report* report, double* out, int32_t capacity);
fd_status fd_cv_write_csv(const fd_cv_report* report, const char* path);
void fd_cv_free(fd_cv_report* report);

/* Kind of the model stored at `path`: 0 = markov, 1 = gbm. */
fd_status fd_model_probe(const char* path, int32_t* kind);

/* ---- evaluation --------------------------------------------------------- */

typedef struct fd_eval_report fd_eval_report;

typedef enum fd_metric {
  FD_METRIC_SENSITIVITY = 0,
  FD_METRIC_SPECIFICITY = 1,
  FD_METRIC_PRECISION = 2,
  FD_METRIC_ACCURACY = 3,
  FD_METRIC_F1 = 4
} fd_metric;

/* labels[i]: 1 fraud / 0 not; a claim is classified fraud iff its score is
 * strictly above `threshold`. */
fd_status fd_evaluate(const int32_t* labels, const double* scores, int64_t n,
                      double threshold, fd_eval_report** out);
fd_status fd_report_confusion(const fd_eval_report* report, int64_t* tp, int64_t* fp,
                              int64_t* fn, int64_t* tn);
/* `defined` is 0 when the metric's denominator is empty (value untouched). */
fd_status fd_report_metric(const fd_eval_report* report, fd_metric metric,
                           double* value, int32_t* defined);
fd_status fd_report_auc(const fd_eval_report* report, double* value,
                        int32_t* defined);
int64_t fd_report_roc_size(const fd_eval_report* report);
fd_status fd_report_roc_point(const fd_eval_report* report, int64_t index,
                              double* fpr, double* tpr, double* threshold);
fd_status fd_report_write_json(const fd_eval_report* report, const char* path);
fd_status fd_report_write_text(const fd_eval_report* report, const char* path);
fd_status fd_report_write_roc_csv(const fd_eval_report* report, const char* path);
fd_status fd_report_write_roc_svg(const fd_eval_report* report, const char* path);
void fd_report_free(fd_eval_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FRAUDDET_H */
