// fraudctl - command line front end for the frauddet library.
//
// Subcommands: generate, split, train, evaluate, compare, run-paper. Every
// tunable lives in one declarative config document (--config FILE, JSON);
// command line flags override config values, and each run writes the fully
// resolved config beside its outputs so it can be replayed exactly.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal.

#include <frauddet/frauddet.h>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

[[noreturn]] void die(int code, const std::string& message) {
  std::fprintf(stderr, "fraudctl: error: %s\n", message.c_str());
  std::exit(code);
}

int exit_code_of(fd_status status) {
  switch (status) {
    case FD_OK: return 0;
    case FD_ERR_INVALID_ARG: return kExitUsage;
    case FD_ERR_VALIDATION: return kExitData;
    case FD_ERR_IO: return kExitData;
    default: return kExitInternal;
  }
}

void check(fd_status status) {
  if (status != FD_OK) die(exit_code_of(status), fd_last_error());
}

// ---- run configuration ----------------------------------------------------

struct RunConfig {
  fd_gen_config generate{};
  double split_ratio = 0.7;
  uint64_t split_seed = 1;
  fd_markov_config markov{};
  fd_gbm_config gbm{};

  RunConfig() {
    fd_gen_config_defaults(&generate);
    fd_markov_config_defaults(&markov);
    fd_gbm_config_defaults(&gbm);
  }
};

json to_json(const RunConfig& cfg) {
  json j;
  j["generate"] = {{"n_claims", cfg.generate.n_claims},
                   {"fraud_rate", cfg.generate.fraud_rate},
                   {"signal_strength", cfg.generate.signal_strength},
                   {"exact_counts", cfg.generate.exact_counts != 0},
                   {"seed", cfg.generate.seed},
                   {"n_diagnosis_codes", cfg.generate.n_diagnosis_codes},
                   {"n_providers", cfg.generate.n_providers},
                   {"n_districts", cfg.generate.n_districts}};
  j["split"] = {{"ratio", cfg.split_ratio}, {"seed", cfg.split_seed}};
  j["markov"] = {{"alpha", cfg.markov.alpha},
                 {"threshold", cfg.markov.threshold},
                 {"days_stayed_bins", cfg.markov.days_stayed_bins},
                 {"net_amount_bins", cfg.markov.net_amount_bins}};
  j["gbm"] = {{"n_trees", cfg.gbm.n_trees},
              {"max_depth", cfg.gbm.max_depth},
              {"learning_rate", cfg.gbm.learning_rate},
              {"cv_folds", cfg.gbm.cv_folds},
              {"min_leaf_count", cfg.gbm.min_leaf_count},
              {"seed", cfg.gbm.seed},
              {"one_hot", cfg.gbm.one_hot != 0},
              {"use_best_iteration", cfg.gbm.use_best_iteration != 0},
              {"threshold", cfg.gbm.threshold}};
  return j;
}

void reject_unknown_keys(const json& j, const char* section,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      die(kExitUsage, std::string("config: unknown key \"") + key + "\" in " + section);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_flag(const json& j, const char* key, int32_t& out) {
  if (j.contains(key)) out = j.at(key).get<bool>() ? 1 : 0;
}

RunConfig config_from_json(const json& j);

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) die(kExitData, "cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) die(kExitData, "config file is not valid JSON: " + path);
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    die(kExitUsage, std::string("config: ") + e.what());
  }
}

RunConfig config_from_json(const json& j) {
  reject_unknown_keys(j, "top level", {"generate", "split", "markov", "gbm"});
  RunConfig cfg;
  if (j.contains("generate")) {
    const auto& g = j["generate"];
    reject_unknown_keys(g, "generate",
                        {"n_claims", "fraud_rate", "signal_strength", "exact_counts",
                         "seed", "n_diagnosis_codes", "n_providers", "n_districts"});
    maybe(g, "n_claims", cfg.generate.n_claims);
    maybe(g, "fraud_rate", cfg.generate.fraud_rate);
    maybe(g, "signal_strength", cfg.generate.signal_strength);
    maybe_flag(g, "exact_counts", cfg.generate.exact_counts);
    maybe(g, "seed", cfg.generate.seed);
    maybe(g, "n_diagnosis_codes", cfg.generate.n_diagnosis_codes);
    maybe(g, "n_providers", cfg.generate.n_providers);
    maybe(g, "n_districts", cfg.generate.n_districts);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    reject_unknown_keys(s, "split", {"ratio", "seed"});
    maybe(s, "ratio", cfg.split_ratio);
    maybe(s, "seed", cfg.split_seed);
  }
  if (j.contains("markov")) {
    const auto& m = j["markov"];
    reject_unknown_keys(m, "markov",
                        {"alpha", "threshold", "days_stayed_bins", "net_amount_bins"});
    maybe(m, "alpha", cfg.markov.alpha);
    maybe(m, "threshold", cfg.markov.threshold);
    maybe(m, "days_stayed_bins", cfg.markov.days_stayed_bins);
    maybe(m, "net_amount_bins", cfg.markov.net_amount_bins);
  }
  if (j.contains("gbm")) {
    const auto& g = j["gbm"];
    reject_unknown_keys(g, "gbm",
                        {"n_trees", "max_depth", "learning_rate", "cv_folds",
                         "min_leaf_count", "seed", "one_hot", "use_best_iteration",
                         "threshold"});
    maybe(g, "n_trees", cfg.gbm.n_trees);
    maybe(g, "max_depth", cfg.gbm.max_depth);
    maybe(g, "learning_rate", cfg.gbm.learning_rate);
    maybe(g, "cv_folds", cfg.gbm.cv_folds);
    maybe(g, "min_leaf_count", cfg.gbm.min_leaf_count);
    maybe(g, "seed", cfg.gbm.seed);
    maybe_flag(g, "one_hot", cfg.gbm.one_hot);
    maybe_flag(g, "use_best_iteration", cfg.gbm.use_best_iteration);
    maybe(g, "threshold", cfg.gbm.threshold);
  }
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die(kExitData, "cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) die(kExitData, "write failed: " + path);
}

void emit_resolved_config(const RunConfig& cfg, const std::string& path) {
  write_file(path, to_json(cfg).dump(2) + "\n");
}

// ---- RAII wrappers over the C handles --------------------------------------

using DatasetPtr = std::unique_ptr<fd_dataset, decltype(&fd_dataset_free)>;
using MarkovPtr = std::unique_ptr<fd_markov_model, decltype(&fd_markov_free)>;
using GbmPtr = std::unique_ptr<fd_gbm_model, decltype(&fd_gbm_free)>;
using CvPtr = std::unique_ptr<fd_cv_report, decltype(&fd_cv_free)>;
using ReportPtr = std::unique_ptr<fd_eval_report, decltype(&fd_report_free)>;

DatasetPtr read_dataset(const std::string& path) {
  fd_dataset* ds = nullptr;
  check(fd_dataset_read(path.c_str(), &ds));
  return {ds, fd_dataset_free};
}

ReportPtr evaluate_scores(const fd_dataset* data, const std::vector<double>& scores,
                          double threshold) {
  const int64_t n = fd_dataset_size(data);
  std::vector<int32_t> labels(static_cast<size_t>(n));
  check(fd_dataset_labels(data, labels.data()));
  fd_eval_report* report = nullptr;
  check(fd_evaluate(labels.data(), scores.data(), n, threshold, &report));
  return {report, fd_report_free};
}

void write_report_files(const fd_eval_report* report, const std::string& prefix) {
  check(fd_report_write_json(report, (prefix + ".eval.json").c_str()));
  check(fd_report_write_text(report, (prefix + ".eval.txt").c_str()));
  check(fd_report_write_roc_csv(report, (prefix + ".roc.csv").c_str()));
  check(fd_report_write_roc_svg(report, (prefix + ".roc.svg").c_str()));
}

// ---- shared report formatting ----------------------------------------------

constexpr const char* kMetricNames[] = {"sensitivity", "specificity", "precision",
                                        "accuracy", "f1"};
constexpr fd_metric kMetricIds[] = {FD_METRIC_SENSITIVITY, FD_METRIC_SPECIFICITY,
                                    FD_METRIC_PRECISION, FD_METRIC_ACCURACY,
                                    FD_METRIC_F1};

struct MetricRow {
  std::string name;
  bool markov_defined = false, gbm_defined = false;
  double markov = 0.0, gbm = 0.0;
};

std::vector<MetricRow> collect_rows(const fd_eval_report* markov,
                                    const fd_eval_report* gbm) {
  std::vector<MetricRow> rows;
  for (int i = 0; i < 5; ++i) {
    MetricRow row;
    row.name = kMetricNames[i];
    int32_t defined = 0;
    double value = 0.0;
    check(fd_report_metric(markov, kMetricIds[i], &value, &defined));
    row.markov_defined = defined != 0;
    row.markov = value;
    check(fd_report_metric(gbm, kMetricIds[i], &value, &defined));
    row.gbm_defined = defined != 0;
    row.gbm = value;
    rows.push_back(row);
  }
  MetricRow auc_row;
  auc_row.name = "auc";
  int32_t defined = 0;
  double value = 0.0;
  check(fd_report_auc(markov, &value, &defined));
  auc_row.markov_defined = defined != 0;
  auc_row.markov = value;
  check(fd_report_auc(gbm, &value, &defined));
  auc_row.gbm_defined = defined != 0;
  auc_row.gbm = value;
  rows.push_back(auc_row);
  return rows;
}

std::string raw15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_compare_files(const fd_eval_report* markov_report,
                         const fd_eval_report* gbm_report,
                         const std::string& prefix) {
  const auto rows = collect_rows(markov_report, gbm_report);

  std::ostringstream table;
  table << "Measure        Markov     GBM        Delta (GBM - Markov)\n";
  for (const auto& row : rows) {
    char line[160];
    if (row.markov_defined && row.gbm_defined) {
      std::snprintf(line, sizeof(line), "%-14s %-10s %-10s %+.4f   (raw %s vs %s)\n",
                    row.name.c_str(), fixed4(row.markov).c_str(),
                    fixed4(row.gbm).c_str(), row.gbm - row.markov,
                    raw15(row.markov).c_str(), raw15(row.gbm).c_str());
    } else {
      std::snprintf(line, sizeof(line), "%-14s %-10s %-10s undefined\n",
                    row.name.c_str(),
                    row.markov_defined ? fixed4(row.markov).c_str() : "undef",
                    row.gbm_defined ? fixed4(row.gbm).c_str() : "undef");
    }
    table << line;
  }

  int64_t tp, fp, fn, tn;
  check(fd_report_confusion(markov_report, &tp, &fp, &fn, &tn));
  table << "\nMarkov confusion  [tp " << tp << ", fp " << fp << ", fn " << fn
        << ", tn " << tn << "]\n";
  json jm = {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};
  check(fd_report_confusion(gbm_report, &tp, &fp, &fn, &tn));
  table << "GBM confusion     [tp " << tp << ", fp " << fp << ", fn " << fn
        << ", tn " << tn << "]\n";
  json jg = {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};

  json j;
  j["format"] = "frauddet.compare";
  j["format_version"] = 1;
  j["confusion"] = {{"markov", jm}, {"gbm", jg}};
  json jrows = json::array();
  for (const auto& row : rows) {
    json jr;
    jr["measure"] = row.name;
    jr["markov"] = row.markov_defined
                       ? json({{"raw", row.markov}, {"rounded_4dp", fixed4(row.markov)}})
                       : json({{"defined", false}});
    jr["gbm"] = row.gbm_defined
                    ? json({{"raw", row.gbm}, {"rounded_4dp", fixed4(row.gbm)}})
                    : json({{"defined", false}});
    if (row.markov_defined && row.gbm_defined) jr["delta"] = row.gbm - row.markov;
    jrows.push_back(jr);
  }
  j["measures"] = jrows;

  write_file(prefix + ".compare.txt", table.str());
  write_file(prefix + ".compare.json", j.dump(2) + "\n");
}

void write_deviance_csv(const fd_gbm_model* model, const std::string& path) {
  const int32_t n = fd_gbm_train_deviance(model, nullptr, 0);
  std::vector<double> curve(static_cast<size_t>(n));
  fd_gbm_train_deviance(model, curve.data(), n);
  std::string csv = "iteration,train_deviance\n";
  for (int32_t i = 0; i < n; ++i) {
    csv += std::to_string(i + 1) + ",";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", curve[static_cast<size_t>(i)]);
    csv += buf;
    csv += '\n';
  }
  write_file(path, csv);
}

// ---- subcommand bodies -------------------------------------------------------

void cmd_generate(const RunConfig& cfg, const std::string& out) {
  fd_dataset* ds = nullptr;
  check(fd_dataset_generate(&cfg.generate, &ds));
  DatasetPtr holder(ds, fd_dataset_free);
  check(fd_dataset_write(ds, out.c_str()));
  emit_resolved_config(cfg, out + ".config.json");
  std::printf("wrote %s (%" PRId64 " claims, %" PRId64 " fraud)\n", out.c_str(),
              fd_dataset_size(ds), fd_dataset_fraud_count(ds));
}

void cmd_split(const RunConfig& cfg, const std::string& in,
               const std::string& train_out, const std::string& test_out) {
  DatasetPtr ds = read_dataset(in);
  fd_dataset *train = nullptr, *test = nullptr;
  check(fd_dataset_split(ds.get(), cfg.split_ratio, cfg.split_seed, &train, &test));
  DatasetPtr train_holder(train, fd_dataset_free), test_holder(test, fd_dataset_free);
  check(fd_dataset_write(train, train_out.c_str()));
  check(fd_dataset_write(test, test_out.c_str()));
  emit_resolved_config(cfg, train_out + ".config.json");
  std::printf("wrote %s (%" PRId64 ") and %s (%" PRId64 ")\n", train_out.c_str(),
              fd_dataset_size(train), test_out.c_str(), fd_dataset_size(test));
}

void cmd_train(const RunConfig& cfg, const std::string& kind,
               const std::string& train_path, const std::string& out,
               const std::string& cv_out, const std::string& deviance_out) {
  DatasetPtr train = read_dataset(train_path);
  if (kind == "markov") {
    fd_markov_model* model = nullptr;
    check(fd_markov_train(train.get(), &cfg.markov, &model));
    MarkovPtr holder(model, fd_markov_free);
    check(fd_markov_save(model, out.c_str()));
    emit_resolved_config(cfg, out + ".config.json");
    std::printf("wrote %s (%" PRId64 " states)\n", out.c_str(),
                fd_markov_state_count(model));
    return;
  }
  fd_gbm_model* model = nullptr;
  fd_cv_report* cv = nullptr;
  check(fd_gbm_train(train.get(), &cfg.gbm, &model, &cv));
  GbmPtr holder(model, fd_gbm_free);
  CvPtr cv_holder(cv, fd_cv_free);
  check(fd_gbm_save(model, out.c_str()));
  if (cv && !cv_out.empty()) check(fd_cv_write_csv(cv, cv_out.c_str()));
  if (!deviance_out.empty()) write_deviance_csv(model, deviance_out);
  emit_resolved_config(cfg, out + ".config.json");
  std::printf("wrote %s (%d trees, best iteration %d)\n", out.c_str(),
              fd_gbm_tree_count(model), fd_gbm_best_iteration(model));
}

std::vector<double> score_with_model_file(const std::string& model_file,
                                          const fd_dataset* data,
                                          double* default_threshold) {
  int32_t kind = 0;
  check(fd_model_probe(model_file.c_str(), &kind));
  std::vector<double> scores(static_cast<size_t>(fd_dataset_size(data)));
  if (kind == 0) {
    fd_markov_model* model = nullptr;
    check(fd_markov_load(model_file.c_str(), &model));
    MarkovPtr holder(model, fd_markov_free);
    check(fd_markov_score(model, data, scores.data()));
    if (default_threshold) *default_threshold = fd_markov_threshold(model);
  } else {
    fd_gbm_model* model = nullptr;
    check(fd_gbm_load(model_file.c_str(), &model));
    GbmPtr holder(model, fd_gbm_free);
    check(fd_gbm_score(model, data, scores.data()));
    if (default_threshold) *default_threshold = fd_gbm_threshold(model);
  }
  return scores;
}

void cmd_evaluate(const RunConfig& cfg, const std::string& model_file,
                  const std::string& data_path, const std::string& prefix,
                  bool threshold_set, double threshold) {
  DatasetPtr data = read_dataset(data_path);
  double model_threshold = 0.5;
  const auto scores = score_with_model_file(model_file, data.get(), &model_threshold);
  const double cutoff = threshold_set ? threshold : model_threshold;
  ReportPtr report = evaluate_scores(data.get(), scores, cutoff);
  write_report_files(report.get(), prefix);
  emit_resolved_config(cfg, prefix + ".config.json");
  std::printf("wrote %s.eval.{json,txt} and %s.roc.{csv,svg}\n", prefix.c_str(),
              prefix.c_str());
}

void cmd_compare(const RunConfig& cfg, const std::string& markov_file,
                 const std::string& gbm_file, const std::string& data_path,
                 const std::string& prefix) {
  DatasetPtr data = read_dataset(data_path);
  double markov_threshold = 0.5, gbm_threshold = 0.5;
  const auto markov_scores =
      score_with_model_file(markov_file, data.get(), &markov_threshold);
  const auto gbm_scores = score_with_model_file(gbm_file, data.get(), &gbm_threshold);
  ReportPtr markov_report = evaluate_scores(data.get(), markov_scores, markov_threshold);
  ReportPtr gbm_report = evaluate_scores(data.get(), gbm_scores, gbm_threshold);
  write_compare_files(markov_report.get(), gbm_report.get(), prefix);
  emit_resolved_config(cfg, prefix + ".config.json");
  std::printf("wrote %s.compare.{txt,json}\n", prefix.c_str());
}

// generate -> split -> train both -> evaluate both -> compare, one directory
void cmd_run_paper(const RunConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) die(kExitData, "cannot create output directory: " + out_dir);
  const auto at = [&](const std::string& name) { return out_dir + "/" + name; };

  fd_dataset* full = nullptr;
  check(fd_dataset_generate(&cfg.generate, &full));
  DatasetPtr full_holder(full, fd_dataset_free);
  check(fd_dataset_write(full, at("dataset.csv").c_str()));

  fd_dataset *train = nullptr, *test = nullptr;
  check(fd_dataset_split(full, cfg.split_ratio, cfg.split_seed, &train, &test));
  DatasetPtr train_holder(train, fd_dataset_free), test_holder(test, fd_dataset_free);
  check(fd_dataset_write(train, at("train.csv").c_str()));
  check(fd_dataset_write(test, at("test.csv").c_str()));

  fd_markov_model* markov = nullptr;
  check(fd_markov_train(train, &cfg.markov, &markov));
  MarkovPtr markov_holder(markov, fd_markov_free);
  check(fd_markov_save(markov, at("markov.model.json").c_str()));

  fd_gbm_model* gbm = nullptr;
  fd_cv_report* cv = nullptr;
  check(fd_gbm_train(train, &cfg.gbm, &gbm, &cv));
  GbmPtr gbm_holder(gbm, fd_gbm_free);
  CvPtr cv_holder(cv, fd_cv_free);
  check(fd_gbm_save(gbm, at("gbm.model.json").c_str()));
  if (cv) check(fd_cv_write_csv(cv, at("gbm.cv.csv").c_str()));
  write_deviance_csv(gbm, at("gbm.train_deviance.csv"));

  std::vector<double> markov_scores(static_cast<size_t>(fd_dataset_size(test)));
  check(fd_markov_score(markov, test, markov_scores.data()));
  ReportPtr markov_report =
      evaluate_scores(test, markov_scores, fd_markov_threshold(markov));
  write_report_files(markov_report.get(), at("markov"));

  std::vector<double> gbm_scores(static_cast<size_t>(fd_dataset_size(test)));
  check(fd_gbm_score(gbm, test, gbm_scores.data()));
  ReportPtr gbm_report = evaluate_scores(test, gbm_scores, fd_gbm_threshold(gbm));
  write_report_files(gbm_report.get(), at("gbm"));

  write_compare_files(markov_report.get(), gbm_report.get(), at("models"));
  emit_resolved_config(cfg, at("resolved.config.json"));
  std::printf("run complete; outputs in %s\n", out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frauddet pipeline driver: synthetic claims, markov and "
               "gradient-boosting fraud models, evaluation reports"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // descriptors shared by several subcommands
  std::string out, in_path, train_out, test_out, train_path, model_kind;
  std::string model_file, markov_file, gbm_file, data_path, prefix, out_dir;
  std::string cv_out, deviance_out;
  double threshold = 0.5;

  const auto add_config_flag = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config document; flags override");
  };
  const auto add_generate_flags = [&](CLI::App* cmd) {
    cmd->add_option("--n", cfg.generate.n_claims, "number of claims");
    cmd->add_option("--fraud-rate", cfg.generate.fraud_rate, "fraud fraction in (0,1)");
    cmd->add_option("--signal-strength", cfg.generate.signal_strength,
                    "planted signal scale (0 = labels independent of features)");
    cmd->add_flag_callback("--exact-counts", [&] { cfg.generate.exact_counts = 1; },
                           "force exactly round(n*rate) fraud labels");
    cmd->add_flag_callback("--no-exact-counts", [&] { cfg.generate.exact_counts = 0; },
                           "label by Bernoulli draw (default)");
    cmd->add_option("--seed", cfg.generate.seed, "generator seed");
    cmd->add_option("--diagnosis-codes", cfg.generate.n_diagnosis_codes,
                    "diagnosis vocabulary size");
    cmd->add_option("--providers", cfg.generate.n_providers, "provider vocabulary size");
    cmd->add_option("--districts", cfg.generate.n_districts, "district vocabulary size");
  };
  const auto add_split_flags = [&](CLI::App* cmd) {
    cmd->add_option("--ratio", cfg.split_ratio, "train fraction in (0,1)");
    cmd->add_option("--split-seed", cfg.split_seed, "split shuffle seed");
  };
  const auto add_markov_flags = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", cfg.markov.alpha, "additive smoothing");
    cmd->add_option("--markov-threshold", cfg.markov.threshold, "decision cutoff");
    cmd->add_option("--days-bins", cfg.markov.days_stayed_bins,
                    "quantile bins for days_stayed");
    cmd->add_option("--amount-bins", cfg.markov.net_amount_bins,
                    "quantile bins for net_amount");
  };
  const auto add_gbm_flags = [&](CLI::App* cmd) {
    cmd->add_option("--trees", cfg.gbm.n_trees, "boosting iterations");
    cmd->add_option("--depth", cfg.gbm.max_depth, "maximum tree depth");
    cmd->add_option("--learning-rate", cfg.gbm.learning_rate, "shrinkage");
    cmd->add_option("--cv-folds", cfg.gbm.cv_folds, "cross-validation folds (<2 = off)");
    cmd->add_option("--min-leaf", cfg.gbm.min_leaf_count, "minimum rows per leaf");
    cmd->add_option("--gbm-seed", cfg.gbm.seed, "fold shuffle seed");
    cmd->add_flag_callback("--one-hot", [&] { cfg.gbm.one_hot = 1; },
                           "one-hot categorical encoding");
    cmd->add_flag_callback("--ordinal", [&] { cfg.gbm.one_hot = 0; },
                           "ordinal categorical encoding (default)");
    cmd->add_flag_callback("--use-best-iteration",
                           [&] { cfg.gbm.use_best_iteration = 1; },
                           "predict with the CV-selected iteration (default)");
    cmd->add_flag_callback("--use-all-trees", [&] { cfg.gbm.use_best_iteration = 0; },
                           "predict with every fitted tree");
    cmd->add_option("--gbm-threshold", cfg.gbm.threshold, "decision cutoff");
  };

  auto* generate = app.add_subcommand("generate", "write a synthetic claims dataset");
  generate->add_option("--out", out, "output dataset file")->required();
  add_generate_flags(generate);
  add_config_flag(generate);

  auto* split = app.add_subcommand("split", "seeded train/test split of a dataset");
  split->add_option("--in", in_path, "input dataset file")->required();
  split->add_option("--train-out", train_out, "train output file")->required();
  split->add_option("--test-out", test_out, "test output file")->required();
  add_split_flags(split);
  add_config_flag(split);

  auto* train = app.add_subcommand("train", "fit a model on a dataset file");
  train->add_option("--model", model_kind, "markov or gbm")
      ->required()
      ->check(CLI::IsMember({"markov", "gbm"}));
  train->add_option("--train", train_path, "training dataset file")->required();
  train->add_option("--out", out, "model output file")->required();
  train->add_option("--cv-out", cv_out, "cross-validation curve output (gbm)");
  train->add_option("--deviance-out", deviance_out,
                    "training deviance curve output (gbm)");
  add_markov_flags(train);
  add_gbm_flags(train);
  add_config_flag(train);

  auto* evaluate = app.add_subcommand("evaluate", "score a dataset and write reports");
  evaluate->add_option("--model-file", model_file, "trained model file")->required();
  evaluate->add_option("--data", data_path, "dataset file to score")->required();
  evaluate->add_option("--out-prefix", prefix, "output path prefix")->required();
  auto* threshold_opt = evaluate->add_option(
      "--threshold", threshold, "decision cutoff (default: stored in the model)");
  add_config_flag(evaluate);

  auto* compare = app.add_subcommand("compare", "side-by-side metrics of two models");
  compare->add_option("--markov-model", markov_file, "markov model file")->required();
  compare->add_option("--gbm-model", gbm_file, "gbm model file")->required();
  compare->add_option("--data", data_path, "dataset file to score")->required();
  compare->add_option("--out-prefix", prefix, "output path prefix")->required();
  add_config_flag(compare);

  auto* run_paper = app.add_subcommand(
      "run-paper", "full pipeline: generate, split, train both models, evaluate, compare");
  run_paper->add_option("--out-dir", out_dir, "output directory")->required();
  add_generate_flags(run_paper);
  add_split_flags(run_paper);
  add_markov_flags(run_paper);
  add_gbm_flags(run_paper);
  add_config_flag(run_paper);

  // Two-pass parse: the first pass only discovers --config; the second starts
  // from the config file's values so explicit flags override them.
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (!config_path.empty()) {
    cfg = load_config_file(config_path);
    try {
      app.clear();
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kExitUsage;
    }
  }

  if (generate->parsed()) {
    cmd_generate(cfg, out);
  } else if (split->parsed()) {
    cmd_split(cfg, in_path, train_out, test_out);
  } else if (train->parsed()) {
    cmd_train(cfg, model_kind, train_path, out, cv_out, deviance_out);
  } else if (evaluate->parsed()) {
    cmd_evaluate(cfg, model_file, data_path, prefix, threshold_opt->count() > 0,
                 threshold);
  } else if (compare->parsed()) {
    cmd_compare(cfg, markov_file, gbm_file, data_path, prefix);
  } else if (run_paper->parsed()) {
    cmd_run_paper(cfg, out_dir);
  }
  return 0;
}
