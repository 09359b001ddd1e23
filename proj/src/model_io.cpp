#include "model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common.hpp"

namespace frauddet {

namespace {

using json = nlohmann::ordered_json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open model file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw_io("write failed: " + path);
}

json parse(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw_validation(origin + ": not valid JSON");
  return j;
}

void check_format(const json& j, const char* expected, const std::string& origin) {
  const std::string format = j.value("format", "");
  if (format != expected)
    throw_validation(origin + ": format is \"" + format + "\", expected \"" +
                     expected + "\"");
  const int version = j.value("format_version", -1);
  if (version != kFormatVersion)
    throw_validation(origin + ": format_version " + std::to_string(version) +
                     " unsupported (expected " + std::to_string(kFormatVersion) + ")");
}

json bins_json(const std::vector<BinningSpec>& bins) {
  json arr = json::array();
  for (const auto& b : bins)
    arr.push_back({{"feature", b.feature}, {"cuts", b.cuts}, {"labels", b.labels}});
  return arr;
}

std::vector<BinningSpec> bins_from_json(const json& arr) {
  std::vector<BinningSpec> bins;
  for (const auto& jb : arr) {
    BinningSpec b;
    b.feature = jb.at("feature").get<std::string>();
    b.cuts = jb.at("cuts").get<std::vector<double>>();
    b.labels = jb.at("labels").get<std::vector<std::string>>();
    bins.push_back(std::move(b));
  }
  return bins;
}

}  // namespace

std::string markov_model_json(const MarkovFraudModel& model) {
  json j;
  j["format"] = kMarkovFormat;
  j["format_version"] = kFormatVersion;
  j["alpha"] = model.alpha;
  j["threshold"] = model.threshold;
  j["global_prior"] = model.global_prior;
  j["n_train"] = model.n_train;
  j["feature_order"] = model.feature_order;
  j["bins"] = bins_json(model.bins);
  j["vocab"] = model.vocab;
  j["category_counts"] = model.category_counts;
  j["initial"] = model.initial;
  j["transitions"] = model.transitions;
  json states = json::array();
  for (int id = 1; id <= model.states.state_count(); ++id) {
    const auto& stats = model.state_fraud[static_cast<size_t>(id - 1)];
    states.push_back({{"tuple", model.states.decode(id)},
                      {"fraud_count", stats.fraud_count},
                      {"total_count", stats.total_count},
                      {"p_fraud", stats.p_fraud}});
  }
  j["states"] = states;
  return j.dump(2) + "\n";
}

MarkovFraudModel markov_model_from_json(const std::string& text,
                                        const std::string& origin) {
  const json j = parse(text, origin);
  check_format(j, kMarkovFormat, origin);
  try {
    MarkovFraudModel model;
    model.alpha = j.at("alpha").get<double>();
    model.threshold = j.at("threshold").get<double>();
    model.global_prior = j.at("global_prior").get<double>();
    model.n_train = j.at("n_train").get<int64_t>();
    model.feature_order = j.at("feature_order").get<std::vector<std::string>>();
    model.bins = bins_from_json(j.at("bins"));
    model.vocab = j.at("vocab").get<std::vector<std::vector<std::string>>>();
    model.category_counts =
        j.at("category_counts").get<std::vector<std::vector<int64_t>>>();
    model.initial = j.at("initial").get<std::vector<double>>();
    model.transitions =
        j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();

    model.states = StateTable(model.feature_order);
    for (const auto& js : j.at("states")) {
      model.states.insert(js.at("tuple").get<StateTable::Tuple>());
      StateFraudStats stats;
      stats.fraud_count = js.at("fraud_count").get<int64_t>();
      stats.total_count = js.at("total_count").get<int64_t>();
      stats.p_fraud = js.at("p_fraud").get<double>();
      model.state_fraud.push_back(stats);
    }

    // structural consistency; scoring indexes these tables by vocabulary size
    const size_t n_features = model.feature_order.size();
    if (n_features == 0 || model.vocab.size() != n_features ||
        model.category_counts.size() != n_features ||
        model.initial.size() != model.vocab[0].size() ||
        model.transitions.size() != n_features - 1)
      throw_validation(origin + ": table dimensions do not match feature_order");
    for (size_t f = 0; f < n_features; ++f)
      if (model.category_counts[f].size() != model.vocab[f].size())
        throw_validation(origin + ": category_counts misaligned with vocab");
    for (size_t f = 0; f + 1 < n_features; ++f) {
      if (model.transitions[f].size() != model.vocab[f].size())
        throw_validation(origin + ": transition table misaligned with vocab");
      for (const auto& row : model.transitions[f])
        if (row.size() != model.vocab[f + 1].size())
          throw_validation(origin + ": transition row misaligned with vocab");
    }
    model.reindex();
    return model;
  } catch (const json::exception& e) {
    throw_validation(origin + ": malformed markov model: " + e.what());
  }
}

std::string gbm_model_json(const GbmModel& model) {
  json j;
  j["format"] = kGbmFormat;
  j["format_version"] = kFormatVersion;
  j["f0"] = model.f0;
  j["learning_rate"] = model.learning_rate;
  j["best_iteration"] = model.best_iteration;
  j["threshold"] = model.threshold;
  j["one_hot"] = model.encoder.one_hot();
  json features = json::array();
  for (const auto& spec : model.encoder.features()) {
    json jf = {{"name", spec.name}, {"categorical", spec.categorical}};
    if (spec.categorical) jf["categories"] = spec.categories;
    features.push_back(jf);
  }
  j["features"] = features;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json jt;
    std::vector<int32_t> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    jt["feature"] = feature;
    jt["threshold"] = threshold;
    jt["left"] = left;
    jt["right"] = right;
    jt["value"] = value;
    trees.push_back(jt);
  }
  j["trees"] = trees;
  return j.dump(2) + "\n";
}

GbmModel gbm_model_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  check_format(j, kGbmFormat, origin);
  try {
    GbmModel model;
    model.f0 = j.at("f0").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.best_iteration = j.at("best_iteration").get<int>();
    model.threshold = j.at("threshold").get<double>();

    std::vector<FeatureSpec> specs;
    for (const auto& jf : j.at("features")) {
      FeatureSpec spec;
      spec.name = jf.at("name").get<std::string>();
      spec.categorical = jf.at("categorical").get<bool>();
      if (spec.categorical)
        spec.categories = jf.at("categories").get<std::vector<std::string>>();
      specs.push_back(std::move(spec));
    }
    model.encoder =
        FeatureEncoder::from_specs(std::move(specs), j.at("one_hot").get<bool>());

    for (const auto& jt : j.at("trees")) {
      const auto feature = jt.at("feature").get<std::vector<int32_t>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int32_t>>();
      const auto right = jt.at("right").get<std::vector<int32_t>>();
      const auto value = jt.at("value").get<std::vector<double>>();
      if (feature.size() != threshold.size() || feature.size() != left.size() ||
          feature.size() != right.size() || feature.size() != value.size())
        throw_validation(origin + ": tree arrays differ in length");
      if (feature.empty()) throw_validation(origin + ": empty tree");
      RegressionTree tree;
      tree.nodes.resize(feature.size());
      const auto size = static_cast<int32_t>(feature.size());
      const auto columns = static_cast<int32_t>(model.encoder.column_count());
      for (size_t i = 0; i < feature.size(); ++i) {
        if (feature[i] >= 0) {
          if (feature[i] >= columns || left[i] < 0 || left[i] >= size ||
              right[i] < 0 || right[i] >= size ||
              left[i] <= static_cast<int32_t>(i) || right[i] <= static_cast<int32_t>(i))
            throw_validation(origin + ": tree node " + std::to_string(i) +
                             " references an invalid child or feature");
        }
        tree.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw_validation(origin + ": malformed gbm model: " + e.what());
  }
}

void save_markov_model(const MarkovFraudModel& model, const std::string& path) {
  spill(path, markov_model_json(model));
}

MarkovFraudModel load_markov_model(const std::string& path) {
  return markov_model_from_json(slurp(path), path);
}

void save_gbm_model(const GbmModel& model, const std::string& path) {
  spill(path, gbm_model_json(model));
}

GbmModel load_gbm_model(const std::string& path) {
  return gbm_model_from_json(slurp(path), path);
}

ModelKind probe_model_kind(const std::string& path) {
  const json j = parse(slurp(path), path);
  const std::string format = j.value("format", "");
  if (format == kMarkovFormat) return ModelKind::Markov;
  if (format == kGbmFormat) return ModelKind::Gbm;
  throw_validation(path + ": unrecognized model format \"" + format + "\"");
}

}  // namespace frauddet
