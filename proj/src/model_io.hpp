#pragma once

#include <string>

#include "gbm.hpp"
#include "markov.hpp"

namespace frauddet {

enum class ModelKind { Markov, Gbm };

// Models persist as pretty-printed JSON with a format tag and version field;
// load(save(m)) reproduces m exactly (doubles round-trip via shortest-form
// serialization). Schema documented in the README.
inline constexpr const char* kMarkovFormat = "frauddet.markov";
inline constexpr const char* kGbmFormat = "frauddet.gbm";
inline constexpr int kFormatVersion = 1;

std::string markov_model_json(const MarkovFraudModel& model);
MarkovFraudModel markov_model_from_json(const std::string& text,
                                        const std::string& origin);

std::string gbm_model_json(const GbmModel& model);
GbmModel gbm_model_from_json(const std::string& text, const std::string& origin);

void save_markov_model(const MarkovFraudModel& model, const std::string& path);
MarkovFraudModel load_markov_model(const std::string& path);

void save_gbm_model(const GbmModel& model, const std::string& path);
GbmModel load_gbm_model(const std::string& path);

// Reads just the format tag of a model file.
ModelKind probe_model_kind(const std::string& path);

}  // namespace frauddet
