#include "discretize.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace frauddet {

BinningSpec fit_bins(std::span<const double> values, int k,
                     std::vector<std::string> labels, std::string feature) {
  if (values.empty()) throw_invalid("fit_bins: no values for feature '" + feature + "'");
  if (k < 1) throw_invalid("fit_bins: k must be >= 1");
  if (labels.size() != static_cast<size_t>(k))
    throw_invalid("fit_bins: expected " + std::to_string(k) + " labels, got " +
                  std::to_string(labels.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw_invalid("fit_bins: values must be finite");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double max_value = sorted.back();

  BinningSpec spec;
  spec.feature = std::move(feature);
  for (int j = 1; j < k; ++j) {
    // order statistic at ceil(j*n/k), 1-indexed
    const size_t rank = (static_cast<size_t>(j) * n + static_cast<size_t>(k) - 1) /
                        static_cast<size_t>(k);
    const double cut = sorted[rank - 1];
    if (cut >= max_value) continue;  // would leave the top bin empty
    if (!spec.cuts.empty() && cut == spec.cuts.back()) continue;
    spec.cuts.push_back(cut);
  }
  labels.resize(spec.cuts.size() + 1);
  spec.labels = std::move(labels);
  return spec;
}

size_t bin_index(double value, const BinningSpec& spec) {
  // first cut with value <= cut; above all cuts -> last bin
  const auto it = std::lower_bound(spec.cuts.begin(), spec.cuts.end(), value);
  return static_cast<size_t>(it - spec.cuts.begin());
}

const std::string& apply_bins(double value, const BinningSpec& spec) {
  return spec.labels[bin_index(value, spec)];
}

void StateTable::check_arity(const Tuple& tuple) const {
  if (tuple.size() != feature_order_.size())
    throw_invalid("state tuple has " + std::to_string(tuple.size()) +
                  " categories, expected " + std::to_string(feature_order_.size()));
}

std::string StateTable::key(const Tuple& tuple) {
  std::string k;
  for (const auto& c : tuple) {
    k += c;
    k += '\x1f';
  }
  return k;
}

int StateTable::insert(const Tuple& tuple) {
  check_arity(tuple);
  const auto [it, inserted] = ids_.try_emplace(key(tuple), state_count() + 1);
  if (inserted) states_.push_back(tuple);
  return it->second;
}

std::optional<int> StateTable::encode(const Tuple& tuple) const {
  check_arity(tuple);
  const auto it = ids_.find(key(tuple));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const StateTable::Tuple& StateTable::decode(int state_id) const {
  if (state_id < 1 || state_id > state_count())
    throw_invalid("state id " + std::to_string(state_id) + " out of range 1.." +
                  std::to_string(state_count()));
  return states_[static_cast<size_t>(state_id - 1)];
}

StateTable build_state_table(const std::vector<StateTable::Tuple>& rows,
                             std::vector<std::string> feature_order) {
  StateTable table(std::move(feature_order));
  for (const auto& row : rows) table.insert(row);
  return table;
}

}  // namespace frauddet
