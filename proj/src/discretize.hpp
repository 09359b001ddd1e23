#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace frauddet {

// Quantile binning of one numeric feature. Intervals are half-open on the
// left, (cut[i-1], cut[i]]; values at or below the first cut take the first
// label, values above the last cut take the last label, so the mapping is
// total on finite reals.
struct BinningSpec {
  std::string feature;
  std::vector<double> cuts;          // strictly increasing
  std::vector<std::string> labels;   // cuts.size() + 1 entries

  bool operator==(const BinningSpec&) const = default;
};

// Cut points at the type-1 empirical quantiles, i.e. the order statistics at
// ceil(j*n/k) for j = 1..k-1. Duplicate cuts collapse, and a cut equal to the
// sample maximum is dropped, so degenerate inputs yield fewer effective bins
// (all-identical input yields a single bin). `labels` must have k entries;
// the first (cuts+1) of them survive.
BinningSpec fit_bins(std::span<const double> values, int k,
                     std::vector<std::string> labels, std::string feature);

size_t bin_index(double value, const BinningSpec& spec);
const std::string& apply_bins(double value, const BinningSpec& spec);

// Bijection between category tuples seen during training and dense state ids
// 1..K, numbered in first-appearance order.
class StateTable {
 public:
  using Tuple = std::vector<std::string>;

  StateTable() = default;
  explicit StateTable(std::vector<std::string> feature_order)
      : feature_order_(std::move(feature_order)) {}

  // Returns the id of `tuple`, inserting it as a new state when unseen.
  int insert(const Tuple& tuple);

  // Training-time id, or nullopt for tuples absent from training (UNSEEN).
  std::optional<int> encode(const Tuple& tuple) const;

  const Tuple& decode(int state_id) const;

  int state_count() const { return static_cast<int>(states_.size()); }
  const std::vector<std::string>& feature_order() const { return feature_order_; }
  const std::vector<Tuple>& states() const { return states_; }

 private:
  void check_arity(const Tuple& tuple) const;
  static std::string key(const Tuple& tuple);

  std::vector<std::string> feature_order_;
  std::unordered_map<std::string, int> ids_;
  std::vector<Tuple> states_;
};

StateTable build_state_table(const std::vector<StateTable::Tuple>& rows,
                             std::vector<std::string> feature_order);

}  // namespace frauddet
