#pragma once

#include "edsvm/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace edsvm {

/// How per-model slacks are combined into one target per elite point.
/// Models are referenced by their variant name (to_string(Variant)).
struct AggregationRule {
  enum class Kind { Min, Mean, Max, Single, MeanOf };

  Kind kind = Kind::Min;
  std::vector<std::string> models;

  static AggregationRule min() { return {Kind::Min, {}}; }
  static AggregationRule mean() { return {Kind::Mean, {}}; }
  static AggregationRule max() { return {Kind::Max, {}}; }
  static AggregationRule single(std::string model) { return {Kind::Single, {std::move(model)}}; }
  static AggregationRule mean_of(std::vector<std::string> ids) {
    return {Kind::MeanOf, std::move(ids)};
  }

  std::string describe() const;
  friend bool operator==(const AggregationRule&, const AggregationRule&) = default;
};

/// Named target recipes. For min/mean/max/linex both EDSVM variants use the
/// same rule; "uci" pairs C-EDSVM with mean(LINEX, LS) and LS-EDSVM with
/// mean(C-SVM, LINEX); "uci-cedsvm" and "uci-lsedsvm" apply one of those
/// two recipes to both variants.
struct TargetPreset {
  std::string name;
  AggregationRule cedsvm;
  AggregationRule lsedsvm;
};

TargetPreset target_preset(const std::string& name);
const std::vector<std::string>& target_preset_names();

/// Sorted union of index sets.
std::vector<Index> union_of(const std::vector<std::vector<Index>>& sets);

/// Sorted union of support_indices over the models. All models must share
/// one training dataset.
std::vector<Index> build_elite_set(std::span<const TrainedModel> models, double eps = 1e-8);

/// Aggregates per-model slack vectors (each of length n, tagged by `ids`)
/// at the elite indices.
Vector aggregate_slacks(std::span<const Vector> slacks, std::span<const std::string> ids,
                        const std::vector<Index>& elite, const AggregationRule& rule);

/// Same, computing each model's training slacks first.
Vector aggregate_targets(std::span<const TrainedModel> models,
                         const std::vector<Index>& elite, const AggregationRule& rule);

/// Elite set plus aggregated targets with provenance tags.
EliteGuide make_guide(std::span<const TrainedModel> models, const AggregationRule& rule,
                      double eps = 1e-8);

}  // namespace edsvm
