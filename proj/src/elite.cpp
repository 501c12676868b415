#include "edsvm/elite.hpp"

#include "edsvm/baselines.hpp"
#include "edsvm/error.hpp"

#include <algorithm>

namespace edsvm {

std::string AggregationRule::describe() const {
  auto join = [&]() {
    std::string s;
    for (std::size_t k = 0; k < models.size(); ++k) {
      if (k > 0) s += ",";
      s += models[k];
    }
    return s;
  };
  switch (kind) {
    case Kind::Min:
      return "min";
    case Kind::Mean:
      return "mean";
    case Kind::Max:
      return "max";
    case Kind::Single:
      return "single(" + join() + ")";
    case Kind::MeanOf:
      return "mean_of(" + join() + ")";
  }
  return {};
}

TargetPreset target_preset(const std::string& name) {
  const auto cedsvm_uci = AggregationRule::mean_of({"linexsvm", "lssvm"});
  const auto lsedsvm_uci = AggregationRule::mean_of({"csvm", "linexsvm"});
  if (name == "min") return {name, AggregationRule::min(), AggregationRule::min()};
  if (name == "mean") return {name, cedsvm_uci, cedsvm_uci};
  if (name == "max") return {name, AggregationRule::max(), AggregationRule::max()};
  if (name == "linex") {
    const auto r = AggregationRule::single("linexsvm");
    return {name, r, r};
  }
  if (name == "uci") return {name, cedsvm_uci, lsedsvm_uci};
  if (name == "uci-cedsvm") return {name, cedsvm_uci, cedsvm_uci};
  if (name == "uci-lsedsvm") return {name, lsedsvm_uci, lsedsvm_uci};
  throw InvalidArgument("unknown target preset '" + name + "'");
}

const std::vector<std::string>& target_preset_names() {
  static const std::vector<std::string> names{"min",   "mean",       "max",
                                              "linex", "uci",        "uci-cedsvm",
                                              "uci-lsedsvm"};
  return names;
}

std::vector<Index> union_of(const std::vector<std::vector<Index>>& sets) {
  std::vector<Index> out;
  for (const auto& s : sets) out.insert(out.end(), s.begin(), s.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void require_same_data(std::span<const TrainedModel> models) {
  require(!models.empty(), "elite: no benchmark models given");
  for (const auto& m : models) {
    require(m.fitted(), "elite: benchmark model not fitted");
    require(m.train == models.front().train,
            "elite: benchmark models were fitted on different datasets");
  }
}

}  // namespace

std::vector<Index> build_elite_set(std::span<const TrainedModel> models, double eps) {
  require_same_data(models);
  std::vector<std::vector<Index>> sets;
  for (const auto& m : models) sets.push_back(support_indices(m, eps));
  return union_of(sets);
}

Vector aggregate_slacks(std::span<const Vector> slacks, std::span<const std::string> ids,
                        const std::vector<Index>& elite, const AggregationRule& rule) {
  require(slacks.size() == ids.size(), "aggregate: slack and id counts differ");
  require(!slacks.empty(), "aggregate: no benchmark slacks");
  const Index n = slacks.front().size();
  for (const auto& s : slacks) require(s.size() == n, "aggregate: slack lengths differ");
  for (Index i : elite) require(i >= 0 && i < n, "aggregate: elite index out of range");

  auto find = [&](const std::string& id) -> const Vector& {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] == id) return slacks[k];
    }
    throw InvalidArgument("aggregate: rule references missing model '" + id + "'");
  };

  std::vector<const Vector*> used;
  switch (rule.kind) {
    case AggregationRule::Kind::Min:
    case AggregationRule::Kind::Mean:
    case AggregationRule::Kind::Max:
      for (const auto& s : slacks) used.push_back(&s);
      break;
    case AggregationRule::Kind::Single:
      require(rule.models.size() == 1, "aggregate: single rule needs exactly one model");
      used.push_back(&find(rule.models.front()));
      break;
    case AggregationRule::Kind::MeanOf:
      require(!rule.models.empty(), "aggregate: mean_of rule needs models");
      for (const auto& id : rule.models) used.push_back(&find(id));
      break;
  }

  Vector out(static_cast<Index>(elite.size()));
  for (std::size_t k = 0; k < elite.size(); ++k) {
    const Index i = elite[k];
    double v = 0.0;
    if (rule.kind == AggregationRule::Kind::Min) {
      v = kInf;
      for (const auto* s : used) v = std::min(v, (*s)[i]);
    } else if (rule.kind == AggregationRule::Kind::Max) {
      v = -kInf;
      for (const auto* s : used) v = std::max(v, (*s)[i]);
    } else {
      for (const auto* s : used) v += (*s)[i];
      v /= static_cast<double>(used.size());
    }
    out[static_cast<Index>(k)] = v;
  }
  return out;
}

Vector aggregate_targets(std::span<const TrainedModel> models,
                         const std::vector<Index>& elite, const AggregationRule& rule) {
  require_same_data(models);
  require(!elite.empty(), "aggregate: elite set is empty");
  std::vector<Vector> slacks;
  std::vector<std::string> ids;
  for (const auto& m : models) {
    slacks.push_back(extract_slacks(m));
    ids.push_back(to_string(m.variant));
  }
  return aggregate_slacks(slacks, ids, elite, rule);
}

EliteGuide make_guide(std::span<const TrainedModel> models, const AggregationRule& rule,
                      double eps) {
  EliteGuide g;
  g.elite = build_elite_set(models, eps);
  g.targets = g.elite.empty() ? Vector() : aggregate_targets(models, g.elite, rule);
  for (const auto& m : models) g.source.push_back(to_string(m.variant));
  g.source.push_back("rule=" + rule.describe());
  return g;
}

}  // namespace edsvm
