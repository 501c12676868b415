#include "edsvm/metrics.hpp"

#include "edsvm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace edsvm {
namespace {

void check_inputs(const Vector& scores, const Vector& labels) {
  require(scores.size() == labels.size(), "metrics: scores and labels differ in length");
  require(scores.size() > 0, "metrics: empty input");
  require(scores.allFinite(), "metrics: non-finite score");
  for (Index i = 0; i < labels.size(); ++i) {
    require(labels[i] == 1.0 || labels[i] == -1.0, "metrics: labels must be -1 or +1");
  }
}

struct Group {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

// Tie groups in descending score order.
std::vector<Group> descending_groups(const Vector& scores, const Vector& labels) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores[a] > scores[b]; });
  std::vector<Group> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || scores[order[k]] != scores[order[k - 1]]) groups.emplace_back();
    if (labels[order[k]] > 0.0) {
      ++groups.back().pos;
    } else {
      ++groups.back().neg;
    }
  }
  return groups;
}

std::pair<std::int64_t, std::int64_t> class_counts(const Vector& labels) {
  std::int64_t p = 0;
  for (Index i = 0; i < labels.size(); ++i) p += labels[i] > 0.0 ? 1 : 0;
  return {p, labels.size() - p};
}

}  // namespace

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"accuracy", "sensitivity", "specificity",
                                              "precision", "f1", "roc_auc", "pr_auc"};
  return names;
}

double metric_value(const Metrics& m, const std::string& name) {
  if (name == "accuracy") return m.accuracy;
  if (name == "sensitivity") return m.sensitivity;
  if (name == "specificity") return m.specificity;
  if (name == "precision") return m.precision;
  if (name == "f1") return m.f1;
  if (name == "roc_auc") return m.roc_auc;
  if (name == "pr_auc") return m.pr_auc;
  throw InvalidArgument("unknown metric '" + name + "'");
}

void set_metric_value(Metrics& m, const std::string& name, double value) {
  if (name == "accuracy") {
    m.accuracy = value;
  } else if (name == "sensitivity") {
    m.sensitivity = value;
  } else if (name == "specificity") {
    m.specificity = value;
  } else if (name == "precision") {
    m.precision = value;
  } else if (name == "f1") {
    m.f1 = value;
  } else if (name == "roc_auc") {
    m.roc_auc = value;
  } else if (name == "pr_auc") {
    m.pr_auc = value;
  } else {
    throw InvalidArgument("unknown metric '" + name + "'");
  }
}

double roc_auc(const Vector& scores, const Vector& labels) {
  check_inputs(scores, labels);
  const auto [P, N] = class_counts(labels);
  require(P > 0 && N > 0, "roc_auc: both classes must be present");
  // Each negative contributes 2 * (#positives ranked strictly above) plus
  // the positives tied with it.
  std::int64_t area2 = 0;
  std::int64_t tp_before = 0;
  for (const Group& g : descending_groups(scores, labels)) {
    area2 += g.neg * (2 * tp_before + g.pos);
    tp_before += g.pos;
  }
  return static_cast<double>(area2) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

double average_precision(const Vector& scores, const Vector& labels) {
  check_inputs(scores, labels);
  const auto [P, N] = class_counts(labels);
  require(P > 0 && N > 0, "average_precision: both classes must be present");
  double ap = 0.0;
  std::int64_t tp = 0;
  std::int64_t seen = 0;
  for (const Group& g : descending_groups(scores, labels)) {
    tp += g.pos;
    seen += g.pos + g.neg;
    if (g.pos > 0) {
      ap += (static_cast<double>(g.pos) / static_cast<double>(P)) *
            (static_cast<double>(tp) / static_cast<double>(seen));
    }
  }
  return ap;
}

Metrics compute_metrics(const Vector& scores, const Vector& labels, double threshold) {
  check_inputs(scores, labels);
  require(std::isfinite(threshold), "metrics: threshold must be finite");
  Metrics m;
  for (Index i = 0; i < scores.size(); ++i) {
    const bool pred_pos = scores[i] - threshold >= 0.0;
    const bool pos = labels[i] > 0.0;
    if (pred_pos && pos) ++m.tp;
    if (pred_pos && !pos) ++m.fp;
    if (!pred_pos && !pos) ++m.tn;
    if (!pred_pos && pos) ++m.fn;
  }
  const auto d = [](Index a, Index b) { return static_cast<double>(a) / static_cast<double>(b); };
  m.accuracy = d(m.tp + m.tn, scores.size());
  m.sensitivity = m.tp + m.fn > 0 ? d(m.tp, m.tp + m.fn) : 0.0;
  m.specificity = m.tn + m.fp > 0 ? d(m.tn, m.tn + m.fp) : 0.0;
  m.precision_defined = m.tp + m.fp > 0;
  m.precision = m.precision_defined ? d(m.tp, m.tp + m.fp) : 0.0;
  m.f1 = m.precision + m.sensitivity > 0.0
             ? 2.0 * m.precision * m.sensitivity / (m.precision + m.sensitivity)
             : 0.0;
  m.roc_auc = roc_auc(scores, labels);
  m.pr_auc = average_precision(scores, labels);
  return m;
}

}  // namespace edsvm
