#pragma once

#include "edsvm/kernel.hpp"

#include <string>
#include <vector>

namespace edsvm {

struct Metrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  // False when no positive predictions were made; precision is then 0.
  bool precision_defined = true;
  Index tp = 0;
  Index fp = 0;
  Index tn = 0;
  Index fn = 0;
};

/// Names and accessors in report order.
const std::vector<std::string>& metric_names();
double metric_value(const Metrics& m, const std::string& name);
void set_metric_value(Metrics& m, const std::string& name, double value);

/// Confusion counts at sign(score - threshold) (ties to +1), ROC-AUC by
/// the tie-grouped trapezoid rule, PR-AUC as average precision.
Metrics compute_metrics(const Vector& scores, const Vector& labels, double threshold = 0.0);

/// Exact: (2 * #{s_pos > s_neg} + #{s_pos == s_neg}) / (2 P N).
double roc_auc(const Vector& scores, const Vector& labels);

/// sum_k (R_k - R_{k-1}) P_k over descending tie groups.
double average_precision(const Vector& scores, const Vector& labels);

}  // namespace edsvm
