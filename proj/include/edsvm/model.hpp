#pragma once

#include "edsvm/kernel.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace edsvm {

enum class Variant { CSVM, LSSVM, LINEXSVM, CEDSVM, LSEDSVM };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// Elite index set (original dataset order, ascending) with target slacks.
struct EliteGuide {
  std::vector<Index> elite;
  Vector targets;
  std::vector<std::string> source;

  Index size() const { return static_cast<Index>(elite.size()); }
  bool empty() const { return elite.empty(); }

  /// Unique, sorted, in range [0, n); targets finite and nonnegative.
  void validate(Index n) const;

  friend bool operator==(const EliteGuide& a, const EliteGuide& b);
};

/// f(x) = beta0 + sum_j alpha_j y_j K(x_j, x) over the stored training set.
/// LINEX-SVM stores its representer coefficients c_j as alpha_j = y_j c_j,
/// so alpha may be negative for that variant only.
struct TrainedModel {
  Variant variant = Variant::CSVM;
  KernelSpec kernel;
  Dataset train;
  Vector alpha;
  double beta0 = 0.0;
  std::map<std::string, double> hyper;
  std::optional<EliteGuide> guide;
  bool converged = true;

  bool fitted() const { return train.size() > 0 && alpha.size() == train.size(); }
  double hyperparameter(const std::string& name) const;
};

Vector decision_values(const TrainedModel& model, const Matrix& X);

/// Decision values on the training set given its Gram matrix.
Vector training_decision_values(const TrainedModel& model, const Matrix& K);
Vector training_decision_values(const TrainedModel& model);

/// sign(f) with sign(0) = +1.
Vector predict(const TrainedModel& model, const Matrix& X);
Vector sign_labels(const Vector& scores);

}  // namespace edsvm
