#include "edsvm/model.hpp"

#include "edsvm/error.hpp"

#include <cmath>

namespace edsvm {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::CSVM:
      return "csvm";
    case Variant::LSSVM:
      return "lssvm";
    case Variant::LINEXSVM:
      return "linexsvm";
    case Variant::CEDSVM:
      return "cedsvm";
    case Variant::LSEDSVM:
      return "lsedsvm";
  }
  return {};
}

Variant parse_variant(const std::string& name) {
  if (name == "csvm" || name == "c-svm") return Variant::CSVM;
  if (name == "lssvm" || name == "ls-svm") return Variant::LSSVM;
  if (name == "linexsvm" || name == "linex-svm" || name == "linex") return Variant::LINEXSVM;
  if (name == "cedsvm" || name == "c-edsvm") return Variant::CEDSVM;
  if (name == "lsedsvm" || name == "ls-edsvm") return Variant::LSEDSVM;
  throw InvalidArgument("unknown model '" + name + "'");
}

void EliteGuide::validate(Index n) const {
  require(targets.size() == size(), "guide: targets length differs from elite size");
  require(size() <= n, "guide: more elite points than observations");
  for (std::size_t k = 0; k < elite.size(); ++k) {
    require(elite[k] >= 0 && elite[k] < n, "guide: elite index out of range");
    if (k > 0) require(elite[k] > elite[k - 1], "guide: elite indices must be strictly increasing");
  }
  for (Index k = 0; k < targets.size(); ++k) {
    require(std::isfinite(targets[k]) && targets[k] >= 0.0,
            "guide: targets must be finite and nonnegative");
  }
}

bool operator==(const EliteGuide& a, const EliteGuide& b) {
  return a.elite == b.elite && a.targets.size() == b.targets.size() &&
         a.targets == b.targets && a.source == b.source;
}

double TrainedModel::hyperparameter(const std::string& name) const {
  auto it = hyper.find(name);
  require(it != hyper.end(), "model: hyperparameter '" + name + "' not set");
  return it->second;
}

namespace {

void require_fitted(const TrainedModel& model) {
  require(model.fitted(), "model: not fitted");
}

}  // namespace

Vector decision_values(const TrainedModel& model, const Matrix& X) {
  require_fitted(model);
  require(X.cols() == model.train.dim(), "decision_values: feature dimension mismatch");
  const Vector coef = model.alpha.cwiseProduct(model.train.labels());
  const Matrix K = compute_gram(model.kernel, X, model.train.features());
  return (K * coef).array() + model.beta0;
}

Vector training_decision_values(const TrainedModel& model, const Matrix& K) {
  require_fitted(model);
  require(K.rows() == model.train.size() && K.cols() == model.train.size(),
          "training_decision_values: Gram size mismatch");
  const Vector coef = model.alpha.cwiseProduct(model.train.labels());
  return (K * coef).array() + model.beta0;
}

Vector training_decision_values(const TrainedModel& model) {
  require_fitted(model);
  return training_decision_values(model, compute_gram(model.kernel, model.train.features()));
}

Vector sign_labels(const Vector& scores) {
  return scores.unaryExpr([](double s) { return s >= 0.0 ? 1.0 : -1.0; });
}

Vector predict(const TrainedModel& model, const Matrix& X) {
  return sign_labels(decision_values(model, X));
}

}  // namespace edsvm
