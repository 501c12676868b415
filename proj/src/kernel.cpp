#include "edsvm/kernel.hpp"

#include "edsvm/error.hpp"

#include <cmath>

namespace edsvm {

Dataset::Dataset(Matrix features, Vector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  require(features_.rows() == labels_.size(),
          "dataset: feature rows and label count differ");
  require(features_.allFinite(), "dataset: non-finite feature entry");
  for (Index i = 0; i < labels_.size(); ++i) {
    require(labels_[i] == 1.0 || labels_[i] == -1.0,
            "dataset: labels must be exactly -1 or +1");
  }
}

Index Dataset::count_positive() const {
  return (labels_.array() > 0.0).count();
}

void Dataset::require_trainable() const {
  require(size() >= 2, "dataset: need at least two observations");
  require(count_positive() > 0 && count_negative() > 0,
          "dataset: both classes must be present");
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Matrix x(static_cast<Index>(rows.size()), dim());
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    require(r >= 0 && r < size(), "dataset: row index out of range");
    x.row(static_cast<Index>(k)) = features_.row(r);
    y[static_cast<Index>(k)] = labels_[r];
  }
  return Dataset(std::move(x), std::move(y));
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.features_.rows() == b.features_.rows() &&
         a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_ && a.labels_ == b.labels_;
}

KernelSpec KernelSpec::polynomial(int degree, double coef0) {
  KernelSpec k;
  k.kind = Kind::Polynomial;
  k.degree = degree;
  k.coef0 = coef0;
  k.validate();
  return k;
}

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec k;
  k.kind = Kind::RBF;
  k.gamma = gamma;
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  switch (kind) {
    case Kind::Linear:
      break;
    case Kind::Polynomial:
      require(degree >= 1, "kernel: polynomial degree must be >= 1");
      require(std::isfinite(coef0), "kernel: coef0 must be finite");
      break;
    case Kind::RBF:
      require(std::isfinite(gamma) && gamma > 0.0,
              "kernel: RBF gamma must be positive");
      break;
  }
}

double KernelSpec::operator()(const Eigen::Ref<const Vector>& a,
                              const Eigen::Ref<const Vector>& b) const {
  switch (kind) {
    case Kind::Linear:
      return a.dot(b);
    case Kind::Polynomial:
      return std::pow(a.dot(b) + coef0, degree);
    case Kind::RBF:
      return std::exp(-gamma * (a - b).squaredNorm());
  }
  return 0.0;
}

std::string KernelSpec::name() const {
  switch (kind) {
    case Kind::Linear:
      return "linear";
    case Kind::Polynomial:
      return "polynomial(degree=" + std::to_string(degree) +
             ",coef0=" + std::to_string(coef0) + ")";
    case Kind::RBF:
      return "rbf(gamma=" + std::to_string(gamma) + ")";
  }
  return {};
}

std::string to_string(KernelSpec::Kind kind) {
  switch (kind) {
    case KernelSpec::Kind::Linear:
      return "linear";
    case KernelSpec::Kind::Polynomial:
      return "polynomial";
    case KernelSpec::Kind::RBF:
      return "rbf";
  }
  return {};
}

KernelSpec::Kind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelSpec::Kind::Linear;
  if (name == "polynomial" || name == "poly") return KernelSpec::Kind::Polynomial;
  if (name == "rbf" || name == "gaussian") return KernelSpec::Kind::RBF;
  throw InvalidArgument("unknown kernel '" + name + "'");
}

Matrix compute_gram(const KernelSpec& kernel, const Matrix& A, const Matrix& B) {
  kernel.validate();
  require(A.cols() == B.cols(), "compute_gram: column counts differ");
  require(A.allFinite() && B.allFinite(), "compute_gram: non-finite input");

  Matrix G = A * B.transpose();
  switch (kernel.kind) {
    case KernelSpec::Kind::Linear:
      break;
    case KernelSpec::Kind::Polynomial:
      G = (G.array() + kernel.coef0).pow(kernel.degree).matrix();
      break;
    case KernelSpec::Kind::RBF: {
      // Exact pairwise differences keep K(x, x) == 1 and entries in (0, 1].
      for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < B.rows(); ++j) {
          G(i, j) = std::exp(-kernel.gamma * (A.row(i) - B.row(j)).squaredNorm());
        }
      }
      break;
    }
  }
  return G;
}

Matrix compute_gram(const KernelSpec& kernel, const Matrix& A) {
  Matrix G = compute_gram(kernel, A, A);
  // Symmetrize exactly; BLAS products can differ in the last bit.
  Matrix S = 0.5 * (G + G.transpose());
  return S;
}

}  // namespace edsvm
