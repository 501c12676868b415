#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace edsvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Feature matrix (rows are observations) with labels in {-1, +1}.
///
/// Construction validates finiteness and label values. Training routines
/// additionally call require_trainable() (n >= 2, both classes present).
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix features, Vector labels);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  Index size() const { return features_.rows(); }
  Index dim() const { return features_.cols(); }

  Index count_positive() const;
  Index count_negative() const { return size() - count_positive(); }

  void require_trainable() const;

  Dataset subset(std::span<const Index> rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix features_;
  Vector labels_;
};

struct KernelSpec {
  enum class Kind { Linear, Polynomial, RBF };

  Kind kind = Kind::Linear;
  int degree = 2;
  double coef0 = 1.0;
  double gamma = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double coef0);
  static KernelSpec rbf(double gamma);

  void validate() const;
  double operator()(const Eigen::Ref<const Vector>& a,
                    const Eigen::Ref<const Vector>& b) const;

  std::string name() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelSpec::Kind kind);
KernelSpec::Kind parse_kernel_kind(const std::string& name);

/// K(a_i, b_j) for all rows of A and B.
Matrix compute_gram(const KernelSpec& kernel, const Matrix& A, const Matrix& B);

/// Symmetric Gram matrix of a single point set.
Matrix compute_gram(const KernelSpec& kernel, const Matrix& A);

}  // namespace edsvm
