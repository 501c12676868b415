#pragma once

#include "edsvm/model.hpp"
#include "edsvm/qp.hpp"

#include <vector>

namespace edsvm {

struct SolverOptions {
  SmoOptions smo;
  // LINEX stops when the gradient norm is below linex_tol * (1 + scale),
  // scale being the summed magnitude of the gradient terms.
  double linex_tol = 1e-8;
  std::size_t linex_max_iter = 100'000;
};

/// Hinge dual: Q = H, R = 1, D = 0, box [0, C].
DualQP build_csvm_dual(const Vector& y, const Matrix& K, double C);

/// Squared-slack dual: Q = H + I/(2C), R = 1, D = 0, alpha >= 0.
DualQP build_lssvm_dual(const Vector& y, const Matrix& K, double C);

/// H_ij = y_i y_j K_ij.
Matrix label_gram(const Vector& y, const Matrix& K);

TrainedModel fit_csvm(const Dataset& data, double C, const KernelSpec& kernel,
                      const SolverOptions& options = {});
TrainedModel fit_csvm(const Dataset& data, const Matrix& K, double C,
                      const KernelSpec& kernel, const SolverOptions& options = {});

TrainedModel fit_lssvm(const Dataset& data, double C, const KernelSpec& kernel,
                       const SolverOptions& options = {});
TrainedModel fit_lssvm(const Dataset& data, const Matrix& K, double C,
                       const KernelSpec& kernel, const SolverOptions& options = {});

/// phi(z) = exp(a(1 - z)) - a(1 - z) - 1 and its first two derivatives.
double linex_loss(double z, double a);
double linex_derivative(double z, double a);
double linex_second_derivative(double z, double a);

/// Explicit finite-dimensional features Phi with Phi Phi' = K (up to
/// eigenvalues below 1e-12 * max eigenvalue). The linear kernel uses the
/// raw features directly.
Matrix linex_features(const Dataset& data, const Matrix& K, const KernelSpec& kernel);

/// Minimizes 1/2 c'Kc + C sum phi(y_i (b + (Kc)_i)) by damped Newton on
/// (w, b) in the feature space of linex_features, then maps back with the
/// stationarity identity c = -C y o phi'(z). `warm` (size r + 1) is used as
/// the starting point when it has the right size and is overwritten with
/// the solution.
TrainedModel fit_linexsvm(const Dataset& data, double C, double a,
                          const KernelSpec& kernel, const SolverOptions& options = {});
TrainedModel fit_linexsvm(const Dataset& data, const Matrix& K, const Matrix& features,
                          double C, double a, const KernelSpec& kernel,
                          const SolverOptions& options = {}, Vector* warm = nullptr);

/// xi_i = max(0, 1 - y_i f(x_i)) on the model's own training data.
Vector extract_slacks(const TrainedModel& model);
Vector extract_slacks(const TrainedModel& model, const Matrix& K);

/// delta_i = 1 - y_i f(x_i) on the model's training inputs; may be negative.
Vector margin_deviations(const TrainedModel& model, const Matrix& K);
Vector margin_deviations(const TrainedModel& model);

/// Dual-fitted variants: {i : alpha_i > eps}. LINEX-SVM: {i : y_i f(x_i) <= 1 + eps}.
std::vector<Index> support_indices(const TrainedModel& model, double eps = 1e-8);
std::vector<Index> support_indices(const TrainedModel& model, const Matrix& K,
                                   double eps = 1e-8);

/// (alpha o y)' K (alpha o y).
double rkhs_norm_sq(const TrainedModel& model);
double rkhs_norm_sq(const TrainedModel& model, const Matrix& K);

}  // namespace edsvm
