#include "edsvm/baselines.hpp"

#include "edsvm/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace edsvm {
namespace {

void check_cost(double C) {
  require(std::isfinite(C) && C > 0.0, "C must be positive and finite");
}

void check_gram(const Dataset& data, const Matrix& K) {
  require(K.rows() == data.size() && K.cols() == data.size(),
          "Gram matrix size does not match dataset");
}

TrainedModel solve_dual_model(const Dataset& data, const DualQP& qp, Variant variant,
                              const KernelSpec& kernel, double C,
                              const SolverOptions& options) {
  const QPSolution sol = solve_smo(qp, options.smo);
  if (!sol.converged) {
    throw SolverError(to_string(variant) + ": SMO did not converge (KKT gap " +
                      sci(sol.kkt_residual) + ")");
  }
  TrainedModel m;
  m.variant = variant;
  m.kernel = kernel;
  m.train = data;
  m.alpha = sol.alpha;
  m.beta0 = kkt_intercept(qp, sol.alpha);
  m.hyper["C"] = C;
  if (kernel.kind == KernelSpec::Kind::RBF) m.hyper["gamma"] = kernel.gamma;
  return m;
}

}  // namespace

Matrix label_gram(const Vector& y, const Matrix& K) {
  return y.asDiagonal() * K * y.asDiagonal();
}

DualQP build_csvm_dual(const Vector& y, const Matrix& K, double C) {
  check_cost(C);
  const Index n = y.size();
  DualQP qp;
  qp.Q = label_gram(y, K);
  qp.R = Vector::Ones(n);
  qp.D = 0.0;
  qp.y = y;
  qp.lower = Vector::Zero(n);
  qp.upper = Vector::Constant(n, C);
  return qp;
}

DualQP build_lssvm_dual(const Vector& y, const Matrix& K, double C) {
  check_cost(C);
  const Index n = y.size();
  DualQP qp;
  qp.Q = label_gram(y, K);
  qp.Q.diagonal().array() += 1.0 / (2.0 * C);
  qp.R = Vector::Ones(n);
  qp.D = 0.0;
  qp.y = y;
  qp.lower = Vector::Zero(n);
  qp.upper = Vector::Constant(n, kInf);
  return qp;
}

TrainedModel fit_csvm(const Dataset& data, double C, const KernelSpec& kernel,
                      const SolverOptions& options) {
  data.require_trainable();
  return fit_csvm(data, compute_gram(kernel, data.features()), C, kernel, options);
}

TrainedModel fit_csvm(const Dataset& data, const Matrix& K, double C,
                      const KernelSpec& kernel, const SolverOptions& options) {
  data.require_trainable();
  check_gram(data, K);
  return solve_dual_model(data, build_csvm_dual(data.labels(), K, C), Variant::CSVM,
                          kernel, C, options);
}

TrainedModel fit_lssvm(const Dataset& data, double C, const KernelSpec& kernel,
                       const SolverOptions& options) {
  data.require_trainable();
  return fit_lssvm(data, compute_gram(kernel, data.features()), C, kernel, options);
}

TrainedModel fit_lssvm(const Dataset& data, const Matrix& K, double C,
                       const KernelSpec& kernel, const SolverOptions& options) {
  data.require_trainable();
  check_gram(data, K);
  return solve_dual_model(data, build_lssvm_dual(data.labels(), K, C), Variant::LSSVM,
                          kernel, C, options);
}

double linex_loss(double z, double a) {
  const double s = a * (1.0 - z);
  return std::expm1(s) - s;
}

double linex_derivative(double z, double a) {
  return -a * std::expm1(a * (1.0 - z));
}

double linex_second_derivative(double z, double a) {
  return a * a * std::exp(a * (1.0 - z));
}

Matrix linex_features(const Dataset& data, const Matrix& K, const KernelSpec& kernel) {
  check_gram(data, K);
  if (kernel.kind == KernelSpec::Kind::Linear && data.dim() <= data.size()) {
    return data.features();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
  const Vector& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  Index r = 0;
  for (Index k = 0; k < lam.size(); ++k) {
    if (lam[k] > cutoff) ++r;
  }
  Matrix phi(K.rows(), r);
  Index col = 0;
  for (Index k = 0; k < lam.size(); ++k) {
    if (lam[k] > cutoff) phi.col(col++) = eig.eigenvectors().col(k) * std::sqrt(lam[k]);
  }
  return phi;
}

TrainedModel fit_linexsvm(const Dataset& data, double C, double a,
                          const KernelSpec& kernel, const SolverOptions& options) {
  data.require_trainable();
  const Matrix K = compute_gram(kernel, data.features());
  return fit_linexsvm(data, K, linex_features(data, K, kernel), C, a, kernel, options);
}

TrainedModel fit_linexsvm(const Dataset& data, const Matrix& K, const Matrix& features,
                          double C, double a, const KernelSpec& kernel,
                          const SolverOptions& options, Vector* warm) {
  data.require_trainable();
  check_cost(C);
  check_gram(data, K);
  require(std::isfinite(a) && a != 0.0, "LINEX parameter a must be nonzero and finite");
  require(features.rows() == data.size(), "LINEX features row count mismatch");

  constexpr double kMaxExponent = 700.0;
  const Vector& y = data.labels();
  const Matrix& phi = features;
  const Index r = phi.cols();
  const Index n = data.size();

  Vector theta = Vector::Zero(r + 1);
  if (warm != nullptr && warm->size() == r + 1 && warm->allFinite()) theta = *warm;

  auto margins = [&](const Vector& th) -> Vector {
    return y.cwiseProduct(((phi * th.head(r)).array() + th[r]).matrix());
  };
  // Objective, or +inf if some exponent exceeds the overflow guard.
  auto objective = [&](const Vector& th, const Vector& z) {
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (a * (1.0 - z[i]) > kMaxExponent) return kInf;
      loss += linex_loss(z[i], a);
    }
    return 0.5 * th.head(r).squaredNorm() + C * loss;
  };

  Vector z = margins(theta);
  double f = objective(theta, z);
  if (!std::isfinite(f)) {
    theta.setZero();
    z = margins(theta);
    f = objective(theta, z);
  }

  const Vector row_norms = phi.rowwise().norm();
  Vector d1(n);
  Vector d2(n);
  // Gradient at (th, z) and the tolerance it is compared against. The
  // tolerance is relative to the magnitude of the summed gradient terms, so
  // that the rounding floor of large-C or outlying data is never demanded.
  auto gradient = [&](const Vector& th, const Vector& zz, double& tol) {
    for (Index i = 0; i < n; ++i) d1[i] = linex_derivative(zz[i], a);
    Vector g(r + 1);
    g.head(r) = th.head(r) + C * phi.transpose() * y.cwiseProduct(d1);
    g[r] = C * y.dot(d1);
    const double scale =
        th.head(r).norm() + C * (d1.array().abs() * (row_norms.array() + 1.0)).sum();
    tol = options.linex_tol * (1.0 + scale);
    return g;
  };

  bool converged = false;
  double grad_tol = options.linex_tol;
  Vector g = gradient(theta, z, grad_tol);
  double grad_norm = g.norm();
  for (std::size_t it = 0; it < options.linex_max_iter; ++it) {
    if (grad_norm <= grad_tol) {
      converged = true;
      break;
    }
    for (Index i = 0; i < n; ++i) d2[i] = linex_second_derivative(z[i], a);

    Matrix H(r + 1, r + 1);
    H.topLeftCorner(r, r) = C * phi.transpose() * d2.asDiagonal() * phi;
    H.topLeftCorner(r, r).diagonal().array() += 1.0;
    H.topRightCorner(r, 1) = C * phi.transpose() * d2;
    H.bottomLeftCorner(1, r) = H.topRightCorner(r, 1).transpose();
    H(r, r) = C * d2.sum();
    const Eigen::LDLT<Matrix> ldlt(H);
    Vector step = -ldlt.solve(g);
    double slope = g.dot(step);
    const bool newton = step.allFinite() && slope < 0.0;
    if (!newton) {
      step = -g;
      slope = -g.squaredNorm();
    }

    // Predicted decrease below what the objective can resolve: judge the
    // full Newton step by the gradient norm instead.
    if (newton && -slope <= 1e-11 * (1.0 + std::abs(f))) {
      const Vector trial = theta + step;
      const Vector zt = margins(trial);
      double tol_t = grad_tol;
      const Vector gt = gradient(trial, zt, tol_t);
      if (std::isfinite(objective(trial, zt)) && gt.norm() < grad_norm) {
        theta = trial;
        z = zt;
        f = objective(theta, z);
        g = gt;
        grad_norm = g.norm();
        grad_tol = tol_t;
        continue;
      }
      converged = grad_norm <= 1e3 * grad_tol;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Vector trial = theta + t * step;
      const Vector zt = margins(trial);
      const double ft = objective(trial, zt);
      if (ft < f && ft <= f + 1e-4 * t * slope) {
        theta = trial;
        z = zt;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (grad_norm <= 1e3 * grad_tol) {
        converged = true;
        break;
      }
      throw SolverError("linexsvm: line search failed (gradient norm " +
                        sci(grad_norm) + ")");
    }
    g = gradient(theta, z, grad_tol);
    grad_norm = g.norm();
  }
  if (!converged) {
    throw SolverError("linexsvm: no convergence (gradient norm " +
                      sci(grad_norm) + ")");
  }
  if (warm != nullptr) *warm = theta;

  TrainedModel m;
  m.variant = Variant::LINEXSVM;
  m.kernel = kernel;
  m.train = data;
  m.alpha.resize(n);
  for (Index i = 0; i < n; ++i) m.alpha[i] = -C * linex_derivative(z[i], a);
  m.beta0 = theta[r];
  m.hyper["C"] = C;
  m.hyper["a"] = a;
  if (kernel.kind == KernelSpec::Kind::RBF) m.hyper["gamma"] = kernel.gamma;
  return m;
}

Vector margin_deviations(const TrainedModel& model, const Matrix& K) {
  const Vector f = training_decision_values(model, K);
  return (1.0 - model.train.labels().cwiseProduct(f).array()).matrix();
}

Vector margin_deviations(const TrainedModel& model) {
  require(model.fitted(), "margin_deviations: model not fitted");
  return margin_deviations(model, compute_gram(model.kernel, model.train.features()));
}

Vector extract_slacks(const TrainedModel& model, const Matrix& K) {
  return margin_deviations(model, K).array().max(0.0).matrix();
}

Vector extract_slacks(const TrainedModel& model) {
  require(model.fitted(), "extract_slacks: model not fitted");
  return extract_slacks(model, compute_gram(model.kernel, model.train.features()));
}

std::vector<Index> support_indices(const TrainedModel& model, const Matrix& K, double eps) {
  require(eps > 0.0, "support_indices: eps must be positive");
  require(model.fitted(), "support_indices: model not fitted");
  std::vector<Index> out;
  if (model.variant == Variant::LINEXSVM) {
    const Vector u = model.train.labels().cwiseProduct(training_decision_values(model, K));
    for (Index i = 0; i < u.size(); ++i) {
      if (u[i] <= 1.0 + eps) out.push_back(i);
    }
  } else {
    for (Index i = 0; i < model.alpha.size(); ++i) {
      if (model.alpha[i] > eps) out.push_back(i);
    }
  }
  return out;
}

std::vector<Index> support_indices(const TrainedModel& model, double eps) {
  require(model.fitted(), "support_indices: model not fitted");
  if (model.variant != Variant::LINEXSVM) {
    return support_indices(model, Matrix(), eps);
  }
  return support_indices(model, compute_gram(model.kernel, model.train.features()), eps);
}

double rkhs_norm_sq(const TrainedModel& model, const Matrix& K) {
  require(model.fitted(), "rkhs_norm_sq: model not fitted");
  const Vector coef = model.alpha.cwiseProduct(model.train.labels());
  return std::max(coef.dot(K * coef), 0.0);
}

double rkhs_norm_sq(const TrainedModel& model) {
  require(model.fitted(), "rkhs_norm_sq: model not fitted");
  return rkhs_norm_sq(model, compute_gram(model.kernel, model.train.features()));
}

}  // namespace edsvm
