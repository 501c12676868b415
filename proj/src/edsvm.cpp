#include "edsvm/edsvm.hpp"

#include "edsvm/error.hpp"

#include <cmath>

namespace edsvm {
namespace {

std::vector<bool> elite_mask(Index n, const EliteGuide& guide) {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (Index i : guide.elite) mask[static_cast<std::size_t>(i)] = true;
  return mask;
}

void check_inputs(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg) {
  data.require_trainable();
  cfg.validate(data.size());
  require(K.rows() == data.size() && K.cols() == data.size(),
          "edsvm: Gram matrix size does not match dataset");
}

}  // namespace

void EDSVMConfig::validate(Index n) const {
  require(variant == Variant::CEDSVM || variant == Variant::LSEDSVM,
          "edsvm: variant must be cedsvm or lsedsvm");
  require(std::isfinite(C) && C > 0.0, "edsvm: C must be positive and finite");
  require(std::isfinite(omega) && omega > 0.0 && omega <= 1.0,
          "edsvm: omega must lie in (0, 1]");
  kernel.validate();
  guide.validate(n);
}

DualQP build_cedsvm_dual(const Dataset& data, const EDSVMConfig& cfg) {
  return build_cedsvm_dual(data, compute_gram(cfg.kernel, data.features()), cfg);
}

DualQP build_cedsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg) {
  check_inputs(data, K, cfg);
  require(cfg.variant == Variant::CEDSVM, "build_cedsvm_dual: variant must be cedsvm");
  require(cfg.omega < 1.0, "build_cedsvm_dual: omega must lie in (0, 1)");

  const Index n = data.size();
  const double C = cfg.C;
  const double w = cfg.omega;
  const double d = 1.0 / (2.0 * C * (1.0 - w));
  const double shift = w / (2.0 * (1.0 - w));

  DualQP qp;
  qp.Q = label_gram(data.labels(), K);
  qp.R = Vector::Ones(n);
  qp.y = data.labels();
  qp.lower = Vector::Zero(n);
  qp.upper = Vector::Constant(n, C * w);
  qp.floor_point = Vector::Zero(n);
  qp.floor_weight = Vector::Zero(n);

  double sum_targets = 0.0;
  bool any_floor = false;
  for (Index k = 0; k < cfg.guide.size(); ++k) {
    const Index i = cfg.guide.elite[static_cast<std::size_t>(k)];
    const double xs = cfg.guide.targets[k];
    qp.Q(i, i) += d;
    qp.R[i] = 1.0 - xs + shift;
    qp.upper[i] = kInf;
    const double kappa = C * w - 2.0 * C * (1.0 - w) * xs;
    if (kappa > 0.0) {
      qp.floor_point[i] = kappa;
      qp.floor_weight[i] = d;
      any_floor = true;
    }
    sum_targets += xs;
  }
  const double m = static_cast<double>(cfg.guide.size());
  qp.D = -m * C * w * w / (4.0 * (1.0 - w)) + C * w * sum_targets;
  if (!any_floor) {
    qp.floor_point.resize(0);
    qp.floor_weight.resize(0);
  }
  return qp;
}

DualQP build_lsedsvm_dual(const Dataset& data, const EDSVMConfig& cfg) {
  return build_lsedsvm_dual(data, compute_gram(cfg.kernel, data.features()), cfg);
}

DualQP build_lsedsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg) {
  check_inputs(data, K, cfg);
  require(cfg.variant == Variant::LSEDSVM, "build_lsedsvm_dual: variant must be lsedsvm");

  const Index n = data.size();
  const double C = cfg.C;
  const double w = cfg.omega;

  DualQP qp;
  Vector diag = Vector::Constant(n, 1.0 / (2.0 * C * w));
  for (Index i : cfg.guide.elite) diag[i] = 1.0 / (2.0 * C);
  qp.Q = label_gram(data.labels(), K);
  qp.Q.diagonal() += diag;
  qp.R = Vector::Ones(n);
  qp.y = data.labels();
  qp.lower = Vector::Zero(n);
  qp.upper = Vector::Constant(n, kInf);

  double sum_sq = 0.0;
  for (Index k = 0; k < cfg.guide.size(); ++k) {
    const Index i = cfg.guide.elite[static_cast<std::size_t>(k)];
    const double xs = cfg.guide.targets[k];
    qp.R[i] = 1.0 - (1.0 - w) * xs;
    sum_sq += xs * xs;
  }
  qp.D = C * w * (1.0 - w) * sum_sq;
  return qp;
}

DualQP build_edsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg) {
  check_inputs(data, K, cfg);
  if (cfg.variant == Variant::CEDSVM) {
    if (cfg.omega == 1.0) return build_csvm_dual(data.labels(), K, cfg.C);
    return build_cedsvm_dual(data, K, cfg);
  }
  return build_lsedsvm_dual(data, K, cfg);
}

TrainedModel fit_edsvm(const Dataset& data, const EDSVMConfig& cfg,
                       const SolverOptions& options) {
  return fit_edsvm(data, compute_gram(cfg.kernel, data.features()), cfg, options);
}

TrainedModel fit_edsvm(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                       const SolverOptions& options) {
  check_inputs(data, K, cfg);
  TrainedModel m;
  if (cfg.variant == Variant::CEDSVM && cfg.omega == 1.0) {
    m = fit_csvm(data, K, cfg.C, cfg.kernel, options);
  } else {
    const DualQP qp = build_edsvm_dual(data, K, cfg);
    const QPSolution sol = solve_smo(qp, options.smo);
    if (!sol.converged) {
      throw SolverError(to_string(cfg.variant) + ": SMO did not converge (KKT gap " +
                        sci(sol.kkt_residual) + ")");
    }
    m.kernel = cfg.kernel;
    m.train = data;
    m.alpha = sol.alpha;
    m.beta0 = recover_intercept(qp, sol.alpha, data, cfg);
    m.hyper["C"] = cfg.C;
    if (cfg.kernel.kind == KernelSpec::Kind::RBF) m.hyper["gamma"] = cfg.kernel.gamma;
  }
  m.variant = cfg.variant;
  m.hyper["omega"] = cfg.omega;
  m.guide = cfg.guide;
  return m;
}

double recover_intercept(const DualQP& qp, const Vector& alpha, const Dataset& data,
                         const EDSVMConfig& cfg) {
  require(alpha.size() == data.size() && qp.size() == data.size(),
          "recover_intercept: size mismatch");
  std::vector<bool> non_elite = elite_mask(data.size(), cfg.guide);
  non_elite.flip();
  return kkt_intercept(qp, alpha, non_elite);
}

double cedsvm_elite_slack(double alpha, double xi_star, double C, double omega) {
  const double xi = xi_star + (alpha / C - omega) / (2.0 * (1.0 - omega));
  return xi > 0.0 ? xi : 0.0;
}

double lsedsvm_elite_slack(double alpha, double xi_star, double C, double omega) {
  return alpha / (2.0 * C) + (1.0 - omega) * xi_star;
}

double lsedsvm_nonelite_slack(double alpha, double C, double omega) {
  return alpha / (2.0 * C * omega);
}

Vector reconstruct_slacks(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                          const Vector& alpha, double beta0) {
  check_inputs(data, K, cfg);
  const Index n = data.size();
  const Vector& y = data.labels();
  const Vector f = (K * alpha.cwiseProduct(y)).array() + beta0;
  Vector xi(n);
  if (cfg.variant == Variant::CEDSVM) {
    for (Index i = 0; i < n; ++i) xi[i] = std::max(0.0, 1.0 - y[i] * f[i]);
    if (cfg.omega < 1.0) {
      for (Index k = 0; k < cfg.guide.size(); ++k) {
        const Index i = cfg.guide.elite[static_cast<std::size_t>(k)];
        xi[i] = cedsvm_elite_slack(alpha[i], cfg.guide.targets[k], cfg.C, cfg.omega);
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) xi[i] = lsedsvm_nonelite_slack(alpha[i], cfg.C, cfg.omega);
    for (Index k = 0; k < cfg.guide.size(); ++k) {
      const Index i = cfg.guide.elite[static_cast<std::size_t>(k)];
      xi[i] = lsedsvm_elite_slack(alpha[i], cfg.guide.targets[k], cfg.C, cfg.omega);
    }
  }
  return xi;
}

double primal_objective(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                        const Vector& alpha, double beta0) {
  check_inputs(data, K, cfg);
  const Index n = data.size();
  const Vector& y = data.labels();
  const Vector coef = alpha.cwiseProduct(y);
  const Vector Kc = K * coef;
  const double norm_sq = std::max(coef.dot(Kc), 0.0);
  const double C = cfg.C;
  const double w = cfg.omega;
  const std::vector<bool> is_elite = elite_mask(n, cfg.guide);

  Vector target = Vector::Zero(n);
  for (Index k = 0; k < cfg.guide.size(); ++k) {
    target[cfg.guide.elite[static_cast<std::size_t>(k)]] = cfg.guide.targets[k];
  }

  double risk = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double hinge = std::max(0.0, 1.0 - y[i] * (Kc[i] + beta0));
    const bool elite = is_elite[static_cast<std::size_t>(i)] && w < 1.0;
    if (cfg.variant == Variant::CEDSVM) {
      if (elite) {
        const double xi = std::max(hinge, target[i] - w / (2.0 * (1.0 - w)));
        const double dev = xi - target[i];
        risk += w * xi + (1.0 - w) * dev * dev;
      } else {
        risk += w * hinge;
      }
    } else {
      if (elite) {
        const double xi = std::max(hinge, (1.0 - w) * target[i]);
        const double dev = xi - target[i];
        risk += w * xi * xi + (1.0 - w) * dev * dev;
      } else {
        risk += w * hinge * hinge;
      }
    }
  }
  return 0.5 * norm_sq + C * risk;
}

DualityGap duality_gap(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                       const Vector& alpha, double beta0) {
  DualityGap g;
  g.primal = primal_objective(data, K, cfg, alpha, beta0);
  g.dual = build_edsvm_dual(data, K, cfg).objective(alpha);
  g.gap = g.primal - g.dual;
  g.relative = g.gap / (1.0 + std::abs(g.primal));
  return g;
}

double elite_deviation(const Vector& slacks, const EliteGuide& guide) {
  guide.validate(slacks.size());
  double sum = 0.0;
  for (Index k = 0; k < guide.size(); ++k) {
    const double dev = slacks[guide.elite[static_cast<std::size_t>(k)]] - guide.targets[k];
    sum += dev * dev;
  }
  return sum;
}

}  // namespace edsvm
