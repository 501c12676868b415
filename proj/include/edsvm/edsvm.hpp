#pragma once

#include "edsvm/baselines.hpp"
#include "edsvm/model.hpp"
#include "edsvm/qp.hpp"

namespace edsvm {

struct EDSVMConfig {
  Variant variant = Variant::CEDSVM;
  double C = 1.0;
  double omega = 1.0;
  EliteGuide guide;
  KernelSpec kernel;

  /// CEDSVM: omega in (0, 1]; LSEDSVM: omega in (0, 1]; C > 0; guide valid for n.
  void validate(Index n) const;
};

/// C-EDSVM dual for omega in (0, 1). Elite i: d_i = 1/(2C(1-w)),
/// R_i = 1 - xi*_i + w/(2(1-w)), alpha_i in [0, inf), floor point
/// Cw - 2C(1-w) xi*_i with weight d_i. Non-elite: d_i = 0, R_i = 1,
/// alpha_i in [0, Cw]. D = -m C w^2 / (4(1-w)) + C w sum xi*.
DualQP build_cedsvm_dual(const Dataset& data, const EDSVMConfig& cfg);
DualQP build_cedsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg);

/// LS-EDSVM dual for omega in (0, 1]. Elite i: d_i = 1/(2C),
/// R_i = 1 - (1-w) xi*_i; non-elite: d_i = 1/(2Cw), R_i = 1; all alpha_i >= 0.
/// D = C w (1-w) sum xi*^2.
DualQP build_lsedsvm_dual(const Dataset& data, const EDSVMConfig& cfg);
DualQP build_lsedsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg);

/// Variant dispatch; C-EDSVM at omega = 1 yields the plain hinge dual.
DualQP build_edsvm_dual(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg);

TrainedModel fit_edsvm(const Dataset& data, const EDSVMConfig& cfg,
                       const SolverOptions& options = {});
TrainedModel fit_edsvm(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                       const SolverOptions& options = {});

/// Intercept from the KKT conditions: mean over free non-elite points, then
/// over any free point, then the midpoint of the feasible interval.
double recover_intercept(const DualQP& qp, const Vector& alpha, const Dataset& data,
                         const EDSVMConfig& cfg);

/// Slack of one elite point from its multiplier (stationarity in xi).
double cedsvm_elite_slack(double alpha, double xi_star, double C, double omega);
double lsedsvm_elite_slack(double alpha, double xi_star, double C, double omega);
double lsedsvm_nonelite_slack(double alpha, double C, double omega);

/// Slacks reconstructed from alpha (elite points, and all points for
/// LS-EDSVM) or from the hinge of the margin (non-elite C-EDSVM points).
Vector reconstruct_slacks(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                          const Vector& alpha, double beta0);

/// Primal objective at the given (alpha, beta0) with every slack set to its
/// optimal value for the induced margins.
double primal_objective(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                        const Vector& alpha, double beta0);

struct DualityGap {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double relative = 0.0;  // gap / (1 + |primal|)
};

DualityGap duality_gap(const Dataset& data, const Matrix& K, const EDSVMConfig& cfg,
                       const Vector& alpha, double beta0);

/// Sum of squared deviations between slacks and targets on the elite set.
double elite_deviation(const Vector& slacks, const EliteGuide& guide);

}  // namespace edsvm
