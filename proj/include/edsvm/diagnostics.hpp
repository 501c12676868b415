#pragma once

#include "edsvm/calibration.hpp"
#include "edsvm/model.hpp"

#include <optional>
#include <string>

namespace edsvm {

/// (1/m) sum over the elite set of (xi_i(reference) - xi*_i)^2.
double benchmark_quality(const TrainedModel& reference, const EliteGuide& guide);
double benchmark_quality(const Vector& reference_slacks, const EliteGuide& guide);

/// Quantities of the empirical radius comparison between an EDSVM fit and
/// its benchmark-free counterpart, with the unknown comparator replaced by
/// a reference fit ("empirical comparator").
struct DiagnosticsReport {
  Variant variant = Variant::CEDSVM;
  double C = 0.0;
  double omega = 0.0;
  Index n = 0;
  Index m = 0;
  double norm_sq_ref = 0.0;     // ||f*||_K^2 of the hinge reference
  double norm_sq_ref_ls = 0.0;  // ||f*||_K^2 of the squared-hinge reference
  double hinge_risk_ref = 0.0;  // mean hinge loss of the reference
  double ls_risk_ref = 0.0;     // mean squared hinge loss of the LS reference
  double e_m_star = 0.0;
  double e_m_star_ls = 0.0;
  double lambda_n_sq = 0.0;
  double lambda_svm_sq = 0.0;
  double gamma_ls = 0.0;
  double gamma_ls_svm = 0.0;
  double ratio = 0.0;     // m E*_m / (n R_hinge)
  double ratio_ls = 0.0;  // m E*_m^LS / (n R_LS)
  std::string recommendation;
  std::optional<CalibrationReport> calibration;
};

/// m E / (n R) with +inf when only the denominator vanishes and 0 when both do.
double usefulness_ratio(Index m, double e, Index n, double risk);

/// Builds the report. The LS quantities use `ls_reference` when given and
/// `reference` otherwise. The recommendation follows the ratio of the
/// requested variant. Calibration is attached for omega in (0, 1).
DiagnosticsReport radii_report(const TrainedModel& reference, const EliteGuide& guide,
                               double C, double omega, Variant variant,
                               const TrainedModel* ls_reference = nullptr);

std::string recommendation_for(double ratio);

}  // namespace edsvm
