#include "edsvm/diagnostics.hpp"

#include "edsvm/baselines.hpp"
#include "edsvm/error.hpp"

#include <cmath>

namespace edsvm {

double benchmark_quality(const Vector& reference_slacks, const EliteGuide& guide) {
  require(!guide.empty(), "benchmark_quality: elite set is empty");
  guide.validate(reference_slacks.size());
  double sum = 0.0;
  for (Index k = 0; k < guide.size(); ++k) {
    const double dev = reference_slacks[guide.elite[static_cast<std::size_t>(k)]] -
                       guide.targets[k];
    sum += dev * dev;
  }
  return sum / static_cast<double>(guide.size());
}

double benchmark_quality(const TrainedModel& reference, const EliteGuide& guide) {
  require(reference.fitted(), "benchmark_quality: reference not fitted");
  return benchmark_quality(extract_slacks(reference), guide);
}

double usefulness_ratio(Index m, double e, Index n, double risk) {
  const double num = static_cast<double>(m) * e;
  const double den = static_cast<double>(n) * risk;
  if (den == 0.0) return num > 0.0 ? kInf : 0.0;
  return num / den;
}

std::string recommendation_for(double ratio) {
  if (ratio < 1.0) return "benchmark likely useful, consider small omega";
  return "keep omega near 1";
}

DiagnosticsReport radii_report(const TrainedModel& reference, const EliteGuide& guide,
                               double C, double omega, Variant variant,
                               const TrainedModel* ls_reference) {
  require(reference.fitted(), "radii_report: reference not fitted");
  require(std::isfinite(C) && C > 0.0, "radii_report: C must be positive");
  require(std::isfinite(omega) && omega > 0.0 && omega <= 1.0,
          "radii_report: omega must lie in (0, 1]");
  require(variant == Variant::CEDSVM || variant == Variant::LSEDSVM,
          "radii_report: variant must be cedsvm or lsedsvm");
  const TrainedModel& ls_ref = ls_reference != nullptr ? *ls_reference : reference;
  require(ls_ref.fitted(), "radii_report: LS reference not fitted");
  require(ls_ref.train == reference.train, "radii_report: references use different data");

  const Index n = reference.train.size();
  guide.validate(n);

  DiagnosticsReport r;
  r.variant = variant;
  r.C = C;
  r.omega = omega;
  r.n = n;
  r.m = guide.size();

  const Matrix K = compute_gram(reference.kernel, reference.train.features());
  const Vector xi = extract_slacks(reference, K);
  r.norm_sq_ref = rkhs_norm_sq(reference, K);
  r.hinge_risk_ref = xi.mean();

  Vector xi_ls = xi;
  r.norm_sq_ref_ls = r.norm_sq_ref;
  if (&ls_ref != &reference) {
    const Matrix Kls = ls_ref.kernel == reference.kernel
                           ? K
                           : compute_gram(ls_ref.kernel, ls_ref.train.features());
    xi_ls = extract_slacks(ls_ref, Kls);
    r.norm_sq_ref_ls = rkhs_norm_sq(ls_ref, Kls);
  }
  r.ls_risk_ref = xi_ls.squaredNorm() / static_cast<double>(n);

  r.e_m_star = guide.empty() ? 0.0 : benchmark_quality(xi, guide);
  r.e_m_star_ls = guide.empty() ? 0.0 : benchmark_quality(xi_ls, guide);

  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(r.m);
  r.lambda_n_sq = r.norm_sq_ref + 2.0 * C * nn * omega * r.hinge_risk_ref +
                  2.0 * C * mm * (1.0 - omega) * r.e_m_star;
  r.lambda_svm_sq = r.norm_sq_ref + 2.0 * C * nn * r.hinge_risk_ref;
  r.gamma_ls = r.norm_sq_ref_ls + 2.0 * C * nn * omega * r.ls_risk_ref +
               2.0 * C * mm * (1.0 - omega) * r.e_m_star_ls;
  r.gamma_ls_svm = r.norm_sq_ref_ls + 2.0 * C * nn * r.ls_risk_ref;

  r.ratio = usefulness_ratio(r.m, r.e_m_star, n, r.hinge_risk_ref);
  r.ratio_ls = usefulness_ratio(r.m, r.e_m_star_ls, n, r.ls_risk_ref);
  r.recommendation =
      recommendation_for(variant == Variant::CEDSVM ? r.ratio : r.ratio_ls);
  if (omega < 1.0) r.calibration = check_calibration(guide, omega, variant);
  return r;
}

}  // namespace edsvm
