#include "edsvm/calibration.hpp"

#include "edsvm/error.hpp"

#include <algorithm>
#include <cmath>

namespace edsvm {
namespace {

void check_omega(double omega) {
  require(std::isfinite(omega) && omega > 0.0 && omega < 1.0,
          "calibration: omega must lie in (0, 1)");
}

void check_variant(Variant v) {
  require(v == Variant::CEDSVM || v == Variant::LSEDSVM,
          "calibration: variant must be cedsvm or lsedsvm");
}

// Unconstrained minimizer of the elite penalty g.
double xi_bar(Variant v, double xi_star, double omega) {
  return v == Variant::CEDSVM ? xi_star - omega / (2.0 * (1.0 - omega))
                              : (1.0 - omega) * xi_star;
}

// g'(1) for the variant.
double g_prime_at_one(Variant v, double xi_star, double omega) {
  return v == Variant::CEDSVM ? omega + 2.0 * (1.0 - omega) * (1.0 - xi_star)
                              : 2.0 * omega + 2.0 * (1.0 - omega) * (1.0 - xi_star);
}

}  // namespace

double induced_loss_cedsvm(double u, double xi_star, double omega) {
  check_omega(omega);
  const double xi = std::max({0.0, 1.0 - u, xi_bar(Variant::CEDSVM, xi_star, omega)});
  const double dev = xi - xi_star;
  return omega * xi + (1.0 - omega) * dev * dev;
}

double induced_loss_lsedsvm(double u, double xi_star, double omega) {
  check_omega(omega);
  const double xi = std::max({0.0, 1.0 - u, xi_bar(Variant::LSEDSVM, xi_star, omega)});
  const double dev = xi - xi_star;
  return omega * xi * xi + (1.0 - omega) * dev * dev;
}

double nonelite_loss_cedsvm(double u, double omega) {
  return omega * std::max(0.0, 1.0 - u);
}

double nonelite_loss_lsedsvm(double u, double omega) {
  const double h = std::max(0.0, 1.0 - u);
  return omega * h * h;
}

PhiPrime phi_prime_at_zero(Variant variant, double xi_star, double omega) {
  check_variant(variant);
  check_omega(omega);
  // Near u = 0 the active slack is 1 - u unless xi_bar dominates, in which
  // case the loss is locally constant.
  const double bar = xi_bar(variant, xi_star, omega);
  const double active = -g_prime_at_one(variant, xi_star, omega);
  PhiPrime p;
  if (bar < 1.0) {
    p.value = p.left = p.right = active;
  } else if (bar > 1.0) {
    p.value = p.left = p.right = 0.0;
  } else {
    p.kink = true;
    p.left = active;
    p.right = 0.0;
    p.value = p.right;
  }
  return p;
}

double calibration_threshold(Variant variant, double omega) {
  check_variant(variant);
  check_omega(omega);
  return variant == Variant::CEDSVM ? 1.0 + omega / (2.0 * (1.0 - omega))
                                    : 1.0 / (1.0 - omega);
}

CalibrationReport check_calibration(const EliteGuide& guide, double omega, Variant variant) {
  CalibrationReport r;
  r.variant = variant;
  r.omega = omega;
  r.threshold = calibration_threshold(variant, omega);
  for (Index k = 0; k < guide.size(); ++k) {
    CalibrationEntry e;
    e.index = guide.elite[static_cast<std::size_t>(k)];
    e.xi_star = guide.targets[k];
    e.satisfied = e.xi_star < r.threshold;
    const PhiPrime p = phi_prime_at_zero(variant, e.xi_star, omega);
    e.phi_prime_at_zero = p.value;
    e.kink = p.kink;
    e.left_derivative = p.left;
    e.right_derivative = p.right;
    r.all_satisfied = r.all_satisfied && e.satisfied;
    r.entries.push_back(e);
  }
  return r;
}

}  // namespace edsvm
