#pragma once

#include "edsvm/model.hpp"

#include <vector>

namespace edsvm {

/// Elite-point margin loss of C-EDSVM: g(xi) = w xi + (1-w)(xi - xi*)^2
/// evaluated at xi = max{0, 1 - u, xi* - w/(2(1-w))}.
double induced_loss_cedsvm(double u, double xi_star, double omega);

/// Elite-point margin loss of LS-EDSVM: g(xi) = w xi^2 + (1-w)(xi - xi*)^2
/// evaluated at xi = max{0, 1 - u, (1-w) xi*}.
double induced_loss_lsedsvm(double u, double xi_star, double omega);

/// Non-elite analogues: w (1-u)_+ and w (1-u)_+^2.
double nonelite_loss_cedsvm(double u, double omega);
double nonelite_loss_lsedsvm(double u, double omega);

/// Derivative of the elite loss at u = 0. When the constrained minimizer
/// xi_bar equals 1 exactly the point is reported as a kink with both
/// one-sided derivatives; `value` is then the right derivative.
struct PhiPrime {
  double value = 0.0;
  bool kink = false;
  double left = 0.0;
  double right = 0.0;
};

PhiPrime phi_prime_at_zero(Variant variant, double xi_star, double omega);

/// C-EDSVM: 1 + w/(2(1-w)); LS-EDSVM: 1/(1-w).
double calibration_threshold(Variant variant, double omega);

struct CalibrationEntry {
  Index index = 0;
  double xi_star = 0.0;
  bool satisfied = false;
  double phi_prime_at_zero = 0.0;
  bool kink = false;
  double left_derivative = 0.0;
  double right_derivative = 0.0;
};

struct CalibrationReport {
  Variant variant = Variant::CEDSVM;
  double omega = 0.0;
  double threshold = 0.0;
  bool all_satisfied = true;
  std::vector<CalibrationEntry> entries;
};

/// Per elite point: satisfied iff xi* < threshold (strict).
CalibrationReport check_calibration(const EliteGuide& guide, double omega, Variant variant);

}  // namespace edsvm
