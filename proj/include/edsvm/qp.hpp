#pragma once

#include "edsvm/kernel.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace edsvm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dual problem shared by every model in the library:
///
///   max_a  -1/2 a'Qa + R'a + D + sum_i 1/2 w_i (k_i - a_i)_+^2
///   s.t.   y'a = 0,  lower <= a <= upper
///
/// The last sum is the optional "floor" term. It appears when the multiplier
/// of a slack nonnegativity constraint is eliminated in closed form: below
/// its floor point k_i the coordinate's separable part becomes linear. With
/// floor_point empty (or every k_i <= lower_i) this is a plain QP.
struct DualQP {
  Matrix Q;
  Vector R;
  double D = 0.0;
  Vector y;
  Vector lower;
  Vector upper;
  Vector floor_point;
  Vector floor_weight;

  Index size() const { return R.size(); }
  bool has_floor() const { return floor_point.size() > 0; }

  /// Throws InvalidArgument when shapes, bounds or the strict-concavity
  /// requirement on unbounded coordinates are violated.
  void validate() const;

  double objective(const Vector& alpha) const;
  Vector gradient(const Vector& alpha) const;
};

struct QPSolution {
  Vector alpha;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SmoOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10'000'000;
  // Pick the second index by largest guaranteed ascent (second-order
  // selection) instead of smallest gradient; the stopping test is the
  // maximal violating pair gap either way.
  bool second_order = true;
  // Periodically remove bound coordinates that cannot violate the KKT
  // conditions from the selection scans; the final test uses all of them.
  bool shrinking = true;
  // Periodically take an exact Newton step on the free coordinates (at most
  // 256 of them); SMO alone zigzags on ill-conditioned free blocks.
  bool free_block_newton = true;
};

/// Generalized SMO. Returns the last iterate with converged == false if
/// max_iter is reached.
QPSolution solve_smo(const DualQP& qp, const SmoOptions& options = {});

struct ReferenceOptions {
  double tol = 1e-13;
  std::size_t max_iter = 5'000'000;
};

/// Dense accelerated projected-gradient ascent with exact projection onto
/// {y'a = 0, lower <= a <= upper}. Independent of the SMO code path; meant
/// as a test oracle for n <= 200. Throws SolverError on non-convergence.
QPSolution solve_reference(const DualQP& qp, const ReferenceOptions& options = {});

/// Euclidean projection onto {y'a = 0, lower <= a <= upper}.
Vector project_feasible(const Vector& z, const Vector& y, const Vector& lower,
                        const Vector& upper);

/// Maximal violating-pair gap  max_{I_up} y_i g_i - min_{I_low} y_j g_j,
/// clamped at zero. Throws InvalidArgument when alpha is infeasible.
double kkt_report(const DualQP& qp, const Vector& alpha);

/// Interval [lo, hi] of multipliers b consistent with the KKT inequalities
/// (b plays the role of the intercept for the SVM duals in this library).
struct KktInterval {
  double lo = -kInf;
  double hi = kInf;
};
KktInterval kkt_interval(const DualQP& qp, const Vector& alpha);

/// Intercept b from a converged alpha: the mean of y_i g_i over free
/// coordinates (lower + tau < alpha_i < upper - tau), restricted to
/// `preferred` when that subset has free coordinates. Without free
/// coordinates, the midpoint of kkt_interval (or its finite end). Throws
/// SolverError when the interval is empty beyond `interval_tol`.
double kkt_intercept(const DualQP& qp, const Vector& alpha,
                     const std::vector<bool>& preferred = {},
                     double free_tol = 1e-6, double interval_tol = 1e-4);

}  // namespace edsvm
