#include "edsvm/qp.hpp"

#include "edsvm/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>

namespace edsvm {
namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

// Membership in the two index sets of the maximal-violating-pair rule.
// "up": moving along +y_k keeps the coordinate feasible.
bool in_up(double y, double a, double lb, double ub) {
  return (y > 0.0 && a < ub) || (y < 0.0 && a > lb);
}
bool in_low(double y, double a, double lb, double ub) {
  return (y > 0.0 && a > lb) || (y < 0.0 && a < ub);
}

Vector feasible_start(const DualQP& qp) {
  Vector a = Vector::Zero(qp.size()).cwiseMax(qp.lower).cwiseMin(qp.upper);
  const double r = qp.y.dot(a);
  if (std::abs(r) > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("qp: clamp(0) is not feasible for y'a = 0");
  }
  return a;
}

// Exact ascent step on the block of free coordinates: solve the equality
// constrained Newton system restricted to them, then move as far as the
// bounds and floor breakpoints allow. Returns false when no ascent was made.
bool free_block_step(const DualQP& qp, Vector& alpha, Vector& glin, Index max_free,
                     Index& free_count) {
  const bool floor = qp.has_floor();
  std::vector<Index> free;
  for (Index k = 0; k < qp.size(); ++k) {
    if (alpha[k] > qp.lower[k] && alpha[k] < qp.upper[k]) free.push_back(k);
  }
  const Index m = static_cast<Index>(free.size());
  free_count = m;
  if (m < 2 || m > max_free) return false;

  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  Vector rhs = Vector::Zero(m + 1);
  Vector yf(m);
  for (Index a = 0; a < m; ++a) {
    const Index k = free[static_cast<std::size_t>(a)];
    for (Index b = 0; b < m; ++b) kkt(a, b) = qp.Q(k, free[static_cast<std::size_t>(b)]);
    double g = glin[k];
    if (floor && alpha[k] < qp.floor_point[k]) {
      kkt(a, a) -= qp.floor_weight[k];
      g -= qp.floor_weight[k] * (qp.floor_point[k] - alpha[k]);
    }
    yf[a] = qp.y[k];
    kkt(a, m) = yf[a];
    kkt(m, a) = yf[a];
    rhs[a] = g;
  }
  const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  const Vector residual = rhs - kkt * sol;
  // A residual means the block is flat along a feasible direction with
  // positive slope; follow it to the nearest bound instead.
  const bool flat = residual.norm() > 1e-10 * (1.0 + rhs.norm());
  Vector d = flat ? Vector(residual.head(m)) : Vector(sol.head(m));
  d -= yf * (yf.dot(d) / static_cast<double>(m));
  if (!d.allFinite()) return false;

  const Vector gf = rhs.head(m);
  const double slope = gf.dot(d);
  if (!(slope > 0.0)) return false;
  const double curv = d.dot(kkt.topLeftCorner(m, m) * d);

  double tmax = kInf;
  Index limit = -1;
  double limit_value = 0.0;
  auto cap = [&](double t, Index a, double value) {
    if (t < tmax) {
      tmax = t;
      limit = a;
      limit_value = value;
    }
  };
  for (Index a = 0; a < m; ++a) {
    const Index k = free[static_cast<std::size_t>(a)];
    if (d[a] > 0.0) cap((qp.upper[k] - alpha[k]) / d[a], a, qp.upper[k]);
    if (d[a] < 0.0) cap((alpha[k] - qp.lower[k]) / -d[a], a, qp.lower[k]);
    if (floor && qp.floor_weight[k] > 0.0) {
      const double fp = qp.floor_point[k];
      if (alpha[k] < fp && d[a] > 0.0) cap((fp - alpha[k]) / d[a], a, fp);
      if (alpha[k] > fp && d[a] < 0.0) cap((alpha[k] - fp) / -d[a], a, fp);
    }
  }
  double t = tmax;
  if (curv > 0.0 && slope / curv < tmax) {
    t = slope / curv;
    limit = -1;
  }
  if (!(t > 0.0) || !std::isfinite(t)) return false;

  for (Index a = 0; a < m; ++a) {
    const Index k = free[static_cast<std::size_t>(a)];
    const double next = a == limit ? limit_value
                                   : std::clamp(alpha[k] + t * d[a], qp.lower[k], qp.upper[k]);
    const double delta = next - alpha[k];
    alpha[k] = next;
    if (delta != 0.0) glin.noalias() -= qp.Q.col(k) * delta;
  }
  return true;
}

}  // namespace

void DualQP::validate() const {
  const Index n = size();
  require(n > 0, "qp: empty problem");
  require(Q.rows() == n && Q.cols() == n, "qp: Q must be n x n");
  require(y.size() == n && lower.size() == n && upper.size() == n,
          "qp: y/lower/upper length mismatch");
  require(floor_point.size() == 0 || floor_point.size() == n,
          "qp: floor_point length mismatch");
  require(floor_weight.size() == floor_point.size(),
          "qp: floor_weight length mismatch");
  require(Q.allFinite() && R.allFinite() && std::isfinite(D),
          "qp: non-finite Q, R or D");
  const double scale = 1.0 + Q.cwiseAbs().maxCoeff();
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "qp: Q is not symmetric");
  for (Index i = 0; i < n; ++i) {
    require(y[i] == 1.0 || y[i] == -1.0, "qp: y entries must be +-1");
    require(std::isfinite(lower[i]), "qp: lower bounds must be finite");
    require(lower[i] <= upper[i], "qp: lower bound exceeds upper bound");
    if (std::isinf(upper[i])) {
      require(Q(i, i) > 0.0, "qp: unbounded coordinate needs Q_ii > 0");
    }
    if (has_floor()) {
      require(std::isfinite(floor_weight[i]) && floor_weight[i] >= 0.0,
              "qp: floor weights must be finite and nonnegative");
      require(floor_weight[i] <= Q(i, i) * (1.0 + 1e-12),
              "qp: floor weight exceeds the diagonal (objective not concave)");
      require(!std::isnan(floor_point[i]), "qp: floor point is NaN");
    }
  }
}

double DualQP::objective(const Vector& alpha) const {
  double value = -0.5 * alpha.dot(Q * alpha) + R.dot(alpha) + D;
  if (has_floor()) {
    for (Index i = 0; i < size(); ++i) {
      const double s = pos(floor_point[i] - alpha[i]);
      value += 0.5 * floor_weight[i] * s * s;
    }
  }
  return value;
}

Vector DualQP::gradient(const Vector& alpha) const {
  Vector g = R - Q * alpha;
  if (has_floor()) {
    for (Index i = 0; i < size(); ++i) {
      g[i] -= floor_weight[i] * pos(floor_point[i] - alpha[i]);
    }
  }
  return g;
}

QPSolution solve_smo(const DualQP& qp, const SmoOptions& options) {
  qp.validate();
  require(options.tol > 0.0, "solve_smo: tol must be positive");

  const Index n = qp.size();
  const bool floor = qp.has_floor();
  const Vector& y = qp.y;
  const Vector& lb = qp.lower;
  const Vector& ub = qp.upper;

  Vector alpha = feasible_start(qp);
  Vector glin = qp.R - qp.Q * alpha;

  auto grad = [&](Index k) {
    double g = glin[k];
    if (floor) g -= qp.floor_weight[k] * pos(qp.floor_point[k] - alpha[k]);
    return g;
  };

  QPSolution sol;
  double gap = kInf;
  std::size_t iter = 0;
  std::vector<Index> active(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) active[static_cast<std::size_t>(k)] = k;
  const std::size_t shrink_every = static_cast<std::size_t>(std::min<Index>(n, 1000));
  bool unshrunk = false;
  // The block step costs about m^3 / 3 flops for m free coordinates; space
  // it so that it stays comparable to the O(n) selection scans in between.
  std::size_t next_block = 20;
  for (; iter < options.max_iter; ++iter) {
    Index i = -1;
    Index j = -1;
    double vmax = -kInf;
    double vmin = kInf;
    for (const Index k : active) {
      const double v = y[k] * grad(k);
      if (in_up(y[k], alpha[k], lb[k], ub[k]) && v > vmax) {
        vmax = v;
        i = k;
      }
      if (in_low(y[k], alpha[k], lb[k], ub[k]) && v < vmin) {
        vmin = v;
        j = k;
      }
    }
    gap = (i < 0 || j < 0) ? 0.0 : vmax - vmin;
    const bool shrunk = static_cast<Index>(active.size()) < n;
    if (shrunk && (gap <= options.tol || (!unshrunk && gap <= 10.0 * options.tol))) {
      // The gradient is kept exact for every coordinate, so restoring the
      // full working set only needs a fresh scan.
      unshrunk = true;
      active.resize(static_cast<std::size_t>(n));
      for (Index k = 0; k < n; ++k) active[static_cast<std::size_t>(k)] = k;
      --iter;
      continue;
    }
    if (i < 0 || j < 0) {
      gap = 0.0;
      break;
    }
    if (gap <= options.tol) break;

    if (options.free_block_newton && iter >= next_block) {
      Index m = 0;
      const bool moved = free_block_step(qp, alpha, glin, 256, m);
      next_block = iter + std::max<std::size_t>(
                              20, static_cast<std::size_t>(m * m * m / (3 * n)));
      if (moved) continue;
    }
    if (options.shrinking && iter > 0 && iter % shrink_every == 0) {
      // Drop bound coordinates that cannot join a violating pair given the
      // current extremes.
      std::erase_if(active, [&](Index k) {
        const bool up = in_up(y[k], alpha[k], lb[k], ub[k]);
        const bool low = in_low(y[k], alpha[k], lb[k], ub[k]);
        if (up == low) return false;
        const double v = y[k] * grad(k);
        return up ? v < vmin : v > vmax;
      });
    }

    if (options.second_order) {
      const auto curvature = [&](Index k) {
        double c = 0.0;
        if (floor && alpha[k] < qp.floor_point[k]) c += qp.floor_weight[k];
        return c;
      };
      const double qii = qp.Q(i, i) - curvature(i);
      double best = kInf;
      for (const Index k : active) {
        if (!in_low(y[k], alpha[k], lb[k], ub[k])) continue;
        const double b = vmax - y[k] * grad(k);
        if (b <= 0.0) continue;
        double a = qii + qp.Q(k, k) - curvature(k) - 2.0 * y[i] * y[k] * qp.Q(k, i);
        if (a <= 1e-12) a = 1e-12;
        const double score = -b * b / a;
        if (score < best) {
          best = score;
          j = k;
        }
      }
    }

    // Ascent along u = y_i e_i - y_j e_j; phi(t) = F(alpha + t u) is concave
    // and piecewise quadratic with breakpoints where a coordinate crosses
    // its floor point.
    const double yi = y[i];
    const double yj = y[j];
    const double eta = qp.Q(i, i) + qp.Q(j, j) - 2.0 * yi * yj * qp.Q(i, j);
    const double range_i = yi > 0.0 ? ub[i] - alpha[i] : alpha[i] - lb[i];
    const double range_j = yj > 0.0 ? alpha[j] - lb[j] : ub[j] - alpha[j];
    const double thi = std::min(range_i, range_j);

    const double ki = floor ? qp.floor_point[i] - alpha[i] : 0.0;
    const double kj = floor ? qp.floor_point[j] - alpha[j] : 0.0;
    const double wi = floor ? qp.floor_weight[i] : 0.0;
    const double wj = floor ? qp.floor_weight[j] : 0.0;
    const double d0 = yi * grad(i) - yj * grad(j);
    auto deriv = [&](double t) {
      double d = d0 - eta * t;
      if (wi > 0.0) d -= yi * wi * (pos(ki - yi * t) - pos(ki));
      if (wj > 0.0) d += yj * wj * (pos(kj + yj * t) - pos(kj));
      return d;
    };

    std::array<double, 4> pts{};
    int npts = 0;
    pts[npts++] = 0.0;
    if (wi > 0.0 && std::isfinite(ki)) {
      const double b = yi * ki;
      if (b > 0.0 && b < thi) pts[npts++] = b;
    }
    if (wj > 0.0 && std::isfinite(kj)) {
      const double b = -yj * kj;
      if (b > 0.0 && b < thi) pts[npts++] = b;
    }
    std::sort(pts.begin() + 1, pts.begin() + npts);
    pts[npts++] = thi;

    double t = 0.0;
    double a = 0.0;
    double da = d0;
    for (int s = 1; s < npts; ++s) {
      const double b = pts[s];
      if (std::isinf(b)) {
        const double slope = deriv(a + 1.0) - da;
        if (!(slope < 0.0)) {
          throw SolverError("solve_smo: objective unbounded along working pair");
        }
        t = a - da / slope;
        break;
      }
      const double db = deriv(b);
      if (db >= 0.0) {
        t = b;
        a = b;
        da = db;
        continue;
      }
      t = a + da * (b - a) / (da - db);
      break;
    }

    // Move; snap exactly to a bound when the step reaches it and keep
    // y_i*d_i + y_j*d_j == 0 exactly.
    double di = 0.0;
    double dj = 0.0;
    if (t >= thi && range_j <= range_i) {
      const double target = yj > 0.0 ? lb[j] : ub[j];
      dj = target - alpha[j];
      di = -yi * yj * dj;
      alpha[j] = target;
      const double next_i = (t >= range_i) ? (yi > 0.0 ? ub[i] : lb[i])
                                           : std::clamp(alpha[i] + di, lb[i], ub[i]);
      di = next_i - alpha[i];
      alpha[i] = next_i;
    } else {
      double target = alpha[i] + yi * t;
      if (t >= range_i) target = yi > 0.0 ? ub[i] : lb[i];
      di = target - alpha[i];
      alpha[i] = target;
      const double next_j = std::clamp(alpha[j] - yi * yj * di, lb[j], ub[j]);
      dj = next_j - alpha[j];
      alpha[j] = next_j;
    }
    if (di != 0.0) glin.noalias() -= qp.Q.col(i) * di;
    if (dj != 0.0) glin.noalias() -= qp.Q.col(j) * dj;
  }

  sol.alpha = std::move(alpha);
  sol.objective = qp.objective(sol.alpha);
  sol.kkt_residual = std::max(gap, 0.0);
  sol.iterations = iter;
  sol.converged = gap <= options.tol;
  return sol;
}

Vector project_feasible(const Vector& z, const Vector& y, const Vector& lower,
                        const Vector& upper) {
  const Index n = z.size();
  auto at = [&](double tau) {
    return (z - tau * y).cwiseMax(lower).cwiseMin(upper);
  };
  auto s = [&](double tau) { return y.dot(at(tau)); };

  double lo = -1.0;
  double hi = 1.0;
  while (s(lo) < 0.0) {
    lo *= 2.0;
    if (lo < -1e300) throw InvalidArgument("project_feasible: empty feasible set");
  }
  while (s(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw InvalidArgument("project_feasible: empty feasible set");
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // Exact finish: with the active set fixed, s(tau) is affine in tau.
  double tau = 0.5 * (lo + hi);
  Vector a = at(tau);
  double fixed = 0.0;
  double free_sum = 0.0;
  Index nfree = 0;
  for (Index i = 0; i < n; ++i) {
    const double v = z[i] - tau * y[i];
    if (v > lower[i] && v < upper[i]) {
      free_sum += y[i] * z[i];
      ++nfree;
    } else {
      fixed += y[i] * a[i];
    }
  }
  if (nfree > 0) {
    const double exact = (free_sum + fixed) / static_cast<double>(nfree);
    if (exact >= lo && exact <= hi) {
      tau = exact;
      a = at(tau);
    }
  }
  return a;
}

QPSolution solve_reference(const DualQP& qp, const ReferenceOptions& options) {
  qp.validate();
  require(qp.size() <= 200, "solve_reference: dense oracle limited to n <= 200");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(qp.Q, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12) * (1.0 + 1e-9);
  const double step = 1.0 / lipschitz;

  auto project = [&](const Vector& v) {
    return project_feasible(v, qp.y, qp.lower, qp.upper);
  };
  auto residual = [&](const Vector& x) {
    const Vector p = project(x + step * qp.gradient(x));
    return (p - x).cwiseAbs().maxCoeff();
  };

  Vector x = project(feasible_start(qp));
  double fx = qp.objective(x);
  Vector ym = x;
  double tk = 1.0;

  QPSolution sol;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    Vector z = project(ym + step * qp.gradient(ym));
    double fz = qp.objective(z);
    if (fz < fx) {
      // Momentum overshoot: restart from the last accepted iterate.
      ym = x;
      tk = 1.0;
      z = project(x + step * qp.gradient(x));
      fz = qp.objective(z);
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    ym = z + ((tk - 1.0) / tn) * (z - x);
    tk = tn;

    const double change = std::abs(fz - fx);
    x = std::move(z);
    fx = fz;
    if (change <= options.tol * (1.0 + std::abs(fx)) && it % 16 == 0) {
      const double res = residual(x);
      if (res <= 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) {
        sol.alpha = x;
        sol.objective = fx;
        sol.kkt_residual = kkt_report(qp, x);
        sol.iterations = it;
        sol.converged = true;
        return sol;
      }
    }
  }
  throw SolverError("solve_reference: no convergence within iteration cap");
}

double kkt_report(const DualQP& qp, const Vector& alpha) {
  qp.validate();
  require(alpha.size() == qp.size(), "kkt_report: alpha length mismatch");
  const double scale = std::max(1.0, alpha.cwiseAbs().maxCoeff());
  for (Index i = 0; i < alpha.size(); ++i) {
    require(alpha[i] >= qp.lower[i] - 1e-9 && alpha[i] <= qp.upper[i] + 1e-9,
            "kkt_report: alpha violates its bounds");
  }
  require(std::abs(qp.y.dot(alpha)) <= 1e-9 * scale,
          "kkt_report: alpha violates y'a = 0");
  const KktInterval iv = kkt_interval(qp, alpha);
  if (std::isinf(iv.lo) || std::isinf(iv.hi)) return 0.0;
  return std::max(iv.lo - iv.hi, 0.0);
}

KktInterval kkt_interval(const DualQP& qp, const Vector& alpha) {
  const Vector g = qp.gradient(alpha);
  KktInterval iv;
  for (Index k = 0; k < alpha.size(); ++k) {
    const double v = qp.y[k] * g[k];
    if (in_up(qp.y[k], alpha[k], qp.lower[k], qp.upper[k])) iv.lo = std::max(iv.lo, v);
    if (in_low(qp.y[k], alpha[k], qp.lower[k], qp.upper[k])) iv.hi = std::min(iv.hi, v);
  }
  return iv;
}

double kkt_intercept(const DualQP& qp, const Vector& alpha,
                     const std::vector<bool>& preferred, double free_tol,
                     double interval_tol) {
  const Index n = qp.size();
  require(alpha.size() == n, "kkt_intercept: alpha length mismatch");
  require(preferred.empty() || static_cast<Index>(preferred.size()) == n,
          "kkt_intercept: preferred mask length mismatch");
  const Vector g = qp.gradient(alpha);
  const double amax = std::max(1.0, alpha.cwiseAbs().maxCoeff());

  auto is_free = [&](Index i) {
    const double span = qp.upper[i] - qp.lower[i];
    const double tau = free_tol * (std::isfinite(span) ? span : amax);
    return alpha[i] > qp.lower[i] + tau && alpha[i] < qp.upper[i] - tau;
  };
  auto mean_over = [&](bool use_mask, double& out) {
    double sum = 0.0;
    Index count = 0;
    for (Index i = 0; i < n; ++i) {
      if (use_mask && !preferred[i]) continue;
      if (!is_free(i)) continue;
      sum += qp.y[i] * g[i];
      ++count;
    }
    if (count == 0) return false;
    out = sum / static_cast<double>(count);
    return true;
  };

  double b = 0.0;
  if (!preferred.empty() && mean_over(true, b)) return b;
  if (mean_over(false, b)) return b;

  const KktInterval iv = kkt_interval(qp, alpha);
  const bool lo_finite = std::isfinite(iv.lo);
  const bool hi_finite = std::isfinite(iv.hi);
  if (lo_finite && hi_finite) {
    if (iv.lo > iv.hi + interval_tol * (1.0 + std::abs(iv.lo) + std::abs(iv.hi))) {
      throw SolverError("kkt_intercept: empty intercept interval");
    }
    return 0.5 * (iv.lo + iv.hi);
  }
  if (lo_finite) return iv.lo;
  if (hi_finite) return iv.hi;
  return 0.0;
}

}  // namespace edsvm
