#include "edsvm/simulation.hpp"

#include "edsvm/error.hpp"

#include <cmath>
#include <random>

namespace edsvm {
namespace {

double log_sum_exp_neg(const Matrix& centers, const Eigen::Ref<const Vector>& z, double scale) {
  const Index k = centers.rows();
  Vector e(k);
  for (Index i = 0; i < k; ++i) {
    e[i] = -(centers.row(i).transpose() - z).squaredNorm() / (2.0 * scale);
  }
  const double mx = e.maxCoeff();
  return mx + std::log((e.array() - mx).exp().sum());
}

}  // namespace

void MixtureSpec::validate() const {
  require(centers_pos.rows() > 0 && centers_neg.rows() > 0, "mixture: no centers");
  require(centers_pos.cols() == centers_neg.cols(), "mixture: center dimensions differ");
  require(centers_pos.allFinite() && centers_neg.allFinite(), "mixture: non-finite center");
  require(per_center > 0, "mixture: per_center must be positive");
  require(std::isfinite(cluster_cov_scale) && cluster_cov_scale > 0.0,
          "mixture: cluster covariance scale must be positive");
}

MixtureSpec draw_centers(std::uint64_t seed, int centers_per_class) {
  require(centers_per_class > 0, "draw_centers: need at least one center per class");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MixtureSpec s;
  s.seed = seed;
  s.centers_pos.resize(centers_per_class, 2);
  s.centers_neg.resize(centers_per_class, 2);
  for (int i = 0; i < centers_per_class; ++i) {
    s.centers_pos(i, 0) = 1.0 + g(rng);
    s.centers_pos(i, 1) = g(rng);
  }
  for (int i = 0; i < centers_per_class; ++i) {
    s.centers_neg(i, 0) = g(rng);
    s.centers_neg(i, 1) = 1.0 + g(rng);
  }
  return s;
}

Dataset sample_dataset(const MixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(spec.cluster_cov_scale));
  const Index kp = spec.centers_pos.rows();
  const Index kn = spec.centers_neg.rows();
  const Index per = spec.per_center;
  const Index n = (kp + kn) * per;
  const Index p = spec.centers_pos.cols();
  Matrix x(n, p);
  Vector y(n);
  Index row = 0;
  for (int cls = 0; cls < 2; ++cls) {
    const Matrix& centers = cls == 0 ? spec.centers_pos : spec.centers_neg;
    for (Index c = 0; c < centers.rows(); ++c) {
      for (Index k = 0; k < per; ++k) {
        for (Index j = 0; j < p; ++j) x(row, j) = centers(c, j) + g(rng);
        y[row] = cls == 0 ? 1.0 : -1.0;
        ++row;
      }
    }
  }
  return Dataset(std::move(x), std::move(y));
}

double bayes_score(const MixtureSpec& spec, const Eigen::Ref<const Vector>& z) {
  require(z.size() == spec.centers_pos.cols(), "bayes_score: dimension mismatch");
  return log_sum_exp_neg(spec.centers_pos, z, spec.cluster_cov_scale) -
         log_sum_exp_neg(spec.centers_neg, z, spec.cluster_cov_scale);
}

Vector bayes_scores(const MixtureSpec& spec, const Matrix& Z) {
  spec.validate();
  Vector s(Z.rows());
  for (Index i = 0; i < Z.rows(); ++i) s[i] = bayes_score(spec, Z.row(i).transpose());
  return s;
}

Dataset sample_mixture(const MixtureSpec& spec, Index count, std::uint64_t seed) {
  spec.validate();
  require(count > 0, "sample_mixture: count must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, std::sqrt(spec.cluster_cov_scale));
  const Index p = spec.centers_pos.cols();
  Matrix x(count, p);
  Vector y(count);
  for (Index i = 0; i < count; ++i) {
    const bool pos = coin(rng);
    const Matrix& centers = pos ? spec.centers_pos : spec.centers_neg;
    std::uniform_int_distribution<Index> pick(0, centers.rows() - 1);
    const Index c = pick(rng);
    for (Index j = 0; j < p; ++j) x(i, j) = centers(c, j) + g(rng);
    y[i] = pos ? 1.0 : -1.0;
  }
  return Dataset(std::move(x), std::move(y));
}

BayesEstimate bayes_accuracy(const MixtureSpec& spec, Index mc_samples, std::uint64_t seed) {
  require(mc_samples >= 10'000, "bayes_accuracy: need at least 1e4 Monte Carlo samples");
  return mixture_accuracy(spec, mc_samples, seed,
                          [&](const Matrix& Z) { return bayes_scores(spec, Z); });
}

Matrix boundary_grid(const Matrix& X, int res, double pad) {
  require(X.rows() > 0 && X.cols() == 2, "boundary_grid: need a nonempty two-column matrix");
  require(res >= 2, "boundary_grid: resolution must be at least 2");
  const double x0 = X.col(0).minCoeff() - pad;
  const double x1 = X.col(0).maxCoeff() + pad;
  const double y0 = X.col(1).minCoeff() - pad;
  const double y1 = X.col(1).maxCoeff() + pad;
  Matrix G(static_cast<Index>(res) * res, 2);
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const Index row = static_cast<Index>(j) * res + i;
      G(row, 0) = x0 + (x1 - x0) * i / (res - 1);
      G(row, 1) = y0 + (y1 - y0) * j / (res - 1);
    }
  }
  return G;
}

}  // namespace edsvm
