#pragma once

#include "edsvm/kernel.hpp"

#include <cmath>
#include <cstdint>

namespace edsvm {

/// Two-class Gaussian mixture: each class is an equal-weight mixture of
/// N(center, scale * I) components.
struct MixtureSpec {
  Matrix centers_pos;
  Matrix centers_neg;
  int per_center = 10;
  double cluster_cov_scale = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ten centers per class: positive ~ N((1,0), I), negative ~ N((0,1), I).
MixtureSpec draw_centers(std::uint64_t seed, int centers_per_class = 10);

/// per_center points around every center; positives first, then negatives.
Dataset sample_dataset(const MixtureSpec& spec, std::uint64_t seed);

/// log sum_i exp(-|p_i - z|^2 / (2 s)) - log sum_j exp(-|q_j - z|^2 / (2 s)).
double bayes_score(const MixtureSpec& spec, const Eigen::Ref<const Vector>& z);
Vector bayes_scores(const MixtureSpec& spec, const Matrix& Z);

struct BayesEstimate {
  double accuracy = 0.0;
  double std_error = 0.0;
  Index samples = 0;
};

/// Monte Carlo estimate of P(sign(bayes_score(X)) = Y) with equal priors.
BayesEstimate bayes_accuracy(const MixtureSpec& spec, Index mc_samples, std::uint64_t seed);

/// Monte Carlo accuracy of an arbitrary scorer on fresh mixture draws.
template <class Scorer>
BayesEstimate mixture_accuracy(const MixtureSpec& spec, Index mc_samples, std::uint64_t seed,
                               Scorer&& scorer);

/// Draws (X, y) pairs from the mixture with equal class priors.
Dataset sample_mixture(const MixtureSpec& spec, Index count, std::uint64_t seed);

/// res x res lattice over the bounding box of X padded by `pad` on every
/// side; rows ordered with x1 varying fastest.
Matrix boundary_grid(const Matrix& X, int res = 200, double pad = 1.0);

template <class Scorer>
BayesEstimate mixture_accuracy(const MixtureSpec& spec, Index mc_samples, std::uint64_t seed,
                               Scorer&& scorer) {
  const Dataset d = sample_mixture(spec, mc_samples, seed);
  const Vector s = scorer(d.features());
  Index hit = 0;
  for (Index i = 0; i < d.size(); ++i) {
    hit += ((s[i] >= 0.0 ? 1.0 : -1.0) == d.labels()[i]) ? 1 : 0;
  }
  BayesEstimate e;
  e.samples = d.size();
  e.accuracy = static_cast<double>(hit) / static_cast<double>(d.size());
  e.std_error = std::sqrt(e.accuracy * (1.0 - e.accuracy) / static_cast<double>(d.size()));
  return e;
}

}  // namespace edsvm
