#pragma once

#include "edsvm/kernel.hpp"
#include "edsvm/model.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace testutil {

using edsvm::Dataset;
using edsvm::Index;
using edsvm::Matrix;
using edsvm::Vector;

// Two Gaussian blobs with labels alternating so both classes are present.
inline Dataset random_dataset(std::mt19937_64& rng, Index n, Index p, double shift = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = (i % 2 == 0) ? 1.0 : -1.0;
    for (Index j = 0; j < p; ++j) x(i, j) = g(rng) + (j == 0 ? shift * y[i] : 0.0);
  }
  return Dataset(std::move(x), std::move(y));
}

// Random sorted elite subset of size m with targets in [0, max_target).
inline edsvm::EliteGuide random_guide(std::mt19937_64& rng, Index n, Index m,
                                      double max_target = 2.0) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  std::uniform_real_distribution<double> u(0.0, max_target);
  edsvm::EliteGuide g;
  g.elite = idx;
  g.targets.resize(m);
  for (Index k = 0; k < m; ++k) g.targets[k] = u(rng);
  g.source = {"test"};
  return g;
}

inline Dataset two_point() {
  Matrix x(2, 2);
  x << 1, 0, -1, 0;
  Vector y(2);
  y << 1, -1;
  return Dataset(x, y);
}

}  // namespace testutil
