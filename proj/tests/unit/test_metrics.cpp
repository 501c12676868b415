#include "edsvm/error.hpp"
#include "edsvm/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace edsvm;

namespace {

double brute_auc(const Vector& s, const Vector& y) {
  double num = 0.0;
  double pairs = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (y[i] < 0) continue;
    for (Index j = 0; j < s.size(); ++j) {
      if (y[j] > 0) continue;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      pairs += 1.0;
    }
  }
  return num / pairs;
}

// Mean precision at the rank of every positive; scores must be distinct.
double brute_ap(const Vector& s, const Vector& y) {
  std::vector<Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return s[a] > s[b]; });
  double tp = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (y[order[k]] > 0) {
      tp += 1.0;
      sum += tp / static_cast<double>(k + 1);
    }
  }
  return sum / tp;
}

void random_case(std::mt19937_64& rng, Index n, int levels, Vector& s, Vector& y) {
  std::uniform_int_distribution<int> lv(0, levels - 1);
  s.resize(n);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    s[i] = lv(rng);
    y[i] = (i < 2) ? (i == 0 ? 1.0 : -1.0) : (lv(rng) % 2 ? 1.0 : -1.0);
  }
}

}  // namespace

TEST_CASE("metrics: worked examples") {
  Vector y(4);
  y << 1, -1, 1, -1;
  Vector s(4);
  s << 0.9, 0.8, 0.3, 0.1;
  CHECK(roc_auc(s, y) == 0.75);

  const Metrics perfect = compute_metrics(y * 2.0, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.roc_auc == 1.0);
  CHECK(perfect.pr_auc == 1.0);
  CHECK(perfect.f1 == 1.0);

  const Metrics reversed = compute_metrics(-y, y);
  CHECK(reversed.accuracy == 0.0);
  CHECK(reversed.roc_auc == 0.0);
}

TEST_CASE("metrics: confusion counts, threshold ties and f1") {
  Vector y(6);
  y << 1, 1, 1, -1, -1, -1;
  Vector s(6);
  s << 2.0, 0.0, -1.0, 0.5, -2.0, -3.0;
  const Metrics m = compute_metrics(s, y);
  CHECK(m.tp == 2);
  CHECK(m.fn == 1);
  CHECK(m.fp == 1);
  CHECK(m.tn == 2);
  CHECK(m.sensitivity == doctest::Approx(2.0 / 3.0));
  CHECK(m.specificity == doctest::Approx(2.0 / 3.0));
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
  const Metrics shifted = compute_metrics(s, y, 1.0);
  CHECK(shifted.tp == 1);
  CHECK(shifted.fp == 0);
}

TEST_CASE("metrics: undefined precision is flagged") {
  Vector y(4);
  y << 1, -1, 1, -1;
  const Metrics m = compute_metrics(Vector::Constant(4, -1.0), y);
  CHECK_FALSE(m.precision_defined);
  CHECK(m.precision == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(m.roc_auc == 0.5);
}

TEST_CASE("metrics: errors") {
  Vector y = Vector::Ones(3);
  CHECK_THROWS_AS(roc_auc(Vector::Zero(3), y), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(Vector::Zero(3), y), InvalidArgument);
  CHECK_THROWS_AS(roc_auc(Vector::Zero(2), y), InvalidArgument);
  Vector bad(3);
  bad << 1, 0, -1;
  CHECK_THROWS_AS(roc_auc(Vector::Zero(3), bad), InvalidArgument);
}

TEST_CASE("roc auc equals the pairwise estimator exactly") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<Index> len(2, 200);
  for (int rep = 0; rep < 300; ++rep) {
    Vector s;
    Vector y;
    random_case(rng, len(rng), rep % 2 ? 5 : 1000, s, y);
    CHECK(roc_auc(s, y) == brute_auc(s, y));
  }
}

TEST_CASE("average precision equals the rank formula on distinct scores") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 2 + rep;
    Vector s(n);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = i % 3 == 0 ? 1.0 : -1.0;
      s[i] = g(rng) + 0.5 * y[i];
    }
    y[1] = -1.0;
    CHECK(average_precision(s, y) == doctest::Approx(brute_ap(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("metrics are invariant under permutation") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    Vector s;
    Vector y;
    random_case(rng, 60, 7, s, y);
    s.array() -= 3.0;
    std::vector<Index> perm(60);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector sp(60);
    Vector yp(60);
    for (Index i = 0; i < 60; ++i) {
      sp[i] = s[perm[static_cast<std::size_t>(i)]];
      yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    const Metrics a = compute_metrics(s, y);
    const Metrics b = compute_metrics(sp, yp);
    for (const std::string& name : metric_names()) {
      CHECK(metric_value(a, name) == metric_value(b, name));
    }
  }
}
