#include "edsvm/baselines.hpp"
#include "edsvm/edsvm.hpp"
#include "edsvm/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace edsvm;

namespace {

SolverOptions tight() {
  SolverOptions o;
  o.smo.tol = 1e-10;
  return o;
}

EDSVMConfig config(Variant v, double C, double omega, EliteGuide g,
                   KernelSpec k = KernelSpec::linear()) {
  EDSVMConfig cfg;
  cfg.variant = v;
  cfg.C = C;
  cfg.omega = omega;
  cfg.guide = std::move(g);
  cfg.kernel = k;
  return cfg;
}

EliteGuide single_elite(Index i, double target) {
  EliteGuide g;
  g.elite = {i};
  g.targets = Vector::Constant(1, target);
  return g;
}

}  // namespace

TEST_CASE("cedsvm dual: coefficients") {
  const Dataset d = testutil::two_point();
  const DualQP qp = build_cedsvm_dual(d, config(Variant::CEDSVM, 1.0, 0.5, single_elite(0, 0.2)));
  const Matrix H = label_gram(d.labels(), compute_gram(KernelSpec::linear(), d.features()));
  CHECK(qp.Q(0, 0) - H(0, 0) == doctest::Approx(1.0));
  CHECK(qp.R[0] == doctest::Approx(1.3));
  CHECK(qp.D == doctest::Approx(-0.025));
  CHECK(std::isinf(qp.upper[0]));
  CHECK(qp.Q(1, 1) - H(1, 1) == 0.0);
  CHECK(qp.R[1] == 1.0);
  CHECK(qp.upper[1] == 0.5);
  // kappa = C w - 2 C (1 - w) xi* = 0.5 - 0.2 = 0.3
  REQUIRE(qp.has_floor());
  CHECK(qp.floor_point[0] == doctest::Approx(0.3));
  CHECK(qp.floor_weight[0] == doctest::Approx(1.0));
  CHECK(qp.floor_weight[1] == 0.0);
}

TEST_CASE("cedsvm dual: empty elite equals the hinge dual at C * omega") {
  std::mt19937_64 rng(31);
  const Dataset d = testutil::random_dataset(rng, 12, 2);
  const Matrix K = compute_gram(KernelSpec::rbf(1.0), d.features());
  const DualQP e = build_cedsvm_dual(d, K, config(Variant::CEDSVM, 2.0, 0.3, {}, KernelSpec::rbf(1.0)));
  const DualQP c = build_csvm_dual(d.labels(), K, 0.6);
  CHECK(e.Q == c.Q);
  CHECK(e.R == c.R);
  CHECK(e.D == 0.0);
  CHECK((e.upper - c.upper).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_FALSE(e.has_floor());
}

TEST_CASE("lsedsvm dual: coefficients") {
  const Dataset d = testutil::two_point();
  const Matrix H = label_gram(d.labels(), compute_gram(KernelSpec::linear(), d.features()));
  const DualQP qp = build_lsedsvm_dual(d, config(Variant::LSEDSVM, 1.0, 0.5, single_elite(0, 0.4)));
  CHECK(qp.Q(0, 0) - H(0, 0) == doctest::Approx(0.5));
  CHECK(qp.R[0] == doctest::Approx(0.8));
  CHECK(qp.D == doctest::Approx(0.04));
  CHECK(qp.Q(1, 1) - H(1, 1) == doctest::Approx(1.0));

  const DualQP one = build_lsedsvm_dual(d, config(Variant::LSEDSVM, 2.0, 1.0, single_elite(0, 0.4)));
  CHECK(one.Q(0, 0) - H(0, 0) == doctest::Approx(0.25));
  CHECK(one.Q(1, 1) - H(1, 1) == doctest::Approx(0.25));
  CHECK(one.R == Vector::Ones(2));
  CHECK(one.D == 0.0);

  const DualQP q = build_lsedsvm_dual(d, config(Variant::LSEDSVM, 2.0, 0.25, single_elite(0, 0.4)));
  CHECK(q.Q(1, 1) - H(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("edsvm: configuration errors") {
  const Dataset d = testutil::two_point();
  CHECK_THROWS_AS(build_lsedsvm_dual(d, config(Variant::LSEDSVM, 1.0, 0.0, {})), InvalidArgument);
  CHECK_THROWS_AS(build_cedsvm_dual(d, config(Variant::CEDSVM, 1.0, 1.5, {})), InvalidArgument);
  CHECK_THROWS_AS(build_cedsvm_dual(d, config(Variant::CEDSVM, 1.0, 1.0, {})), InvalidArgument);
  CHECK_THROWS_AS(fit_edsvm(d, config(Variant::CEDSVM, -1.0, 0.5, {})), InvalidArgument);
  CHECK_THROWS_AS(fit_edsvm(d, config(Variant::CSVM, 1.0, 0.5, {})), InvalidArgument);
  CHECK_THROWS_AS(fit_edsvm(d, config(Variant::CEDSVM, 1.0, 0.5, single_elite(5, 0.1))),
                  InvalidArgument);
}

TEST_CASE("edsvm: slack formulas") {
  CHECK(cedsvm_elite_slack(0.6, 0.2, 1.0, 0.5) == doctest::Approx(0.3));
  CHECK(cedsvm_elite_slack(0.0, 0.0, 1.0, 0.5) == 0.0);
  CHECK(lsedsvm_nonelite_slack(0.4, 1.0, 0.5) == doctest::Approx(0.4));
  CHECK(lsedsvm_elite_slack(0.4, 1.0, 1.0, 0.5) == doctest::Approx(0.7));
}

TEST_CASE("edsvm: symmetric two-point problem has zero intercept") {
  const Dataset d = testutil::two_point();
  for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
    EliteGuide g;
    g.elite = {0, 1};
    g.targets = Vector::Constant(2, 0.3);
    const TrainedModel m = fit_edsvm(d, config(v, 1.0, 0.5, g), tight());
    CHECK(std::abs(m.beta0) <= 1e-9);
  }
}

TEST_CASE("edsvm: omega = 1 and empty-elite reductions") {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset d = testutil::random_dataset(rng, 30, 2, 0.4);
    const KernelSpec k = KernelSpec::rbf(0.5);
    const Matrix q = testutil::random_dataset(rng, 20, 2).features();
    const EliteGuide g = testutil::random_guide(rng, 30, 10);

    const TrainedModel e1 = fit_edsvm(d, config(Variant::CEDSVM, 2.0, 1.0, g, k), tight());
    const TrainedModel c1 = fit_csvm(d, 2.0, k, tight());
    CHECK((decision_values(e1, q) - decision_values(c1, q)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(predict(e1, q) == predict(c1, q));

    const TrainedModel e0 = fit_edsvm(d, config(Variant::CEDSVM, 2.0, 0.4, {}, k), tight());
    const TrainedModel c0 = fit_csvm(d, 0.8, k, tight());
    CHECK((decision_values(e0, q) - decision_values(c0, q)).cwiseAbs().maxCoeff() <= 1e-6);

    const TrainedModel l0 = fit_edsvm(d, config(Variant::LSEDSVM, 2.0, 0.4, {}, k), tight());
    const TrainedModel s0 = fit_lssvm(d, 0.8, k, tight());
    CHECK((decision_values(l0, q) - decision_values(s0, q)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("edsvm: duality gap, primal feasibility of reconstructed slacks") {
  std::mt19937_64 rng(33);
  int cases = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 6 + rep;
    const Dataset d = testutil::random_dataset(rng, n, 2, 0.5);
    const KernelSpec k = rep % 3 == 0   ? KernelSpec::linear()
                         : rep % 3 == 1 ? KernelSpec::polynomial(2, 1.0)
                                        : KernelSpec::rbf(1.0);
    const Matrix K = compute_gram(k, d.features());
    for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
      const EDSVMConfig cfg =
          config(v, rep % 2 ? 4.0 : 0.25, rep % 4 == 0 ? 0.9 : 0.1,
                 testutil::random_guide(rng, n, rep % n), k);
      const TrainedModel m = fit_edsvm(d, K, cfg, tight());
      const DualityGap gap = duality_gap(d, K, cfg, m.alpha, m.beta0);
      CHECK(std::abs(gap.relative) <= 1e-6);
      CHECK(gap.gap >= -1e-9 * (1.0 + std::abs(gap.primal)));
      const Vector xi = reconstruct_slacks(d, K, cfg, m.alpha, m.beta0);
      const Vector u = d.labels().cwiseProduct(training_decision_values(m, K));
      CHECK(xi.minCoeff() >= 0.0);
      CHECK((u + xi).minCoeff() >= 1.0 - 1e-6);
      ++cases;
    }
  }
  CHECK(cases == 60);
}

TEST_CASE("edsvm: elite slack deviation as omega decreases (reported)") {
  std::mt19937_64 rng(34);
  const Dataset d = testutil::random_dataset(rng, 40, 2, 0.3);
  const KernelSpec k = KernelSpec::rbf(0.5);
  const Matrix K = compute_gram(k, d.features());
  const TrainedModel ref = fit_lssvm(d, K, 1.0, k, tight());
  EliteGuide g;
  g.elite = support_indices(ref);
  g.targets.resize(g.size());
  const Vector s = extract_slacks(ref, K);
  for (Index j = 0; j < g.size(); ++j) g.targets[j] = s[g.elite[static_cast<std::size_t>(j)]];
  int violations = 0;
  double prev = kInf;
  for (double w : {0.9, 0.7, 0.5, 0.3, 0.1}) {
    const TrainedModel m = fit_edsvm(d, K, config(Variant::CEDSVM, 1.0, w, g, k), tight());
    const double dev = elite_deviation(extract_slacks(m, K), g);
    if (dev > prev + 1e-6) ++violations;
    prev = dev;
  }
  MESSAGE("non-monotone steps in elite deviation: " << violations);
}
