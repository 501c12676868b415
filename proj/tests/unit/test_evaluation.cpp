#include "edsvm/error.hpp"
#include "edsvm/evaluation.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

using namespace edsvm;

namespace {

Vector labels(Index pos, Index neg) {
  Vector y(pos + neg);
  y.head(pos).setOnes();
  y.tail(neg).setConstant(-1.0);
  return y;
}

GridSpec small_grid(KernelSpec::Kind kind = KernelSpec::Kind::Linear) {
  GridSpec g = GridSpec::defaults();
  g.kernel = kind;
  g.C_values = {0.25, 1.0};
  g.omega_values = {0.5, 1.0};
  g.a_values = {-1.0, -2.0};
  g.gamma_values = {0.5};
  g.seed = 3;
  return g;
}

}  // namespace

TEST_CASE("stratified kfold: balanced counts and determinism") {
  const Vector y = labels(10, 10);
  const std::vector<int> f = stratified_kfold(y, 5, 1);
  for (int k = 0; k < 5; ++k) {
    int pos = 0;
    int neg = 0;
    for (Index i = 0; i < y.size(); ++i) {
      if (f[static_cast<std::size_t>(i)] != k) continue;
      (y[i] > 0 ? pos : neg) += 1;
    }
    CHECK(pos == 2);
    CHECK(neg == 2);
  }
  CHECK(f == stratified_kfold(y, 5, 1));
  CHECK(f != stratified_kfold(y, 5, 2));
}

TEST_CASE("stratified kfold: imbalanced proportions within one sample") {
  const Vector y = labels(81, 225);
  const std::vector<int> f = stratified_kfold(y, 5, 9);
  for (int k = 0; k < 5; ++k) {
    double pos = 0;
    double size = 0;
    for (Index i = 0; i < y.size(); ++i) {
      if (f[static_cast<std::size_t>(i)] != k) continue;
      size += 1;
      pos += y[i] > 0 ? 1 : 0;
    }
    CHECK(std::abs(pos - size * 81.0 / 306.0) <= 1.0);
  }
  CHECK_THROWS_AS(stratified_kfold(labels(4, 30), 5, 1), InvalidArgument);
  CHECK_THROWS_AS(stratified_kfold(labels(10, 10), 1, 1), InvalidArgument);
}

TEST_CASE("kfold splits and stratified split partition the data") {
  const Vector y = labels(30, 40);
  const auto splits = kfold_splits(stratified_kfold(y, 5, 4), 5);
  std::set<Index> tested;
  for (const Split& s : splits) {
    CHECK(s.train.size() + s.test.size() == 70);
    tested.insert(s.test.begin(), s.test.end());
  }
  CHECK(tested.size() == 70);

  const Split h = stratified_split(y, 0.3, 5);
  CHECK(h.test.size() == 21);
  CHECK(h.train.size() == 49);
  std::set<Index> all(h.train.begin(), h.train.end());
  all.insert(h.test.begin(), h.test.end());
  CHECK(all.size() == 70);
  Index test_pos = 0;
  for (Index i : h.test) test_pos += y[i] > 0 ? 1 : 0;
  CHECK(test_pos == 9);
  CHECK(h.test == stratified_split(y, 0.3, 5).test);
}

TEST_CASE("standardizer") {
  Matrix x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const Standardizer s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  CHECK(z.col(0).mean() == doctest::Approx(0.0));
  CHECK(std::sqrt(z.col(0).squaredNorm() / 3.0) == doctest::Approx(1.0));
  CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(s.transform(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("grid search: single point, perfect point, determinism, tie-break") {
  std::mt19937_64 rng(12);
  const Dataset d = testutil::random_dataset(rng, 40, 2, 1.0);

  GridSpec one = small_grid();
  one.C_values = {0.5};
  const GridResult single = grid_search(d, Variant::CSVM, one);
  CHECK(single.table.size() == 1);
  CHECK(single.best.C == 0.5);

  const GridSpec g = small_grid(KernelSpec::Kind::RBF);
  const GridResult a = grid_search(d, Variant::LINEXSVM, g);
  const GridResult b = grid_search(d, Variant::LINEXSVM, g);
  REQUIRE(a.table.size() == b.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    CHECK(a.table[i].mean_error == b.table[i].mean_error);
    CHECK(a.table[i].params == b.table[i].params);
  }
  CHECK(a.best == b.best);

  // Well separated data: every C is perfect, so the smallest C wins.
  std::mt19937_64 rng2(13);
  const Dataset sep = testutil::random_dataset(rng2, 40, 2, 8.0);
  const GridResult t = grid_search(sep, Variant::CSVM, small_grid());
  CHECK(t.best_error == 0.0);
  CHECK(t.best.C == 0.25);
}

TEST_CASE("grid search: a perfect grid point beats an imperfect one") {
  // One point is perfect on these data only with a wide enough kernel.
  std::mt19937_64 rng(14);
  const Dataset d = testutil::random_dataset(rng, 40, 2, 6.0);
  GridSpec g = small_grid(KernelSpec::Kind::RBF);
  g.C_values = {1.0};
  g.gamma_values = {1000.0, 0.1};
  const GridResult r = grid_search(d, Variant::CSVM, g);
  CHECK(r.best.gamma == 0.1);
  CHECK(r.best_error == 0.0);
  CHECK(r.table[0].mean_error > 0.0);
}

TEST_CASE("grid search: EDSVM needs a guide builder; threads do not change results") {
  std::mt19937_64 rng(15);
  const Dataset d = testutil::random_dataset(rng, 40, 2, 0.8);
  CHECK_THROWS_AS(grid_search(d, Variant::CEDSVM, small_grid()), InvalidArgument);
  SearchOptions o;
  o.guide = [](int, const Dataset& train) {
    return benchmark_slacks(train, {}, {}, {}, small_grid(), {}).guide(AggregationRule::max());
  };
  o.threads = 1;
  const GridResult seq = grid_search(d, Variant::CEDSVM, small_grid(), o);
  o.threads = 4;
  const GridResult par = grid_search(d, Variant::CEDSVM, small_grid(), o);
  for (std::size_t i = 0; i < seq.table.size(); ++i) {
    CHECK(seq.table[i].mean_error == par.table[i].mean_error);
  }
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw SolverError("boom");
                               }),
                  SolverError);
}

TEST_CASE("run_experiment: omega = 1 makes EDSVM rows equal the baselines") {
  std::mt19937_64 rng(16);
  const Dataset d = testutil::random_dataset(rng, 50, 3, 0.7);
  ExperimentConfig c;
  c.grid = small_grid();
  c.grid.omega_values = {1.0};
  c.targets = {"uci"};
  const ExperimentReport r = run_experiment(d, c);
  CHECK(r.rows.size() == 5);
  const MethodResult& cs = r.row("csvm");
  const MethodResult& ce = r.row("cedsvm", "uci");
  const MethodResult& ls = r.row("lssvm");
  const MethodResult& le = r.row("lsedsvm", "uci");
  for (const std::string& name : metric_names()) {
    CHECK(metric_value(cs.mean, name) == metric_value(ce.mean, name));
    CHECK(metric_value(cs.sd, name) == metric_value(ce.sd, name));
    CHECK(metric_value(ls.mean, name) == metric_value(le.mean, name));
  }
  CHECK(cs.per_fold.size() == 5);
  CHECK(format_table(r).find("cedsvm") != std::string::npos);
}

TEST_CASE("run_experiment: holdout protocol returns test metrics and models") {
  std::mt19937_64 rng(17);
  const Dataset d = testutil::random_dataset(rng, 60, 2, 1.0);
  ExperimentConfig c;
  c.protocol = Protocol::Holdout;
  c.grid = small_grid(KernelSpec::Kind::RBF);
  c.targets = {"min", "max"};
  c.standardize = false;
  const ExperimentReport r = run_experiment(d, c);
  CHECK(r.n_test == 18);
  CHECK(r.n_train == 42);
  CHECK(r.rows.size() == 7);
  CHECK(r.models.size() == 7);
  CHECK(r.row("cedsvm", "max").per_fold.size() == 1);
  CHECK(r.row("lsedsvm", "min").elite_size > 0.0);
  CHECK_THROWS_AS(r.row("cedsvm", "linex"), InvalidArgument);

  c.targets = {"nope"};
  CHECK_THROWS_AS(run_experiment(d, c), InvalidArgument);
}
