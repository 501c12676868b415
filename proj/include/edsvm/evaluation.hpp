#pragma once

#include "edsvm/baselines.hpp"
#include "edsvm/elite.hpp"
#include "edsvm/metrics.hpp"
#include "edsvm/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edsvm {

/// Column-wise z-score with statistics from the data it was fitted on.
/// Constant columns are centered but not scaled.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& X);
  Matrix transform(const Matrix& X) const;
  Dataset transform(const Dataset& d) const;
};

/// Fold id in [0, k) per observation: classes are shuffled separately
/// (seeded) and dealt round-robin, continuing the deal across classes.
std::vector<int> stratified_kfold(const Vector& labels, int k, std::uint64_t seed);

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

std::vector<Split> kfold_splits(const std::vector<int>& fold, int k);

/// Per-class seeded shuffle; round(test_fraction * class size) of each
/// class goes to the test part.
Split stratified_split(const Vector& labels, double test_fraction, std::uint64_t seed);

struct GridSpec {
  std::vector<double> C_values;
  std::vector<double> omega_values;
  std::vector<double> a_values;
  std::vector<double> gamma_values;
  int folds = 5;
  std::uint64_t seed = 0;
  KernelSpec::Kind kernel = KernelSpec::Kind::RBF;
  int degree = 2;
  double coef0 = 1.0;

  /// C in 2^-3..2^5, omega in 0.1..0.9, a in -1..-8, gamma in 2^-7..2^3, 5 folds.
  static GridSpec defaults();
  void validate() const;
  /// Gamma values actually searched (a single placeholder for kernels without gamma).
  std::vector<double> effective_gammas() const;
  KernelSpec kernel_for(double gamma) const;
};

struct Hyper {
  double C = 1.0;
  double omega = 1.0;
  double a = -1.0;
  double gamma = 1.0;
  friend bool operator==(const Hyper&, const Hyper&) = default;
};

struct GridRow {
  Hyper params;
  double mean_error = 0.0;
  double sd_error = 0.0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  Variant family = Variant::CSVM;
  KernelSpec::Kind kernel = KernelSpec::Kind::RBF;
  Hyper best;
  double best_error = 0.0;
  std::vector<GridRow> table;
};

/// Supplies the elite guide of an EDSVM fit from the (possibly
/// standardized) training part of a fold.
using GuideBuilder = std::function<EliteGuide(int fold, const Dataset& fold_train)>;

struct SearchOptions {
  SolverOptions solver;
  bool standardize = false;
  GuideBuilder guide;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Mean CV misclassification error per grid point on stratified folds;
/// argmin with ties broken by smaller C, larger omega, smaller gamma, then
/// grid order. Failed points are kept in the table and flagged.
GridResult grid_search(const Dataset& data, Variant family, const GridSpec& grid,
                       const SearchOptions& options = {});

/// Fits one model of the family. EDSVM families need `guide`.
TrainedModel fit_family(const Dataset& data, Variant family, const Hyper& h,
                        const GridSpec& grid, const SolverOptions& solver,
                        const EliteGuide* guide = nullptr);

/// Elite set and per-benchmark slacks of C-SVM, LS-SVM and LINEX-SVM fits.
struct BenchmarkSlacks {
  std::vector<Index> elite;
  std::vector<Vector> slacks;
  std::vector<std::string> ids;

  EliteGuide guide(const AggregationRule& rule) const;
};

BenchmarkSlacks benchmark_slacks(const Dataset& train, const Hyper& csvm, const Hyper& lssvm,
                                 const Hyper& linex, const GridSpec& grid,
                                 const SolverOptions& solver, double eps = 1e-8);

enum class Protocol { Holdout, CrossValidation };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

struct ExperimentConfig {
  Protocol protocol = Protocol::CrossValidation;
  GridSpec grid = GridSpec::defaults();
  std::vector<std::string> targets{"uci"};
  std::vector<Variant> models{Variant::CSVM, Variant::LINEXSVM, Variant::LSSVM,
                              Variant::CEDSVM, Variant::LSEDSVM};
  bool standardize = true;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;
  double elite_eps = 1e-8;
  SolverOptions solver;
  unsigned threads = 0;
};

struct MethodResult {
  std::string method;
  std::string target;  // empty for benchmark rows
  Hyper params;
  double cv_error = 0.0;
  Metrics mean;
  Metrics sd;
  std::vector<Metrics> per_fold;
  double elite_size = 0.0;
};

struct ExperimentReport {
  Protocol protocol = Protocol::CrossValidation;
  KernelSpec::Kind kernel = KernelSpec::Kind::RBF;
  Index n = 0;
  Index n_train = 0;
  Index n_test = 0;
  std::vector<MethodResult> rows;
  // Holdout only: final models keyed "method" or "method/target".
  std::vector<std::pair<std::string, TrainedModel>> models;
  // Holdout only: transform applied before fitting (identity when off).
  std::optional<Standardizer> standardizer;

  const MethodResult& row(const std::string& method, const std::string& target = {}) const;
};

/// Holdout: stratified split, tuning by CV on the training part, refit,
/// test-set metrics. CrossValidation: tuning by CV on all data, then fold
/// means and sample SDs of every metric at the selected point on the same
/// folds. Benchmarks are always tuned (their fits build the guides);
/// only requested models are reported.
ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config);

/// Aligned text table: method, target, and every metric (mean or mean +- sd).
std::string format_table(const ExperimentReport& report);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; results must be
/// written to per-index slots. The first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace edsvm
