#include "edsvm/evaluation.hpp"

#include "edsvm/edsvm.hpp"
#include "edsvm/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace edsvm {
namespace {

constexpr double kTieTol = 1e-12;

bool is_edsvm(Variant v) { return v == Variant::CEDSVM || v == Variant::LSEDSVM; }

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> v;
  for (int e = lo; e <= hi; ++e) v.push_back(std::ldexp(1.0, e));
  return v;
}

void shuffle_indices(std::vector<Index>& idx, std::mt19937_64& rng) {
  // Explicit Fisher-Yates so the permutation does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
}

std::vector<Index> class_members(const Vector& labels, double cls) {
  std::vector<Index> idx;
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == cls) idx.push_back(i);
  }
  return idx;
}

struct Fold {
  Dataset train;
  Dataset test;
};

std::vector<Fold> make_folds(const Dataset& data, int k, std::uint64_t seed, bool standardize) {
  const auto splits = kfold_splits(stratified_kfold(data.labels(), k, seed), k);
  std::vector<Fold> folds;
  for (const Split& s : splits) {
    Fold f{data.subset(s.train), data.subset(s.test)};
    if (standardize) {
      const Standardizer st = Standardizer::fit(f.train.features());
      f.train = st.transform(f.train);
      f.test = st.transform(f.test);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

struct KernelBlock {
  Matrix K;        // train x train
  Matrix K_cross;  // test x train
  Matrix features;
};

KernelBlock kernel_block(const Fold& f, const KernelSpec& kernel, bool linex) {
  KernelBlock b;
  b.K = compute_gram(kernel, f.train.features());
  b.K_cross = compute_gram(kernel, f.test.features(), f.train.features());
  if (linex) b.features = linex_features(f.train, b.K, kernel);
  return b;
}

Vector cross_scores(const TrainedModel& m, const Matrix& K_cross) {
  const Vector c = m.alpha.cwiseProduct(m.train.labels());
  return (K_cross * c).array() + m.beta0;
}

double error_rate(const Vector& scores, const Vector& labels) {
  Index wrong = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    wrong += ((scores[i] >= 0.0 ? 1.0 : -1.0) != labels[i]) ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

TrainedModel fit_with_kernel(const Dataset& train, const KernelBlock& b, Variant family,
                             const Hyper& h, const KernelSpec& kernel,
                             const SolverOptions& solver, const EliteGuide* guide,
                             Vector* warm = nullptr) {
  switch (family) {
    case Variant::CSVM:
      return fit_csvm(train, b.K, h.C, kernel, solver);
    case Variant::LSSVM:
      return fit_lssvm(train, b.K, h.C, kernel, solver);
    case Variant::LINEXSVM:
      return fit_linexsvm(train, b.K, b.features, h.C, h.a, kernel, solver, warm);
    case Variant::CEDSVM:
    case Variant::LSEDSVM: {
      require(guide != nullptr, "fit: " + to_string(family) + " needs an elite guide");
      EDSVMConfig cfg;
      cfg.variant = family;
      cfg.C = h.C;
      cfg.omega = h.omega;
      cfg.guide = *guide;
      cfg.kernel = kernel;
      return fit_edsvm(train, b.K, cfg, solver);
    }
  }
  throw InvalidArgument("fit: unknown model family");
}

// Strict "a is preferred over b" for grid selection.
bool better(const GridRow& a, std::size_t ia, const GridRow& b, std::size_t ib) {
  if (std::abs(a.mean_error - b.mean_error) > kTieTol) return a.mean_error < b.mean_error;
  if (a.params.C != b.params.C) return a.params.C < b.params.C;
  if (a.params.omega != b.params.omega) return a.params.omega > b.params.omega;
  if (a.params.gamma != b.params.gamma) return a.params.gamma < b.params.gamma;
  return ia < ib;
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

void summarize(MethodResult& r) {
  for (const std::string& name : metric_names()) {
    std::vector<double> v;
    for (const Metrics& m : r.per_fold) v.push_back(metric_value(m, name));
    double mean = 0.0;
    double sd = 0.0;
    mean_sd(v, mean, sd);
    set_metric_value(r.mean, name, mean);
    set_metric_value(r.sd, name, sd);
  }
  r.mean.precision_defined = std::all_of(r.per_fold.begin(), r.per_fold.end(),
                                         [](const Metrics& m) { return m.precision_defined; });
}

std::vector<std::string> benchmark_ids() {
  return {to_string(Variant::CSVM), to_string(Variant::LSSVM), to_string(Variant::LINEXSVM)};
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& X) {
  require(X.rows() >= 1, "standardizer: empty matrix");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.scale = Vector::Ones(X.cols());
  if (X.rows() > 1) {
    for (Index j = 0; j < X.cols(); ++j) {
      const double ss = (X.col(j).array() - s.mean[j]).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(X.rows() - 1));
      if (sd > 0.0) s.scale[j] = sd;
    }
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& X) const {
  require(X.cols() == mean.size(), "standardizer: dimension mismatch");
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Dataset Standardizer::transform(const Dataset& d) const {
  return Dataset(transform(d.features()), d.labels());
}

std::vector<int> stratified_kfold(const Vector& labels, int k, std::uint64_t seed) {
  require(k >= 2, "stratified_kfold: need at least 2 folds");
  std::vector<int> fold(static_cast<std::size_t>(labels.size()), -1);
  std::mt19937_64 rng(seed);
  int next = 0;
  for (double cls : {1.0, -1.0}) {
    std::vector<Index> idx = class_members(labels, cls);
    require(static_cast<Index>(idx.size()) >= k,
            "stratified_kfold: class " + std::string(cls > 0 ? "+1" : "-1") + " has " +
                std::to_string(idx.size()) + " members, fewer than k = " + std::to_string(k));
    shuffle_indices(idx, rng);
    for (Index i : idx) {
      fold[static_cast<std::size_t>(i)] = next;
      next = (next + 1) % k;
    }
  }
  for (int f : fold) require(f >= 0, "stratified_kfold: labels must be -1 or +1");
  return fold;
}

std::vector<Split> kfold_splits(const std::vector<int>& fold, int k) {
  require(k >= 2, "kfold_splits: need at least 2 folds");
  std::vector<Split> splits(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < fold.size(); ++i) {
    require(fold[i] >= 0 && fold[i] < k, "kfold_splits: fold id out of range");
    for (int f = 0; f < k; ++f) {
      auto& part = f == fold[i] ? splits[static_cast<std::size_t>(f)].test
                                : splits[static_cast<std::size_t>(f)].train;
      part.push_back(static_cast<Index>(i));
    }
  }
  return splits;
}

Split stratified_split(const Vector& labels, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0,
          "stratified_split: test fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  Split s;
  for (double cls : {1.0, -1.0}) {
    std::vector<Index> idx = class_members(labels, cls);
    shuffle_indices(idx, rng);
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * idx.size()));
    require(n_test >= 1 && n_test < idx.size(),
            "stratified_split: each class needs members in both parts");
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.C_values = powers_of_two(-3, 5);
  g.omega_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  g.a_values = {-1, -2, -3, -4, -5, -6, -7, -8};
  g.gamma_values = powers_of_two(-7, 3);
  return g;
}

void GridSpec::validate() const {
  require(!C_values.empty(), "grid: C_values is empty");
  require(!omega_values.empty(), "grid: omega_values is empty");
  require(!a_values.empty(), "grid: a_values is empty");
  require(folds >= 2, "grid: folds must be at least 2");
  for (double c : C_values) require(std::isfinite(c) && c > 0.0, "grid: C must be positive");
  for (double w : omega_values) {
    require(std::isfinite(w) && w > 0.0 && w <= 1.0, "grid: omega must lie in (0, 1]");
  }
  for (double a : a_values) require(std::isfinite(a) && a != 0.0, "grid: a must be nonzero");
  if (kernel == KernelSpec::Kind::RBF) {
    require(!gamma_values.empty(), "grid: gamma_values is empty");
    for (double g : gamma_values) {
      require(std::isfinite(g) && g > 0.0, "grid: gamma must be positive");
    }
  }
  if (kernel == KernelSpec::Kind::Polynomial) KernelSpec::polynomial(degree, coef0).validate();
}

std::vector<double> GridSpec::effective_gammas() const {
  if (kernel == KernelSpec::Kind::RBF) return gamma_values;
  return {0.0};
}

KernelSpec GridSpec::kernel_for(double gamma) const {
  switch (kernel) {
    case KernelSpec::Kind::Linear:
      return KernelSpec::linear();
    case KernelSpec::Kind::Polynomial:
      return KernelSpec::polynomial(degree, coef0);
    case KernelSpec::Kind::RBF:
      return KernelSpec::rbf(gamma);
  }
  throw InvalidArgument("grid: unknown kernel kind");
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = n;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

GridResult grid_search(const Dataset& data, Variant family, const GridSpec& grid,
                       const SearchOptions& options) {
  grid.validate();
  data.require_trainable();
  const bool edsvm = is_edsvm(family);
  require(!edsvm || static_cast<bool>(options.guide),
          "grid_search: " + to_string(family) + " needs a guide builder");

  const std::vector<Fold> folds = make_folds(data, grid.folds, grid.seed, options.standardize);
  const std::size_t k = folds.size();
  std::vector<EliteGuide> guides(k);
  if (edsvm) {
    for (std::size_t f = 0; f < k; ++f) {
      guides[f] = options.guide(static_cast<int>(f), folds[f].train);
    }
  }

  const std::vector<double> gammas = grid.effective_gammas();
  std::vector<double> inner{0.0};
  if (edsvm) inner = grid.omega_values;
  if (family == Variant::LINEXSVM) inner = grid.a_values;
  const std::size_t nc = grid.C_values.size();
  const std::size_t ni = inner.size();

  GridResult result;
  result.family = family;
  result.kernel = grid.kernel;
  result.table.resize(gammas.size() * nc * ni);
  std::vector<std::vector<double>> errors(result.table.size(), std::vector<double>(k, 0.0));

  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const KernelSpec kernel = grid.kernel_for(gammas[g]);
    std::vector<KernelBlock> blocks(k);
    parallel_for(k, options.threads, [&](std::size_t f) {
      blocks[f] = kernel_block(folds[f], kernel, family == Variant::LINEXSVM);
    });
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < ni; ++i) {
        GridRow& row = result.table[(g * nc + c) * ni + i];
        row.params.C = grid.C_values[c];
        row.params.gamma = gammas[g];
        if (edsvm) row.params.omega = inner[i];
        if (family == Variant::LINEXSVM) row.params.a = inner[i];
      }
    }
    parallel_for(nc, options.threads, [&](std::size_t c) {
      for (std::size_t f = 0; f < k; ++f) {
        Vector warm;
        for (std::size_t i = 0; i < ni; ++i) {
          const std::size_t r = (g * nc + c) * ni + i;
          GridRow& row = result.table[r];
          if (row.failed) continue;
          try {
            const TrainedModel m =
                fit_with_kernel(folds[f].train, blocks[f], family, row.params, kernel,
                                options.solver, edsvm ? &guides[f] : nullptr, &warm);
            errors[r][f] = error_rate(cross_scores(m, blocks[f].K_cross), folds[f].test.labels());
          } catch (const SolverError& e) {
            row.failed = true;
            row.error = "fold " + std::to_string(f) + ": " + e.what();
            warm = Vector();
          }
        }
      }
    });
  }

  std::size_t best = result.table.size();
  for (std::size_t r = 0; r < result.table.size(); ++r) {
    GridRow& row = result.table[r];
    if (row.failed) {
      row.mean_error = std::numeric_limits<double>::infinity();
      row.sd_error = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    mean_sd(errors[r], row.mean_error, row.sd_error);
    if (best == result.table.size() || better(row, r, result.table[best], best)) best = r;
  }
  if (best == result.table.size()) {
    throw SolverError("grid_search: every grid point failed for " + to_string(family) + " (" +
                      result.table.front().error + ")");
  }
  result.best = result.table[best].params;
  result.best_error = result.table[best].mean_error;
  return result;
}

TrainedModel fit_family(const Dataset& data, Variant family, const Hyper& h,
                        const GridSpec& grid, const SolverOptions& solver,
                        const EliteGuide* guide) {
  data.require_trainable();
  const KernelSpec kernel = grid.kernel_for(h.gamma);
  KernelBlock b;
  b.K = compute_gram(kernel, data.features());
  if (family == Variant::LINEXSVM) b.features = linex_features(data, b.K, kernel);
  return fit_with_kernel(data, b, family, h, kernel, solver, guide);
}

EliteGuide BenchmarkSlacks::guide(const AggregationRule& rule) const {
  EliteGuide g;
  g.elite = elite;
  g.targets = aggregate_slacks(slacks, ids, elite, rule);
  g.source = ids;
  g.source.push_back("rule=" + rule.describe());
  return g;
}

BenchmarkSlacks benchmark_slacks(const Dataset& train, const Hyper& csvm, const Hyper& lssvm,
                                 const Hyper& linex, const GridSpec& grid,
                                 const SolverOptions& solver, double eps) {
  std::vector<TrainedModel> models;
  models.push_back(fit_family(train, Variant::CSVM, csvm, grid, solver));
  models.push_back(fit_family(train, Variant::LSSVM, lssvm, grid, solver));
  models.push_back(fit_family(train, Variant::LINEXSVM, linex, grid, solver));
  BenchmarkSlacks b;
  b.elite = build_elite_set(models, eps);
  b.ids = benchmark_ids();
  for (const TrainedModel& m : models) b.slacks.push_back(extract_slacks(m));
  return b;
}

std::string to_string(Protocol p) {
  return p == Protocol::Holdout ? "holdout" : "cv";
}

Protocol parse_protocol(const std::string& s) {
  if (s == "holdout") return Protocol::Holdout;
  if (s == "cv") return Protocol::CrossValidation;
  throw InvalidArgument("unknown protocol '" + s + "' (expected holdout or cv)");
}

const MethodResult& ExperimentReport::row(const std::string& method,
                                          const std::string& target) const {
  for (const MethodResult& r : rows) {
    if (r.method == method && r.target == target) return r;
  }
  throw InvalidArgument("report: no row for " + method + (target.empty() ? "" : "/" + target));
}

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config) {
  data.require_trainable();
  config.grid.validate();
  require(!config.models.empty(), "experiment: no models requested");
  require(std::isfinite(config.elite_eps) && config.elite_eps >= 0.0,
          "experiment: elite eps must be nonnegative");
  const bool wants_edsvm =
      std::any_of(config.models.begin(), config.models.end(), is_edsvm);
  std::vector<TargetPreset> presets;
  for (const std::string& t : config.targets) presets.push_back(target_preset(t));
  require(!wants_edsvm || !presets.empty(), "experiment: EDSVM models need at least one target");

  ExperimentReport report;
  report.protocol = config.protocol;
  report.kernel = config.grid.kernel;
  report.n = data.size();

  Dataset tuning = data;
  Dataset train_final;
  Dataset test_final;
  if (config.protocol == Protocol::Holdout) {
    const Split s = stratified_split(data.labels(), config.test_fraction, config.split_seed);
    tuning = data.subset(s.train);
    train_final = tuning;
    test_final = data.subset(s.test);
    if (config.standardize) {
      report.standardizer = Standardizer::fit(train_final.features());
      train_final = report.standardizer->transform(train_final);
      test_final = report.standardizer->transform(test_final);
    }
    report.n_train = train_final.size();
    report.n_test = test_final.size();
  } else {
    report.n_train = data.size();
  }

  SearchOptions opts;
  opts.solver = config.solver;
  opts.standardize = config.standardize;
  opts.threads = config.threads;

  std::map<Variant, GridResult> bench;
  for (Variant v : {Variant::CSVM, Variant::LSSVM, Variant::LINEXSVM}) {
    bench.emplace(v, grid_search(tuning, v, config.grid, opts));
  }
  const Hyper& hc = bench.at(Variant::CSVM).best;
  const Hyper& hl = bench.at(Variant::LSSVM).best;
  const Hyper& hx = bench.at(Variant::LINEXSVM).best;

  std::mutex cache_mu;
  std::map<int, BenchmarkSlacks> fold_cache;
  const auto fold_slacks = [&](int fold, const Dataset& train) -> const BenchmarkSlacks& {
    std::lock_guard<std::mutex> lock(cache_mu);
    auto it = fold_cache.find(fold);
    if (it == fold_cache.end()) {
      it = fold_cache
               .emplace(fold, benchmark_slacks(train, hc, hl, hx, config.grid, config.solver,
                                               config.elite_eps))
               .first;
    }
    return it->second;
  };

  struct Entry {
    Variant variant;
    std::string target;
    AggregationRule rule;
    Hyper best;
    double cv_error = 0.0;
  };
  std::vector<Entry> entries;
  for (Variant v : config.models) {
    if (is_edsvm(v)) continue;
    entries.push_back({v, "", {}, bench.at(v).best, bench.at(v).best_error});
  }
  std::map<std::pair<Variant, std::string>, GridResult> searched;
  for (const TargetPreset& p : presets) {
    for (Variant v : config.models) {
      if (!is_edsvm(v)) continue;
      const AggregationRule rule = v == Variant::CEDSVM ? p.cedsvm : p.lsedsvm;
      const auto key = std::make_pair(v, rule.describe());
      auto it = searched.find(key);
      if (it == searched.end()) {
        SearchOptions eo = opts;
        eo.guide = [&, rule](int fold, const Dataset& train) {
          return fold_slacks(fold, train).guide(rule);
        };
        it = searched.emplace(key, grid_search(tuning, v, config.grid, eo)).first;
      }
      entries.push_back({v, p.name, rule, it->second.best, it->second.best_error});
    }
  }

  if (config.protocol == Protocol::CrossValidation) {
    const std::vector<Fold> folds =
        make_folds(tuning, config.grid.folds, config.grid.seed, config.standardize);
    for (const Entry& e : entries) {
      MethodResult r{to_string(e.variant), e.target, e.best, e.cv_error, {}, {}, {}, 0.0};
      for (std::size_t f = 0; f < folds.size(); ++f) {
        std::optional<EliteGuide> guide;
        if (is_edsvm(e.variant)) {
          guide = fold_slacks(static_cast<int>(f), folds[f].train).guide(e.rule);
          r.elite_size += static_cast<double>(guide->size()) / static_cast<double>(folds.size());
        }
        const TrainedModel m = fit_family(folds[f].train, e.variant, e.best, config.grid,
                                          config.solver, guide ? &*guide : nullptr);
        r.per_fold.push_back(
            compute_metrics(decision_values(m, folds[f].test.features()), folds[f].test.labels()));
      }
      summarize(r);
      report.rows.push_back(std::move(r));
    }
    return report;
  }

  const BenchmarkSlacks full =
      benchmark_slacks(train_final, hc, hl, hx, config.grid, config.solver, config.elite_eps);
  for (const Entry& e : entries) {
    MethodResult r{to_string(e.variant), e.target, e.best, e.cv_error, {}, {}, {}, 0.0};
    std::optional<EliteGuide> guide;
    if (is_edsvm(e.variant)) {
      guide = full.guide(e.rule);
      r.elite_size = static_cast<double>(guide->size());
    }
    TrainedModel m = fit_family(train_final, e.variant, e.best, config.grid, config.solver,
                                guide ? &*guide : nullptr);
    r.per_fold.push_back(
        compute_metrics(decision_values(m, test_final.features()), test_final.labels()));
    summarize(r);
    report.models.emplace_back(e.target.empty() ? r.method : r.method + "/" + e.target,
                               std::move(m));
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string format_table(const ExperimentReport& report) {
  const bool cv = report.protocol == Protocol::CrossValidation;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"method", "target"};
  for (const std::string& m : metric_names()) header.push_back(m);
  cells.push_back(header);
  for (const MethodResult& r : report.rows) {
    std::vector<std::string> line{r.method, r.target.empty() ? "-" : r.target};
    for (const std::string& name : metric_names()) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(4) << metric_value(r.mean, name);
      if (cv) os << " +/- " << metric_value(r.sd, name);
      line.push_back(os.str());
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t j = 0; j < line.size(); ++j) width[j] = std::max(width[j], line[j].size());
  }
  std::ostringstream out;
  out << "# protocol=" << to_string(report.protocol) << " n=" << report.n;
  if (!cv) out << " n_train=" << report.n_train << " n_test=" << report.n_test;
  out << (cv ? " (fold mean +/- sample sd)" : " (test split)")
      << "; pr_auc is step-wise average precision\n";
  for (const auto& line : cells) {
    for (std::size_t j = 0; j < line.size(); ++j) {
      out << (j == 0 ? "" : "  ") << std::left << std::setw(static_cast<int>(width[j]))
          << line[j];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace edsvm
