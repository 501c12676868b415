#include "edsvm/baselines.hpp"
#include "edsvm/calibration.hpp"
#include "edsvm/cli.hpp"
#include "edsvm/diagnostics.hpp"
#include "edsvm/edsvm.hpp"
#include "edsvm/evaluation.hpp"
#include "edsvm/io.hpp"
#include "edsvm/metrics.hpp"
#include "edsvm/qp.hpp"
#include "edsvm/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace edsvm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

Dataset random_dataset(std::mt19937_64& rng, Index n, Index p, double shift) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = (i % 2 == 0) ? 1.0 : -1.0;
    for (Index j = 0; j < p; ++j) x(i, j) = g(rng) + (j == 0 ? shift * y[i] : 0.0);
  }
  return Dataset(std::move(x), std::move(y));
}

EliteGuide random_guide(std::mt19937_64& rng, Index n, Index m, double max_target) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  std::uniform_real_distribution<double> u(0.0, max_target);
  EliteGuide g;
  g.elite = idx;
  g.targets.resize(m);
  for (Index k = 0; k < m; ++k) g.targets[k] = u(rng);
  return g;
}

KernelSpec kernel_number(int k) {
  switch (k % 3) {
    case 0: return KernelSpec::linear();
    case 1: return KernelSpec::polynomial(2, 1.0);
    default: return KernelSpec::rbf(0.5);
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Instance {
  Dataset data;
  Matrix K;
  EDSVMConfig cfg;
};

std::vector<Instance> suite_one() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<Index> size(6, 50);
  const double Cs[] = {0.25, 1.0, 4.0};
  const double omegas[] = {0.1, 0.5, 0.9};
  std::vector<Instance> out;
  for (int i = 0; i < 100; ++i) {
    const Index n = size(rng);
    const Index m = std::uniform_int_distribution<Index>(0, n)(rng);
    Instance inst{random_dataset(rng, n, 2, 0.5), Matrix(), EDSVMConfig()};
    inst.cfg.kernel = kernel_number(i);
    inst.cfg.C = Cs[std::uniform_int_distribution<int>(0, 2)(rng)];
    inst.cfg.omega = omegas[std::uniform_int_distribution<int>(0, 2)(rng)];
    inst.cfg.guide = random_guide(rng, n, m, 2.5);
    inst.K = compute_gram(inst.cfg.kernel, inst.data.features());
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome criterion_duality_gap() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int solved = 0;
  for (Instance& inst : suite_one()) {
    for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
      inst.cfg.variant = v;
      const TrainedModel m = fit_edsvm(inst.data, inst.K, inst.cfg);
      const DualityGap g = duality_gap(inst.data, inst.K, inst.cfg, m.alpha, m.beta0);
      worst = std::max(worst, std::abs(g.relative));
      ++solved;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs <= 60.0,
          std::to_string(solved) + " fits, max relative gap " + fmt(worst) + ", " + fmt(secs) +
              " s (limits 1e-6, 60 s)"};
}

Outcome criterion_oracle() {
  double worst_obj = 0.0;
  double worst_alpha = 0.0;
  int compared = 0;
  for (Instance& inst : suite_one()) {
    if (inst.data.size() > 20) continue;
    for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
      inst.cfg.variant = v;
      const DualQP qp = build_edsvm_dual(inst.data, inst.K, inst.cfg);
      const QPSolution s = solve_smo(qp);
      const QPSolution r = solve_reference(qp);
      worst_obj = std::max(worst_obj, rel(s.objective, r.objective));
      worst_alpha = std::max(worst_alpha, (s.alpha - r.alpha).cwiseAbs().maxCoeff());
      ++compared;
    }
  }
  return {compared > 0 && worst_obj <= 1e-6 && worst_alpha <= 1e-4,
          std::to_string(compared) + " duals, max objective rel diff " + fmt(worst_obj) +
              ", max alpha diff " + fmt(worst_alpha) + " (limits 1e-6, 1e-4)"};
}

Outcome criterion_reductions() {
  std::mt19937_64 rng(3003);
  const double Cs[] = {0.25, 1.0, 4.0};
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 20 + 2 * rep;
    const Dataset d = random_dataset(rng, n, 3, 0.6);
    const Matrix probe = random_dataset(rng, 25, 3, 0.0).features();
    EDSVMConfig cfg;
    cfg.kernel = kernel_number(rep);
    cfg.C = Cs[rep % 3];
    cfg.guide = random_guide(rng, n, n / 3, 2.0);
    const auto diff = [&](const TrainedModel& a, const TrainedModel& b) {
      const double on_probe = (decision_values(a, probe) - decision_values(b, probe)).cwiseAbs().maxCoeff();
      const double on_train =
          (training_decision_values(a) - training_decision_values(b)).cwiseAbs().maxCoeff();
      worst = std::max({worst, on_probe, on_train});
    };
    cfg.omega = 1.0;
    cfg.variant = Variant::CEDSVM;
    diff(fit_edsvm(d, cfg), fit_csvm(d, cfg.C, cfg.kernel));
    cfg.variant = Variant::LSEDSVM;
    diff(fit_edsvm(d, cfg), fit_lssvm(d, cfg.C, cfg.kernel));
    cfg.variant = Variant::CEDSVM;
    cfg.omega = 0.3 + 0.03 * rep;
    cfg.guide = EliteGuide{};
    diff(fit_edsvm(d, cfg), fit_csvm(d, cfg.C * cfg.omega, cfg.kernel));
  }
  return {worst <= 1e-6, "20 datasets, max decision-value diff " + fmt(worst) + " (limit 1e-6)"};
}

Outcome criterion_calibration() {
  const double h = 1e-6;
  double worst = 0.0;
  int flat = 0;
  int points = 0;
  for (int i = 1; i <= 9; ++i) {
    const double w = 0.1 * i;
    for (int k = 0; k < 20; ++k) {
      const double xs = 0.1 + 0.23 * k;
      for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
        const auto loss = [&](double u) {
          return v == Variant::CEDSVM ? induced_loss_cedsvm(u, xs, w)
                                      : induced_loss_lsedsvm(u, xs, w);
        };
        const double numeric = (loss(h) - loss(-h)) / (2.0 * h);
        const PhiPrime p = phi_prime_at_zero(v, xs, w);
        worst = std::max(worst, std::abs(numeric - p.value));
        if (v == Variant::LSEDSVM && (1.0 - w) * xs > 1.0) {
          ++flat;
          worst = std::max(worst, std::abs(p.value));
        }
        ++points;
      }
    }
  }
  return {worst <= 1e-4 && flat > 0,
          std::to_string(points) + " (variant, omega, xi*) points, " + std::to_string(flat) +
              " in the LS locally constant regime, max |numeric - closed form| " + fmt(worst) +
              " (limit 1e-4)"};
}

Outcome criterion_margin_slack() {
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  Index checked = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = random_dataset(rng, 30 + rep, 2, 0.5);
    std::vector<TrainedModel> models;
    models.push_back(fit_csvm(d, 1.0, kernel_number(rep)));
    models.push_back(fit_lssvm(d, 0.5, kernel_number(rep + 1)));
    models.push_back(fit_linexsvm(d, 2.0, -3.0, kernel_number(rep + 2)));
    EDSVMConfig cfg;
    cfg.variant = Variant::CEDSVM;
    cfg.omega = 0.4;
    cfg.kernel = kernel_number(rep);
    cfg.guide = random_guide(rng, d.size(), 5, 1.5);
    models.push_back(fit_edsvm(d, cfg));
    for (std::size_t a = 0; a < models.size(); ++a) {
      for (std::size_t b = 0; b < models.size(); ++b) {
        if (a == b) continue;
        const Vector fa = training_decision_values(models[a]);
        const Vector fb = training_decision_values(models[b]);
        const Vector da = margin_deviations(models[a]);
        const Vector db = margin_deviations(models[b]);
        for (Index i = 0; i < d.size(); ++i) {
          const double lhs = (fa[i] - fb[i]) * (fa[i] - fb[i]);
          const double rhs = (da[i] - db[i]) * (da[i] - db[i]);
          worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, lhs));
          ++checked;
        }
      }
    }
  }
  return {worst <= 1e-12,
          std::to_string(checked) + " point/pair checks, max diff " + fmt(worst) + " (limit 1e-12)"};
}

EliteGuide self_guide(const TrainedModel& ref) {
  EliteGuide g;
  g.elite = support_indices(ref);
  const Vector xi = extract_slacks(ref);
  g.targets.resize(g.size());
  for (Index k = 0; k < g.size(); ++k) g.targets[k] = xi[g.elite[static_cast<std::size_t>(k)]];
  return g;
}

Outcome criterion_radii() {
  std::mt19937_64 rng(6006);
  double worst = 0.0;
  int ordering_checks = 0;
  bool ordering_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = random_dataset(rng, 30 + rep, 2, 0.5);
    const KernelSpec k = kernel_number(rep);
    const double C = rep % 2 ? 2.0 : 0.25;
    const TrainedModel ref = fit_csvm(d, C, k);
    const TrainedModel ls = fit_lssvm(d, C, k);
    const EliteGuide g = random_guide(rng, d.size(), 1 + rep, 1.5);
    for (double w : {0.1, 0.5, 0.9}) {
      for (Variant v : {Variant::CEDSVM, Variant::LSEDSVM}) {
        const DiagnosticsReport r = radii_report(ref, g, C, w, v, &ls);
        const double n = static_cast<double>(r.n);
        const double m = static_cast<double>(r.m);
        const double rhs = -2.0 * C * n * (1.0 - w) * r.hinge_risk_ref +
                           2.0 * C * m * (1.0 - w) * r.e_m_star;
        const double rhs_ls = -2.0 * C * n * (1.0 - w) * r.ls_risk_ref +
                              2.0 * C * m * (1.0 - w) * r.e_m_star_ls;
        worst = std::max(worst, std::abs(r.lambda_n_sq - r.lambda_svm_sq - rhs) /
                                    std::max(1.0, std::abs(rhs)));
        worst = std::max(worst, std::abs(r.gamma_ls - r.gamma_ls_svm - rhs_ls) /
                                    std::max(1.0, std::abs(rhs_ls)));
      }
      const DiagnosticsReport hinge = radii_report(ref, self_guide(ref), C, w, Variant::CEDSVM, &ls);
      ordering_ok = ordering_ok && hinge.e_m_star == 0.0 && hinge.lambda_n_sq <= hinge.lambda_svm_sq;
      const DiagnosticsReport sq = radii_report(ref, self_guide(ls), C, w, Variant::LSEDSVM, &ls);
      ordering_ok = ordering_ok && sq.e_m_star_ls == 0.0 && sq.gamma_ls <= sq.gamma_ls_svm;
      ordering_checks += 2;
    }
  }
  return {worst <= 1e-10 && ordering_ok,
          "max relative identity residual " + fmt(worst) + " (limit 1e-10); " +
              std::to_string(ordering_checks) + " zero-deviation radius orderings " +
              (ordering_ok ? "hold" : "violated")};
}

Outcome criterion_simulation() {
  const int reps = 20;
  const std::vector<std::pair<std::string, double>> table = {
      {"csvm", 0.850}, {"lssvm", 0.850}, {"cedsvm", 0.867}, {"lsedsvm", 0.867}};
  double bayes_sum = 0.0;
  double bayes_secs = 0.0;
  std::map<std::string, double> acc;
  for (int r = 1; r <= reps; ++r) {
    const std::uint64_t seed = static_cast<std::uint64_t>(r);
    const MixtureSpec spec = draw_centers(derive_seed(seed, 0));
    const auto t0 = Clock::now();
    bayes_sum += bayes_accuracy(spec, 100'000, derive_seed(seed, 4)).accuracy;
    bayes_secs += seconds_since(t0);

    const Dataset data = sample_dataset(spec, derive_seed(seed, 1));
    ExperimentConfig ec;
    ec.protocol = Protocol::Holdout;
    ec.grid = GridSpec::defaults();
    ec.grid.seed = derive_seed(seed, 3);
    ec.models = {Variant::CSVM, Variant::LSSVM, Variant::CEDSVM, Variant::LSEDSVM};
    ec.targets = {"max"};
    ec.standardize = false;
    ec.split_seed = derive_seed(seed, 2);
    const ExperimentReport report = run_experiment(data, ec);
    for (const auto& [method, ref] : table) {
      const bool edsvm = method == "cedsvm" || method == "lsedsvm";
      acc[method] += report.row(method, edsvm ? "max" : "").mean.accuracy;
    }
  }
  const double bayes = bayes_sum / reps;
  bool pass = std::abs(bayes - 0.85) <= 0.03 && bayes_secs <= 120.0;
  std::string detail = "Bayes " + fmt(bayes) + " (0.85 +/- 0.03, " + fmt(bayes_secs) + " s)";
  for (const auto& [method, ref] : table) {
    const double mean = acc[method] / reps;
    pass = pass && std::abs(mean - ref) <= 0.06;
    detail += "; " + method + " " + fmt(mean) + " (" + fmt(ref) + " +/- 0.06)";
  }
  return {pass, detail};
}

Outcome criterion_metric_oracle() {
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<Index> len(2, 200);
  int exact = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Index n = len(rng);
    const int levels = rep % 3 == 0 ? 4 : 1'000'000;
    std::uniform_int_distribution<int> lv(0, levels - 1);
    Vector s(n);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      s[i] = lv(rng) / 7.0;
      y[i] = i == 0 ? 1.0 : (i == 1 ? -1.0 : (lv(rng) % 2 ? 1.0 : -1.0));
    }
    double num = 0.0;
    double pairs = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (y[i] < 0) continue;
      for (Index j = 0; j < n; ++j) {
        if (y[j] > 0) continue;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        pairs += 1.0;
      }
    }
    if (roc_auc(s, y) == num / pairs) ++exact;
  }
  return {exact == 1000, std::to_string(exact) + "/1000 exact matches"};
}

int run_tool(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + EDSVM_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return status;
}

Outcome criterion_uci() {
  const fs::path data = fs::path(EDSVM_DATA_DIR) / "australian.csv";
  const fs::path out = fs::temp_directory_path() / "edsvm_acceptance_uci";
  fs::remove_all(out);
  fs::create_directories(out);
  const auto t0 = Clock::now();
  const int status = run_tool("cv --data \"" + data.string() +
                                  "\" --map01 --kernel linear --seed 1 --out \"" + out.string() + "\"",
                              out / "stdout.txt");
  const double secs = seconds_since(t0);
  if (status != 0) return {false, "cv exited with status " + std::to_string(status)};
  const Json j = Json::parse(read_text((out / "report.json").string()));
  double accuracy = -1.0;
  double sd = 0.0;
  for (const Json& row : j.at("report").at("rows")) {
    if (row.at("method") == "cedsvm") {
      accuracy = row.at("mean").at("accuracy").get<double>();
      sd = row.at("sd").at("accuracy").get<double>();
    }
  }
  return {accuracy >= 0.80 && accuracy <= 0.90 && secs <= 900.0,
          "cedsvm 5-fold accuracy " + fmt(accuracy) + " +/- " + fmt(sd) + " in [0.80, 0.90], " +
              fmt(secs) + " s (limit 900 s)"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path().string());
  }
  return files;
}

Outcome criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "edsvm_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root / "input");
  const MixtureSpec spec = draw_centers(77);
  write_dataset_csv((root / "input" / "data.csv").string(), sample_dataset(spec, 78));
  write_text((root / "input" / "grid.json").string(),
             R"({"grid": {"C": [0.5, 2], "omega": [0.3, 0.7], "a": [-1, -2], "gamma": [0.5, 1]}})");
  const std::string data = "\"" + (root / "input" / "data.csv").string() + "\"";
  const std::string cfg = "\"" + (root / "input" / "grid.json").string() + "\"";
  const fs::path out = root / "out";
  const auto o = [&](const std::string& name) { return " --out \"" + (out / name).string() + "\""; };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --seed 4 --config " + cfg + " --mc-samples 20000 --grid-resolution 30" +
                       o("simulate")},
      {"fit", "fit --data " + data + " --model cedsvm --targets max --omega 0.4 --C 2 --gamma 0.5" +
                  o("fit")},
      {"predict", "predict --data " + data + " --model-file \"" + (out / "fit" / "model.json").string() +
                      "\"" + o("predict")},
      {"cv", "cv --seed 9 --config " + cfg + " --data " + data + o("cv")},
      {"diagnose", "diagnose --data " + data + " --model lsedsvm --targets max --omega 0.5" + o("diagnose")},
      {"diagnose-self", "diagnose --data " + data + " --targets self --omega 0.5" + o("diagnose_self")},
  };
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(out);
    fs::create_directories(out / "logs");
    for (const auto& [name, args] : commands) {
      const int status = run_tool(args, out / "logs" / (name + ".txt"));
      if (status != 0) {
        return {false, name + " exited with status " + std::to_string(status) + ": " +
                           read_text((out / "logs" / (name + ".txt")).string())};
      }
    }
    runs.push_back(snapshot(out));
  }
  std::vector<std::string> differing;
  for (const auto& [file, text] : runs[0]) {
    const auto it = runs[1].find(file);
    if (it == runs[1].end() || it->second != text) differing.push_back(file);
  }
  if (runs[0].size() != runs[1].size()) differing.push_back("<file list>");
  std::string detail = std::to_string(commands.size()) + " commands, " +
                       std::to_string(runs[0].size()) + " output files compared";
  for (const std::string& f : differing) detail += "; differs: " + f;
  return {differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"duality gap suite", criterion_duality_gap},
      {"SMO vs reference oracle", criterion_oracle},
      {"reduction identities", criterion_reductions},
      {"calibration closed forms", criterion_calibration},
      {"margin-slack identity", criterion_margin_slack},
      {"radii identities", criterion_radii},
      {"simulation reproduction", criterion_simulation},
      {"metric oracle", criterion_metric_oracle},
      {"UCI-scale behavior", criterion_uci},
      {"CLI determinism", criterion_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first
              << "): " << o.detail << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
