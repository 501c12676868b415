#include "edsvm/cli.hpp"

#include "edsvm/baselines.hpp"
#include "edsvm/diagnostics.hpp"
#include "edsvm/edsvm.hpp"
#include "edsvm/elite.hpp"
#include "edsvm/simulation.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

namespace edsvm {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

void check_keys(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  require(j.is_object(), where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    require(allowed.count(key) > 0, where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument("config: key '" + key + "' has the wrong type");
  }
}

std::vector<std::string> string_list(const Json& j, const std::string& key) {
  const Json& v = j.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  return get_as<std::vector<std::string>>(j, key);
}

std::vector<double> number_list(const Json& j, const std::string& key) {
  const Json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return get_as<std::vector<double>>(j, key);
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& item : raw) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto pos = item.find(',', start);
      const std::string part = item.substr(start, pos == std::string::npos ? std::string::npos
                                                                           : pos - start);
      if (!part.empty()) out.push_back(part);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  return out;
}

Json config_to_json(const RunConfig& c) {
  Json j{{"data", c.data},
         {"map01", c.map01},
         {"seed", c.seed},
         {"models", c.models},
         {"kernel", c.kernel},
         {"targets", c.targets},
         {"elite_eps", c.elite_eps},
         {"test_fraction", c.test_fraction},
         {"grid", to_json(c.grid)}};
  if (c.kernel == "polynomial") {
    j["degree"] = c.degree;
    j["coef0"] = c.coef0;
  }
  if (c.C) j["C"] = *c.C;
  if (c.omega) j["omega"] = *c.omega;
  if (c.a) j["a"] = *c.a;
  if (c.gamma) j["gamma"] = *c.gamma;
  if (c.standardize) j["standardize"] = *c.standardize;
  if (!c.protocol.empty()) j["protocol"] = c.protocol;
  if (!c.model_file.empty()) j["model_file"] = c.model_file;
  return j;
}

// Flag values as given on the command line; only options that were
// actually passed override the config file.
struct Flags {
  std::string config;
  std::string data;
  bool map01 = false;
  std::uint64_t seed = 0;
  std::vector<std::string> models;
  std::string kernel;
  int degree = 2;
  double coef0 = 1.0;
  double C = 0.0;
  double omega = 0.0;
  double a = 0.0;
  double gamma = 0.0;
  std::vector<std::string> targets;
  double elite_eps = 0.0;
  bool standardize = false;
  bool no_standardize = false;
  std::string protocol;
  int folds = 5;
  double test_fraction = 0.3;
  std::string out;
  std::string model_file;
  unsigned threads = 0;
  long long mc_samples = 0;
  int grid_resolution = 0;
};

struct Options {
  std::map<std::string, CLI::Option*> by_name;
  bool given(const std::string& name) const {
    auto it = by_name.find(name);
    return it != by_name.end() && it->second->count() > 0;
  }
};

void add_options(CLI::App* app, Flags& f) {
  auto add = [&](const std::string& name, auto& target, const std::string& help) {
    app->add_option("--" + name, target, help);
  };
  add("config", f.config, "JSON config file (flags override its values)");
  add("data", f.data, "input CSV with a header row and a 'label' column");
  app->add_flag("--map01", f.map01, "map 0/1 labels to -1/+1");
  add("seed", f.seed, "random seed");
  app->add_option("--model", f.models, "model(s): csvm, lssvm, linexsvm, cedsvm, lsedsvm");
  add("kernel", f.kernel, "linear, polynomial or rbf");
  add("degree", f.degree, "polynomial degree");
  add("coef0", f.coef0, "polynomial offset");
  add("C", f.C, "regularization constant (fixes the C grid)");
  add("omega", f.omega, "guidance weight in (0, 1] (fixes the omega grid)");
  add("a", f.a, "LINEX shape parameter (fixes the a grid)");
  add("gamma", f.gamma, "RBF width (fixes the gamma grid)");
  app->add_option(
      "--targets", f.targets, "target-slack rule(s): min, mean, max, linex, uci, uci-cedsvm, uci-lsedsvm");
  add("elite-eps", f.elite_eps, "support-vector threshold for the elite set");
  app->add_flag("--standardize", f.standardize, "z-score features");
  app->add_flag("--no-standardize", f.no_standardize, "do not z-score features");
  add("protocol", f.protocol, "cv or holdout");
  add("folds", f.folds, "cross-validation folds");
  add("test-fraction", f.test_fraction, "holdout test fraction");
  add("out", f.out, "output directory");
  add("model-file", f.model_file, "model JSON written by 'fit'");
  add("threads", f.threads, "worker threads (0: all cores)");
  add("mc-samples", f.mc_samples, "Monte Carlo samples for the Bayes accuracy");
  add("grid-resolution", f.grid_resolution, "boundary grid points per axis");
}

RunConfig resolve(const Flags& f, const Options& o) {
  RunConfig c;
  if (o.given("config")) c = config_from_json([&] {
      try {
        return Json::parse(read_text(f.config));
      } catch (const Json::parse_error& e) {
        throw InvalidArgument(f.config + ": " + e.what());
      }
    }());
  if (o.given("data")) c.data = f.data;
  if (o.given("map01")) c.map01 = f.map01;
  if (o.given("seed")) c.seed = f.seed;
  if (o.given("model")) c.models = split_list(f.models);
  if (o.given("kernel")) c.kernel = f.kernel;
  if (o.given("degree")) c.degree = f.degree;
  if (o.given("coef0")) c.coef0 = f.coef0;
  if (o.given("C")) c.C = f.C;
  if (o.given("omega")) c.omega = f.omega;
  if (o.given("a")) c.a = f.a;
  if (o.given("gamma")) c.gamma = f.gamma;
  if (o.given("targets")) c.targets = split_list(f.targets);
  if (o.given("elite-eps")) c.elite_eps = f.elite_eps;
  if (o.given("standardize")) c.standardize = true;
  if (o.given("no-standardize")) {
    require(!o.given("standardize"), "--standardize and --no-standardize conflict");
    c.standardize = false;
  }
  if (o.given("protocol")) c.protocol = f.protocol;
  if (o.given("folds")) c.grid.folds = f.folds;
  if (o.given("test-fraction")) c.test_fraction = f.test_fraction;
  if (o.given("out")) c.out = f.out;
  if (o.given("model-file")) c.model_file = f.model_file;
  if (o.given("threads")) c.threads = f.threads;
  if (o.given("mc-samples")) c.simulation.mc_samples = f.mc_samples;
  if (o.given("grid-resolution")) c.simulation.grid_resolution = f.grid_resolution;

  c.grid.kernel = parse_kernel_kind(c.kernel);
  c.kernel = to_string(c.grid.kernel);
  c.grid.degree = c.degree;
  c.grid.coef0 = c.coef0;
  c.grid.seed = derive_seed(c.seed, 3);
  if (c.C) c.grid.C_values = {*c.C};
  if (c.omega) c.grid.omega_values = {*c.omega};
  if (c.a) c.grid.a_values = {*c.a};
  if (c.gamma) c.grid.gamma_values = {*c.gamma};
  c.grid.validate();
  for (const std::string& m : c.models) parse_variant(m);
  require(std::isfinite(c.elite_eps) && c.elite_eps >= 0.0, "elite_eps must be nonnegative");
  return c;
}

std::vector<Variant> model_list(const RunConfig& c, std::vector<Variant> fallback) {
  if (c.models.empty()) return fallback;
  std::vector<Variant> out;
  for (const std::string& m : c.models) {
    const Variant v = parse_variant(m);
    require(std::find(out.begin(), out.end(), v) == out.end(),
            "model '" + to_string(v) + "' listed twice");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> target_list(const RunConfig& c, std::vector<std::string> fallback) {
  const std::vector<std::string> t = c.targets.empty() ? fallback : c.targets;
  for (const std::string& name : t) target_preset(name);
  return t;
}

KernelSpec kernel_of(const RunConfig& c) {
  const KernelSpec k = c.grid.kernel_for(c.gamma.value_or(1.0));
  k.validate();
  return k;
}

Hyper fixed_hyper(const RunConfig& c, double default_omega) {
  Hyper h;
  h.C = c.C.value_or(1.0);
  h.omega = c.omega.value_or(default_omega);
  h.a = c.a.value_or(-1.0);
  h.gamma = c.gamma.value_or(1.0);
  return h;
}

bool is_edsvm(Variant v) { return v == Variant::CEDSVM || v == Variant::LSEDSVM; }

std::filesystem::path prepare_out(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out + "': " + ec.message());
  return std::filesystem::path(c.out);
}

std::string file_key(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

Dataset load_data(const RunConfig& c, std::vector<std::string>* names = nullptr) {
  require(!c.data.empty(), "no input data (set --data or 'data' in the config)");
  return read_dataset_csv(c.data, c.map01, names);
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  require(c.protocol.empty() || c.protocol == "holdout", "simulate uses the holdout protocol");
  require(c.data.empty(), "simulate generates its own data; remove 'data'");
  require(c.simulation.mc_samples >= 10'000, "simulation: mc_samples must be at least 10000");
  require(c.simulation.grid_resolution >= 2, "simulation: grid_resolution must be at least 2");
  ExperimentConfig ec;
  ec.protocol = Protocol::Holdout;
  ec.grid = c.grid;
  ec.models = model_list(c, ec.models);
  ec.targets = target_list(c, {"min", "mean", "max", "linex"});
  ec.standardize = c.standardize.value_or(false);
  ec.test_fraction = c.test_fraction;
  ec.split_seed = derive_seed(c.seed, 2);
  ec.elite_eps = c.elite_eps;
  ec.threads = c.threads;

  MixtureSpec spec = draw_centers(derive_seed(c.seed, 0), c.simulation.centers_per_class);
  spec.per_center = c.simulation.per_center;
  const Dataset data = sample_dataset(spec, derive_seed(c.seed, 1));
  const auto dir = prepare_out(c);
  write_dataset_csv((dir / "dataset.csv").string(), data);
  Matrix centers(spec.centers_pos.rows() + spec.centers_neg.rows(), 3);
  centers << Vector::Ones(spec.centers_pos.rows()), spec.centers_pos,
      -Vector::Ones(spec.centers_neg.rows()), spec.centers_neg;
  write_csv((dir / "centers.csv").string(), {"label", "x1", "x2"}, centers);

  const ExperimentReport report = run_experiment(data, ec);
  const std::uint64_t mc_seed = derive_seed(c.seed, 4);
  const BayesEstimate bayes = bayes_accuracy(spec, c.simulation.mc_samples, mc_seed);

  const Matrix grid = boundary_grid(data.features(), c.simulation.grid_resolution,
                                    c.simulation.grid_pad);
  const auto write_boundary = [&](const std::string& name, const Vector& scores) {
    Matrix v(grid.rows(), 3);
    v << grid, scores;
    write_csv((dir / ("boundary_" + name + ".csv")).string(), {"x1", "x2", "score"}, v);
  };
  write_boundary("bayes", bayes_scores(spec, grid));
  Json mc = Json::object();
  for (const auto& [key, model] : report.models) {
    ModelFile mf{model, report.standardizer, {"x1", "x2"}};
    write_boundary(file_key(key), model_scores(mf, grid));
    const BayesEstimate e = mixture_accuracy(spec, c.simulation.mc_samples, mc_seed,
                                             [&](const Matrix& Z) { return model_scores(mf, Z); });
    mc[key] = to_json(e);
  }

  Json j{{"config", config_to_json(c)},
         {"bayes_accuracy", to_json(bayes)},
         {"mixture_accuracy", std::move(mc)},
         {"report", to_json(report)}};
  write_text((dir / "metrics.json").string(), dump_json(j));
  const std::string table = format_table(report);
  write_text((dir / "report.txt").string(), table);
  out << table << "bayes accuracy " << format_double(bayes.accuracy) << " (se "
      << format_double(bayes.std_error) << ")\n";
  return kExitOk;
}

EliteGuide guide_for(const Dataset& data, Variant variant, const std::string& target,
                     const Hyper& h, const RunConfig& c) {
  const BenchmarkSlacks b = benchmark_slacks(data, h, h, h, c.grid, {}, c.elite_eps);
  const TargetPreset p = target_preset(target);
  return b.guide(variant == Variant::CEDSVM ? p.cedsvm : p.lsedsvm);
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  const std::vector<Variant> models = model_list(c, {Variant::CSVM});
  require(models.size() == 1, "fit takes exactly one model");
  const Variant v = models.front();
  const std::vector<std::string> targets = target_list(c, {"uci"});
  require(targets.size() == 1, "fit takes exactly one target rule");
  std::vector<std::string> names;
  Dataset data = load_data(c, &names);
  ModelFile mf;
  mf.feature_names = names;
  if (c.standardize.value_or(false)) {
    mf.standardizer = Standardizer::fit(data.features());
    data = mf.standardizer->transform(data);
  }
  const Hyper h = fixed_hyper(c, 0.5);
  std::optional<EliteGuide> guide;
  if (is_edsvm(v)) guide = guide_for(data, v, targets.front(), h, c);
  mf.model = fit_family(data, v, h, c.grid, {}, guide ? &*guide : nullptr);
  const auto dir = prepare_out(c);
  save_model((dir / "model.json").string(), mf);
  const Metrics m = compute_metrics(training_decision_values(mf.model), data.labels());
  out << to_string(v) << ": n=" << data.size() << " training accuracy "
      << format_double(m.accuracy) << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
  require(!c.model_file.empty(), "predict needs --model-file");
  require(!c.data.empty(), "no input data (set --data or 'data' in the config)");
  const ModelFile mf = load_model(c.model_file);
  const CsvTable table = read_csv(c.data);
  const Matrix X = features_from_csv(table, mf.feature_names);
  const Vector s = model_scores(mf, X);
  const Vector pred = sign_labels(s);
  const auto dir = prepare_out(c);
  Matrix v(s.size(), 2);
  v << s, pred;
  write_csv((dir / "scores.csv").string(), {"score", "predicted"}, v);
  out << "scored " << s.size() << " rows";
  if (table.column("label") >= 0) {
    const Dataset labelled = dataset_from_csv(table, c.map01);
    const Metrics m = compute_metrics(s, labelled.labels());
    write_text((dir / "metrics.json").string(), dump_json(to_json(m)));
    out << ", accuracy " << format_double(m.accuracy);
  }
  out << "\n";
  return kExitOk;
}

int cmd_cv(const RunConfig& c, std::ostream& out) {
  ExperimentConfig ec;
  ec.protocol = c.protocol.empty() ? Protocol::CrossValidation : parse_protocol(c.protocol);
  ec.grid = c.grid;
  ec.models = model_list(c, ec.models);
  ec.targets = target_list(c, {"uci"});
  ec.standardize = c.standardize.value_or(true);
  ec.test_fraction = c.test_fraction;
  ec.split_seed = derive_seed(c.seed, 2);
  ec.elite_eps = c.elite_eps;
  ec.threads = c.threads;
  const Dataset data = load_data(c);
  const ExperimentReport report = run_experiment(data, ec);
  const auto dir = prepare_out(c);
  write_text((dir / "report.json").string(),
             dump_json(Json{{"config", config_to_json(c)}, {"report", to_json(report)}}));
  const std::string table = format_table(report);
  write_text((dir / "report.txt").string(), table);
  out << table;
  return kExitOk;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out) {
  const std::vector<Variant> models = model_list(c, {Variant::CEDSVM});
  require(models.size() == 1 && is_edsvm(models.front()),
          "diagnose takes one EDSVM model (cedsvm or lsedsvm)");
  const Variant v = models.front();
  const std::vector<std::string> targets = c.targets.empty() ? std::vector<std::string>{"uci"}
                                                             : c.targets;
  require(targets.size() == 1, "diagnose takes exactly one target rule");
  const bool self = targets.front() == "self";
  if (!self) target_preset(targets.front());
  Dataset data = load_data(c);
  if (c.standardize.value_or(false)) data = Standardizer::fit(data.features()).transform(data);
  const Hyper h = fixed_hyper(c, 0.5);
  const KernelSpec kernel = kernel_of(c);
  const TrainedModel reference = fit_csvm(data, h.C, kernel);
  const TrainedModel ls_reference = fit_lssvm(data, h.C, kernel);
  EliteGuide guide;
  if (self) {
    guide.elite = support_indices(reference, c.elite_eps);
    const Vector xi = extract_slacks(reference);
    guide.targets.resize(guide.size());
    for (Index k = 0; k < guide.size(); ++k) guide.targets[k] = xi[guide.elite[k]];
    guide.source = {to_string(Variant::CSVM), "rule=self"};
  } else {
    guide = guide_for(data, v, targets.front(), h, c);
  }
  const DiagnosticsReport r = radii_report(reference, guide, h.C, h.omega, v, &ls_reference);
  const auto dir = prepare_out(c);
  write_text((dir / "diagnostics.json").string(), dump_json(to_json(r)));
  out << "ratio " << format_double(v == Variant::CEDSVM ? r.ratio : r.ratio_ls) << ": "
      << r.recommendation << "\n";
  return kExitOk;
}

}  // namespace

RunConfig config_from_json(const Json& j) {
  check_keys(j, "config",
             {"data", "map01", "seed", "models", "kernel", "degree", "coef0", "C", "omega", "a",
              "gamma", "targets", "elite_eps", "standardize", "protocol", "test_fraction", "grid",
              "out", "model_file", "threads", "simulation"});
  RunConfig c;
  if (j.contains("data")) c.data = get_as<std::string>(j, "data");
  if (j.contains("map01")) c.map01 = get_as<bool>(j, "map01");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("models")) c.models = string_list(j, "models");
  if (j.contains("kernel")) c.kernel = get_as<std::string>(j, "kernel");
  if (j.contains("degree")) c.degree = get_as<int>(j, "degree");
  if (j.contains("coef0")) c.coef0 = get_as<double>(j, "coef0");
  if (j.contains("C")) c.C = get_as<double>(j, "C");
  if (j.contains("omega")) c.omega = get_as<double>(j, "omega");
  if (j.contains("a")) c.a = get_as<double>(j, "a");
  if (j.contains("gamma")) c.gamma = get_as<double>(j, "gamma");
  if (j.contains("targets")) c.targets = string_list(j, "targets");
  if (j.contains("elite_eps")) c.elite_eps = get_as<double>(j, "elite_eps");
  if (j.contains("standardize")) c.standardize = get_as<bool>(j, "standardize");
  if (j.contains("protocol")) c.protocol = get_as<std::string>(j, "protocol");
  if (j.contains("test_fraction")) c.test_fraction = get_as<double>(j, "test_fraction");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  if (j.contains("model_file")) c.model_file = get_as<std::string>(j, "model_file");
  if (j.contains("threads")) c.threads = get_as<unsigned>(j, "threads");
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    check_keys(g, "config.grid", {"C", "omega", "a", "gamma", "folds"});
    if (g.contains("C")) c.grid.C_values = number_list(g, "C");
    if (g.contains("omega")) c.grid.omega_values = number_list(g, "omega");
    if (g.contains("a")) c.grid.a_values = number_list(g, "a");
    if (g.contains("gamma")) c.grid.gamma_values = number_list(g, "gamma");
    if (g.contains("folds")) c.grid.folds = get_as<int>(g, "folds");
  }
  if (j.contains("simulation")) {
    const Json& s = j.at("simulation");
    check_keys(s, "config.simulation",
               {"centers_per_class", "per_center", "mc_samples", "grid_resolution", "grid_pad"});
    if (s.contains("centers_per_class")) {
      c.simulation.centers_per_class = get_as<int>(s, "centers_per_class");
    }
    if (s.contains("per_center")) c.simulation.per_center = get_as<int>(s, "per_center");
    if (s.contains("mc_samples")) c.simulation.mc_samples = get_as<Index>(s, "mc_samples");
    if (s.contains("grid_resolution")) {
      c.simulation.grid_resolution = get_as<int>(s, "grid_resolution");
    }
    if (s.contains("grid_pad")) c.simulation.grid_pad = get_as<double>(s, "grid_pad");
  }
  return c;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elite-driven SVM toolkit"};
  app.require_subcommand(1);
  Flags flags;
  using Command = std::function<int(const RunConfig&, std::ostream&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"simulate", "Gaussian-mixture experiment with boundary grids", cmd_simulate},
      {"fit", "fit one model and write model.json", cmd_fit},
      {"predict", "score a CSV with a saved model", cmd_predict},
      {"cv", "grid-searched cross-validation report", cmd_cv},
      {"diagnose", "pre-training benchmark usefulness diagnostics", cmd_diagnose}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_options(sub, flags);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  // Every subcommand binds the same flag variables; only the one that ran
  // reports which options were given.
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    Options active;
    for (CLI::Option* opt : subs[k]->get_options()) {
      for (const std::string& name : opt->get_lnames()) active.by_name[name] = opt;
    }
    try {
      const RunConfig cfg = resolve(flags, active);
      return std::get<2>(commands[k])(cfg, out);
    } catch (const SolverError& e) {
      err << "solver error: " << e.what() << "\n";
      return kExitSolver;
    } catch (const InvalidArgument& e) {
      err << "error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const Json::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return kExitConfig;
}

}  // namespace edsvm
