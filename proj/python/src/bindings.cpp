#include "edsvm/baselines.hpp"
#include "edsvm/calibration.hpp"
#include "edsvm/cli.hpp"
#include "edsvm/diagnostics.hpp"
#include "edsvm/edsvm.hpp"
#include "edsvm/error.hpp"
#include "edsvm/evaluation.hpp"
#include "edsvm/io.hpp"
#include "edsvm/metrics.hpp"
#include "edsvm/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace edsvm;

namespace {

KernelSpec make_kernel(const std::string& kind, double gamma, int degree, double coef0) {
  KernelSpec k;
  k.kind = parse_kernel_kind(kind);
  k.gamma = gamma;
  k.degree = degree;
  k.coef0 = coef0;
  k.validate();
  return k;
}

GridSpec grid_for(const KernelSpec& k) {
  GridSpec g = GridSpec::defaults();
  g.kernel = k.kind;
  g.degree = k.degree;
  g.coef0 = k.coef0;
  g.gamma_values = {k.gamma};
  return g;
}

EliteGuide explicit_guide(const std::vector<Index>& elite, const Vector& targets) {
  EliteGuide g;
  g.elite = elite;
  g.targets = targets;
  g.source = {"user"};
  return g;
}

EliteGuide preset_guide(const Dataset& data, Variant v, const std::string& target, const Hyper& h,
                        const KernelSpec& k, double eps) {
  const BenchmarkSlacks b = benchmark_slacks(data, h, h, h, grid_for(k), {}, eps);
  const TargetPreset p = target_preset(target);
  return b.guide(v == Variant::CEDSVM ? p.cedsvm : p.lsedsvm);
}

std::string dumps(const Json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elite-guided support vector machines";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<ModelFile>(m, "Model")
      .def_property_readonly("variant", [](const ModelFile& f) { return to_string(f.model.variant); })
      .def_property_readonly("alpha", [](const ModelFile& f) { return f.model.alpha; })
      .def_property_readonly("intercept", [](const ModelFile& f) { return f.model.beta0; })
      .def_property_readonly("converged", [](const ModelFile& f) { return f.model.converged; })
      .def_property_readonly("hyper", [](const ModelFile& f) { return f.model.hyper; })
      .def_property_readonly("elite",
                             [](const ModelFile& f) {
                               return f.model.guide ? f.model.guide->elite : std::vector<Index>{};
                             })
      .def("decision_function", [](const ModelFile& f, const Matrix& X) { return model_scores(f, X); },
           py::arg("X"))
      .def("predict",
           [](const ModelFile& f, const Matrix& X) { return sign_labels(model_scores(f, X)); },
           py::arg("X"))
      .def("support_indices",
           [](const ModelFile& f, double eps) { return support_indices(f.model, eps); },
           py::arg("eps") = 1e-8)
      .def("slacks", [](const ModelFile& f) { return extract_slacks(f.model); })
      .def("to_json", [](const ModelFile& f) { return dumps(to_json(f)); })
      .def("save", [](const ModelFile& f, const std::string& path) { save_model(path, f); },
           py::arg("path"))
      .def_static("load", &load_model, py::arg("path"))
      .def_static("from_json",
                  [](const std::string& text) { return model_file_from_json(Json::parse(text)); },
                  py::arg("text"));

  m.def(
      "fit",
      [](const Matrix& X, const Vector& y, const std::string& model, double C, double omega,
         double a, const std::string& kernel, double gamma, int degree, double coef0,
         std::optional<std::vector<Index>> elite, std::optional<Vector> targets,
         const std::string& target, double elite_eps) {
        const Dataset data(X, y);
        const Variant v = parse_variant(model);
        const KernelSpec k = make_kernel(kernel, gamma, degree, coef0);
        Hyper h{C, omega, a, gamma};
        ModelFile f;
        std::optional<EliteGuide> guide;
        if (v == Variant::CEDSVM || v == Variant::LSEDSVM) {
          require(elite.has_value() == targets.has_value(),
                  "fit: elite and targets must be given together");
          guide = elite ? explicit_guide(*elite, *targets)
                        : preset_guide(data, v, target, h, k, elite_eps);
        }
        f.model = fit_family(data, v, h, grid_for(k), {}, guide ? &*guide : nullptr);
        for (Index j = 0; j < data.dim(); ++j) f.feature_names.push_back("x" + std::to_string(j + 1));
        return f;
      },
      py::arg("X"), py::arg("y"), py::arg("model") = "csvm", py::arg("C") = 1.0,
      py::arg("omega") = 0.5, py::arg("a") = -1.0, py::arg("kernel") = "rbf",
      py::arg("gamma") = 1.0, py::arg("degree") = 2, py::arg("coef0") = 1.0,
      py::arg("elite") = py::none(), py::arg("targets") = py::none(), py::arg("target") = "uci",
      py::arg("elite_eps") = 1e-8,
      "Fit one model; EDSVM guides come from explicit (elite, targets) or a target preset.");

  m.def(
      "benchmark_guide",
      [](const Matrix& X, const Vector& y, const std::string& model, const std::string& target,
         double C, double a, const std::string& kernel, double gamma, int degree, double coef0,
         double elite_eps) {
        const Dataset data(X, y);
        const KernelSpec k = make_kernel(kernel, gamma, degree, coef0);
        const EliteGuide g =
            preset_guide(data, parse_variant(model), target, Hyper{C, 1.0, a, gamma}, k, elite_eps);
        return py::make_tuple(g.elite, g.targets);
      },
      py::arg("X"), py::arg("y"), py::arg("model") = "cedsvm", py::arg("target") = "uci",
      py::arg("C") = 1.0, py::arg("a") = -1.0, py::arg("kernel") = "rbf", py::arg("gamma") = 1.0,
      py::arg("degree") = 2, py::arg("coef0") = 1.0, py::arg("elite_eps") = 1e-8);

  m.def(
      "gram",
      [](const Matrix& A, const Matrix& B, const std::string& kernel, double gamma, int degree,
         double coef0) { return compute_gram(make_kernel(kernel, gamma, degree, coef0), A, B); },
      py::arg("A"), py::arg("B"), py::arg("kernel") = "rbf", py::arg("gamma") = 1.0,
      py::arg("degree") = 2, py::arg("coef0") = 1.0);

  m.def(
      "_metrics",
      [](const Vector& scores, const Vector& y, double threshold) {
        return dumps(to_json(compute_metrics(scores, y, threshold)));
      },
      py::arg("scores"), py::arg("y"), py::arg("threshold") = 0.0);

  m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("y"));

  m.def(
      "_check_calibration",
      [](const std::vector<Index>& elite, const Vector& targets, double omega,
         const std::string& model) {
        return dumps(to_json(
            check_calibration(explicit_guide(elite, targets), omega, parse_variant(model))));
      },
      py::arg("elite"), py::arg("targets"), py::arg("omega"), py::arg("model") = "cedsvm");

  m.def(
      "calibration_threshold",
      [](const std::string& model, double omega) {
        return calibration_threshold(parse_variant(model), omega);
      },
      py::arg("model"), py::arg("omega"));

  m.def(
      "_diagnose",
      [](const Matrix& X, const Vector& y, const std::vector<Index>& elite, const Vector& targets,
         double C, double omega, const std::string& model, const std::string& kernel,
         double gamma, int degree, double coef0) {
        const Dataset data(X, y);
        const KernelSpec k = make_kernel(kernel, gamma, degree, coef0);
        const TrainedModel ref = fit_csvm(data, C, k);
        const TrainedModel ls = fit_lssvm(data, C, k);
        return dumps(to_json(
            radii_report(ref, explicit_guide(elite, targets), C, omega, parse_variant(model), &ls)));
      },
      py::arg("X"), py::arg("y"), py::arg("elite"), py::arg("targets"), py::arg("C") = 1.0,
      py::arg("omega") = 0.5, py::arg("model") = "cedsvm", py::arg("kernel") = "rbf",
      py::arg("gamma") = 1.0, py::arg("degree") = 2, py::arg("coef0") = 1.0);

  m.def(
      "simulate_dataset",
      [](std::uint64_t seed) {
        const MixtureSpec spec = draw_centers(derive_seed(seed, 0));
        const Dataset d = sample_dataset(spec, derive_seed(seed, 1));
        return py::make_tuple(d.features(), d.labels());
      },
      py::arg("seed") = 1, "Gaussian-mixture sample drawn exactly as the simulate subcommand does.");

  m.def(
      "bayes_accuracy",
      [](std::uint64_t seed, Index mc_samples) {
        const MixtureSpec spec = draw_centers(derive_seed(seed, 0));
        return bayes_accuracy(spec, mc_samples, derive_seed(seed, 4)).accuracy;
      },
      py::arg("seed") = 1, py::arg("mc_samples") = 100'000);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> all{"edsvm"};
        all.insert(all.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& s : all) argv.push_back(s.c_str());
        std::ostringstream out;
        std::ostringstream err;
        int rc = 0;
        {
          py::gil_scoped_release release;
          rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line subcommand; returns (exit code, stdout, stderr).");
}
