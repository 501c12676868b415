#pragma once

#include "edsvm/evaluation.hpp"
#include "edsvm/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace edsvm {

struct SimulationSettings {
  int centers_per_class = 10;
  int per_center = 10;
  Index mc_samples = 100'000;
  int grid_resolution = 200;
  double grid_pad = 1.0;
};

/// Inputs of every subcommand. Values left unset take the subcommand's
/// default; see the README for the config-file schema.
struct RunConfig {
  std::string data;
  bool map01 = false;
  std::uint64_t seed = 1;
  std::vector<std::string> models;
  std::string kernel = "rbf";
  int degree = 2;
  double coef0 = 1.0;
  std::optional<double> C;
  std::optional<double> omega;
  std::optional<double> a;
  std::optional<double> gamma;
  std::vector<std::string> targets;
  double elite_eps = 1e-8;
  std::optional<bool> standardize;
  std::string protocol;
  double test_fraction = 0.3;
  GridSpec grid = GridSpec::defaults();
  std::string out = ".";
  std::string model_file;
  unsigned threads = 0;
  SimulationSettings simulation;
};

/// Strict parse: unknown keys and wrong types raise InvalidArgument.
RunConfig config_from_json(const Json& j);

/// Independent seed for a stream: 0 centers, 1 data, 2 split, 3 folds, 4 Monte Carlo.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Entry point of the edsvm command-line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace edsvm
