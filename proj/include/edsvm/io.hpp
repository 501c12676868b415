#pragma once

#include "edsvm/diagnostics.hpp"
#include "edsvm/error.hpp"
#include "edsvm/evaluation.hpp"
#include "edsvm/metrics.hpp"
#include "edsvm/model.hpp"
#include "edsvm/simulation.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace edsvm {

using Json = nlohmann::json;

/// Raised for unreadable or malformed input files and unwritable outputs.
struct IoError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

std::string read_text(const std::string& path);
/// Writes bytes as given (callers use LF line endings).
void write_text(const std::string& path, const std::string& text);

/// Numeric CSV with a header row. CR before LF is tolerated on input.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;

  Index column(const std::string& name) const;  // -1 when absent
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);
std::string csv_string(const std::vector<std::string>& columns, const Matrix& values);
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values);

/// Features are every column except `label`. Labels must be -1/+1, or 0/1
/// when `map01` is set (0 -> -1, 1 -> +1).
Dataset dataset_from_csv(const CsvTable& table, bool map01,
                         std::vector<std::string>* feature_names = nullptr);
Dataset read_dataset_csv(const std::string& path, bool map01,
                         std::vector<std::string>* feature_names = nullptr);
/// Features only (a `label` column, if present, is ignored).
Matrix features_from_csv(const CsvTable& table, const std::vector<std::string>& feature_names);
void write_dataset_csv(const std::string& path, const Dataset& data,
                       std::vector<std::string> feature_names = {});

/// Finite values as numbers; non-finite values as "inf", "-inf" or "nan".
Json json_number(double x);
double number_from_json(const Json& j);

Json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const Json& j);
Json to_json(const EliteGuide& g);
EliteGuide guide_from_json(const Json& j);
Json to_json(const Metrics& m);
Json to_json(const CalibrationReport& r);
Json to_json(const DiagnosticsReport& r);
Json to_json(const BayesEstimate& b);
Json to_json(const GridSpec& g);
Json to_json(const GridResult& g);
Json to_json(const ExperimentReport& r);
Json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const Json& j);
/// Hyperparameters relevant to the family (gamma only for RBF).
Json hyper_json(Variant family, const Hyper& h, KernelSpec::Kind kernel);

/// Self-contained model file: the fitted model plus the input transform.
struct ModelFile {
  TrainedModel model;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> feature_names;
};

Json to_json(const ModelFile& f);
ModelFile model_file_from_json(const Json& j);
void save_model(const std::string& path, const ModelFile& f);
ModelFile load_model(const std::string& path);

/// Decision values for raw inputs (standardizer applied when present).
Vector model_scores(const ModelFile& f, const Matrix& X);

/// Pretty-printed with two-space indentation and a trailing newline.
std::string dump_json(const Json& j);

}  // namespace edsvm
