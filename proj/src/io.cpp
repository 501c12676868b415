#include "edsvm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace edsvm {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos
                                                                    : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || ptr != e || !std::isfinite(v)) {
    throw IoError("csv line " + std::to_string(line) + ", column '" + column +
                  "': not a finite number: '" + s + "'");
  }
  return v;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("json: expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number_from_json(j[i]);
  return v;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

Matrix matrix_from_json(const Json& j, Index cols_if_empty) {
  if (!j.is_array()) throw IoError("json: expected an array of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector r = vector_from_json(j[i]);
    if (r.size() != cols) throw IoError("json: ragged matrix");
    m.row(static_cast<Index>(i)) = r.transpose();
  }
  return m;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw IoError(std::string("json: missing field '") + key + "'");
  }
  return j.at(key);
}

Json metrics_values(const Metrics& m) {
  Json j = Json::object();
  for (const std::string& name : metric_names()) j[name] = json_number(metric_value(m, name));
  return j;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Index CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == name) return static_cast<Index>(j);
  }
  return -1;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  CsvTable t;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (t.columns.empty()) {
      t.columns = fields;
      for (const std::string& c : t.columns) {
        if (c.empty()) throw IoError("csv header: empty column name");
      }
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": expected " +
                    std::to_string(t.columns.size()) + " fields, found " +
                    std::to_string(fields.size()));
    }
    std::vector<double> r;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      r.push_back(parse_number(fields[j], line_no, t.columns[j]));
    }
    rows.push_back(std::move(r));
  }
  if (t.columns.empty()) throw IoError("csv: missing header row");
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string csv_string(const std::vector<std::string>& columns, const Matrix& values) {
  require(static_cast<Index>(columns.size()) == values.cols(), "csv: header width mismatch");
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
  out += '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values) {
  write_text(path, csv_string(columns, values));
}

Dataset dataset_from_csv(const CsvTable& table, bool map01,
                         std::vector<std::string>* feature_names) {
  const Index lc = table.column("label");
  if (lc < 0) throw IoError("csv: no 'label' column");
  if (table.values.rows() == 0) throw IoError("csv: no data rows");
  std::vector<std::string> names;
  std::vector<Index> cols;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (static_cast<Index>(j) == lc) continue;
    names.push_back(table.columns[j]);
    cols.push_back(static_cast<Index>(j));
  }
  if (cols.empty()) throw IoError("csv: no feature columns");
  Matrix x(table.values.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Index>(k)) = table.values.col(cols[k]);
  Vector y = table.values.col(lc);
  for (Index i = 0; i < y.size(); ++i) {
    if (map01) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw IoError("csv row " + std::to_string(i + 1) + ": label " + format_double(y[i]) +
                      " is not 0 or 1 (--map01 is set)");
      }
      y[i] = y[i] == 1.0 ? 1.0 : -1.0;
    } else if (y[i] != 1.0 && y[i] != -1.0) {
      throw IoError("csv row " + std::to_string(i + 1) + ": label " + format_double(y[i]) +
                    " is not -1 or +1" + (y[i] == 0.0 ? " (use --map01 for 0/1 labels)" : ""));
    }
  }
  if (feature_names) *feature_names = names;
  return Dataset(std::move(x), std::move(y));
}

Dataset read_dataset_csv(const std::string& path, bool map01,
                         std::vector<std::string>* feature_names) {
  try {
    return dataset_from_csv(read_csv(path), map01, feature_names);
  } catch (const IoError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw IoError(path + ": " + what);
  }
}

Matrix features_from_csv(const CsvTable& table, const std::vector<std::string>& feature_names) {
  std::vector<std::string> names = feature_names;
  if (names.empty()) {
    for (const std::string& c : table.columns) {
      if (c != "label") names.push_back(c);
    }
  }
  Matrix x(table.values.rows(), static_cast<Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const Index c = table.column(names[k]);
    if (c < 0) throw IoError("csv: missing feature column '" + names[k] + "'");
    x.col(static_cast<Index>(k)) = table.values.col(c);
  }
  return x;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       std::vector<std::string> feature_names) {
  if (feature_names.empty()) {
    for (Index j = 0; j < data.dim(); ++j) feature_names.push_back("x" + std::to_string(j + 1));
  }
  require(static_cast<Index>(feature_names.size()) == data.dim(),
          "write_dataset_csv: feature name count mismatch");
  feature_names.push_back("label");
  Matrix v(data.size(), data.dim() + 1);
  v << data.features(), data.labels();
  write_csv(path, feature_names, v);
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError("json: expected a number, found " + j.dump());
}

Json to_json(const KernelSpec& k) {
  Json j{{"kind", to_string(k.kind)}};
  if (k.kind == KernelSpec::Kind::Polynomial) {
    j["degree"] = k.degree;
    j["coef0"] = json_number(k.coef0);
  }
  if (k.kind == KernelSpec::Kind::RBF) j["gamma"] = json_number(k.gamma);
  return j;
}

KernelSpec kernel_from_json(const Json& j) {
  const auto kind = parse_kernel_kind(field(j, "kind").get<std::string>());
  switch (kind) {
    case KernelSpec::Kind::Linear:
      return KernelSpec::linear();
    case KernelSpec::Kind::Polynomial:
      return KernelSpec::polynomial(field(j, "degree").get<int>(),
                                    number_from_json(field(j, "coef0")));
    case KernelSpec::Kind::RBF:
      return KernelSpec::rbf(number_from_json(field(j, "gamma")));
  }
  throw IoError("json: unknown kernel");
}

Json to_json(const EliteGuide& g) {
  Json j;
  j["elite"] = g.elite;
  j["targets"] = vector_json(g.targets);
  j["source"] = g.source;
  return j;
}

EliteGuide guide_from_json(const Json& j) {
  EliteGuide g;
  g.elite = field(j, "elite").get<std::vector<Index>>();
  g.targets = vector_from_json(field(j, "targets"));
  if (j.contains("source")) g.source = j.at("source").get<std::vector<std::string>>();
  return g;
}

Json to_json(const Metrics& m) {
  Json j = metrics_values(m);
  j["precision_defined"] = m.precision_defined;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j;
}

Json to_json(const CalibrationReport& r) {
  Json entries = Json::array();
  for (const CalibrationEntry& e : r.entries) {
    Json je{{"index", e.index},
            {"xi_star", json_number(e.xi_star)},
            {"satisfied", e.satisfied},
            {"phi_prime_at_zero", json_number(e.phi_prime_at_zero)},
            {"kink", e.kink}};
    if (e.kink) {
      je["left_derivative"] = json_number(e.left_derivative);
      je["right_derivative"] = json_number(e.right_derivative);
    }
    entries.push_back(std::move(je));
  }
  return Json{{"variant", to_string(r.variant)},
              {"omega", json_number(r.omega)},
              {"threshold", json_number(r.threshold)},
              {"all_satisfied", r.all_satisfied},
              {"entries", std::move(entries)}};
}

Json to_json(const DiagnosticsReport& r) {
  Json j{{"variant", to_string(r.variant)},
         {"C", json_number(r.C)},
         {"omega", json_number(r.omega)},
         {"n", r.n},
         {"m", r.m},
         {"comparator", "empirical comparator (reference fit on the same data)"},
         {"norm_sq_ref", json_number(r.norm_sq_ref)},
         {"norm_sq_ref_ls", json_number(r.norm_sq_ref_ls)},
         {"hinge_risk_ref", json_number(r.hinge_risk_ref)},
         {"ls_risk_ref", json_number(r.ls_risk_ref)},
         {"e_m_star", json_number(r.e_m_star)},
         {"e_m_star_ls", json_number(r.e_m_star_ls)},
         {"lambda_n_sq", json_number(r.lambda_n_sq)},
         {"lambda_svm_sq", json_number(r.lambda_svm_sq)},
         {"gamma_ls", json_number(r.gamma_ls)},
         {"gamma_ls_svm", json_number(r.gamma_ls_svm)},
         {"ratio", json_number(r.ratio)},
         {"ratio_ls", json_number(r.ratio_ls)},
         {"recommendation", r.recommendation}};
  j["calibration"] = r.calibration ? to_json(*r.calibration) : Json(nullptr);
  return j;
}

Json to_json(const BayesEstimate& b) {
  return Json{{"accuracy", json_number(b.accuracy)},
              {"std_error", json_number(b.std_error)},
              {"samples", b.samples}};
}

Json to_json(const GridSpec& g) {
  Json j;
  j["C"] = g.C_values;
  j["omega"] = g.omega_values;
  j["a"] = g.a_values;
  j["gamma"] = g.gamma_values;
  j["folds"] = g.folds;
  j["seed"] = g.seed;
  j["kernel"] = to_string(g.kernel);
  if (g.kernel == KernelSpec::Kind::Polynomial) {
    j["degree"] = g.degree;
    j["coef0"] = g.coef0;
  }
  return j;
}

Json hyper_json(Variant family, const Hyper& h, KernelSpec::Kind kernel) {
  Json j{{"C", json_number(h.C)}};
  if (family == Variant::CEDSVM || family == Variant::LSEDSVM) j["omega"] = json_number(h.omega);
  if (family == Variant::LINEXSVM) j["a"] = json_number(h.a);
  if (kernel == KernelSpec::Kind::RBF) j["gamma"] = json_number(h.gamma);
  return j;
}

Json to_json(const GridResult& g) {
  Json rows = Json::array();
  for (const GridRow& r : g.table) {
    Json jr{{"params", hyper_json(g.family, r.params, g.kernel)},
            {"mean_error", json_number(r.mean_error)},
            {"sd_error", json_number(r.sd_error)},
            {"failed", r.failed}};
    if (r.failed) jr["error"] = r.error;
    rows.push_back(std::move(jr));
  }
  return Json{{"family", to_string(g.family)},
              {"best", hyper_json(g.family, g.best, g.kernel)},
              {"best_error", json_number(g.best_error)},
              {"table", std::move(rows)}};
}

Json to_json(const ExperimentReport& r) {
  Json rows = Json::array();
  const KernelSpec::Kind kind = r.kernel;
  for (const MethodResult& m : r.rows) {
    Json folds = Json::array();
    for (const Metrics& f : m.per_fold) folds.push_back(to_json(f));
    Json jr{{"method", m.method},
            {"target", m.target.empty() ? Json(nullptr) : Json(m.target)},
            {"params", hyper_json(parse_variant(m.method), m.params, kind)},
            {"cv_error", json_number(m.cv_error)},
            {"mean", metrics_values(m.mean)},
            {"folds", std::move(folds)}};
    if (r.protocol == Protocol::CrossValidation) jr["sd"] = metrics_values(m.sd);
    if (!m.target.empty()) jr["elite_size"] = json_number(m.elite_size);
    rows.push_back(std::move(jr));
  }
  Json j{{"protocol", to_string(r.protocol)},
         {"n", r.n},
         {"pr_auc_method", "average precision (step-wise)"},
         {"rows", std::move(rows)}};
  if (r.protocol == Protocol::Holdout) {
    j["n_train"] = r.n_train;
    j["n_test"] = r.n_test;
  }
  return j;
}

Json to_json(const Standardizer& s) {
  return Json{{"mean", vector_json(s.mean)}, {"scale", vector_json(s.scale)}};
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer s;
  s.mean = vector_from_json(field(j, "mean"));
  s.scale = vector_from_json(field(j, "scale"));
  if (s.mean.size() != s.scale.size()) throw IoError("json: standardizer size mismatch");
  return s;
}

Json to_json(const ModelFile& f) {
  const TrainedModel& m = f.model;
  Json hyper = Json::object();
  for (const auto& [k, v] : m.hyper) hyper[k] = json_number(v);
  Json j{{"format", "edsvm-model"},
         {"version", 1},
         {"variant", to_string(m.variant)},
         {"kernel", to_json(m.kernel)},
         {"beta0", json_number(m.beta0)},
         {"alpha", vector_json(m.alpha)},
         {"hyper", std::move(hyper)},
         {"converged", m.converged},
         {"train", Json{{"features", matrix_json(m.train.features())},
                        {"labels", vector_json(m.train.labels())}}}};
  j["guide"] = m.guide ? to_json(*m.guide) : Json(nullptr);
  j["standardizer"] = f.standardizer ? to_json(*f.standardizer) : Json(nullptr);
  j["feature_names"] = f.feature_names;
  return j;
}

ModelFile model_file_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "edsvm-model") {
    throw IoError("json: not an edsvm model file");
  }
  if (field(j, "version").get<int>() != 1) throw IoError("json: unsupported model version");
  ModelFile f;
  TrainedModel& m = f.model;
  m.variant = parse_variant(field(j, "variant").get<std::string>());
  m.kernel = kernel_from_json(field(j, "kernel"));
  m.beta0 = number_from_json(field(j, "beta0"));
  m.alpha = vector_from_json(field(j, "alpha"));
  for (const auto& [k, v] : field(j, "hyper").items()) m.hyper[k] = number_from_json(v);
  m.converged = field(j, "converged").get<bool>();
  const Json& train = field(j, "train");
  const Vector y = vector_from_json(field(train, "labels"));
  Matrix x = matrix_from_json(field(train, "features"), 0);
  m.train = Dataset(std::move(x), y);
  if (m.alpha.size() != m.train.size()) throw IoError("json: alpha and training set differ");
  if (j.contains("guide") && !j.at("guide").is_null()) {
    m.guide = guide_from_json(j.at("guide"));
    m.guide->validate(m.train.size());
  }
  if (j.contains("standardizer") && !j.at("standardizer").is_null()) {
    f.standardizer = standardizer_from_json(j.at("standardizer"));
    if (f.standardizer->mean.size() != m.train.dim()) {
      throw IoError("json: standardizer dimension differs from the model");
    }
  }
  if (j.contains("feature_names")) {
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  }
  return f;
}

void save_model(const std::string& path, const ModelFile& f) {
  write_text(path, dump_json(to_json(f)));
}

ModelFile load_model(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  try {
    return model_file_from_json(j);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

Vector model_scores(const ModelFile& f, const Matrix& X) {
  require(X.cols() == f.model.train.dim(), "predict: feature dimension differs from the model");
  if (f.standardizer) return decision_values(f.model, f.standardizer->transform(X));
  return decision_values(f.model, X);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace edsvm
