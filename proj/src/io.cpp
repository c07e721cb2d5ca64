#include "zigev/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace zigev::io {

using nlohmann::json;

ParseError::ParseError(const std::string& what, std::size_t row, std::string column)
    : std::runtime_error(what), row_(row), column_(std::move(column)) {}

ValidationError::ValidationError(const std::string& what, ValidationReport report)
    : std::runtime_error(what), report_(std::move(report)) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

double numeric_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const auto v = parse_number(cell);
  if (!v) {
    throw ParseError("cannot parse '" + cell + "' as a number at row " + std::to_string(row) +
                         ", column '" + column + "'",
                     row, column);
  }
  if (!std::isfinite(*v)) {
    throw ParseError("non-finite value at row " + std::to_string(row) + ", column '" + column + "'",
                     row, column);
  }
  return *v;
}

ColumnEncoding infer_encoding(const CsvTable& table, const std::string& column,
                              const std::vector<std::string>& forced_categorical) {
  const std::size_t idx = table.column_index(column);
  ColumnEncoding enc;
  enc.column = column;
  const bool forced = std::find(forced_categorical.begin(), forced_categorical.end(), column) !=
                      forced_categorical.end();
  bool any_numeric = false;
  for (const auto& row : table.rows) any_numeric = any_numeric || parse_number(row[idx]).has_value();
  enc.categorical = forced || !any_numeric;
  if (enc.categorical) {
    std::set<std::string> levels;
    for (const auto& row : table.rows) levels.insert(row[idx]);
    enc.levels.assign(levels.begin(), levels.end());
  }
  return enc;
}

std::vector<ColumnEncoding> encodings_for(const CsvTable& table,
                                          const std::vector<std::string>& columns,
                                          const std::vector<std::string>& categorical) {
  std::vector<ColumnEncoding> out;
  for (const auto& c : columns) {
    if (c == kIntercept) throw ParseError("column name '" + c + "' is reserved", 0, c);
    out.push_back(infer_encoding(table, c, categorical));
  }
  return out;
}

std::vector<std::string> require_string_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::invalid_argument("config key '" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw std::invalid_argument("config key '" + key + "' must list strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> require_number_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::invalid_argument("config key '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw std::invalid_argument("config key '" + key + "' must list numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  std::vector<std::string> unknown;
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown configuration keys in " + where + ":";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw std::invalid_argument(msg);
  }
}

FitConfig parse_fit_config(const json& j) {
  reject_unknown(j, {"optimizer", "max_iterations", "tolerance", "multistart", "tau_lower",
                     "tau_upper", "initial_tau", "jitter_sd", "allow_unidentified", "fixed"},
                 "'fit'");
  FitConfig cfg;
  if (j.contains("optimizer")) cfg.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  if (j.contains("max_iterations")) cfg.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<double>();
  if (j.contains("multistart")) cfg.multistart = j.at("multistart").get<int>();
  if (j.contains("tau_lower")) cfg.tau_lower = j.at("tau_lower").get<double>();
  if (j.contains("tau_upper")) cfg.tau_upper = j.at("tau_upper").get<double>();
  if (j.contains("initial_tau")) cfg.initial_tau = j.at("initial_tau").get<double>();
  if (j.contains("jitter_sd")) cfg.jitter_sd = j.at("jitter_sd").get<double>();
  if (j.contains("allow_unidentified")) cfg.allow_unidentified = j.at("allow_unidentified").get<bool>();
  if (j.contains("fixed")) {
    if (!j.at("fixed").is_object()) throw std::invalid_argument("config key 'fixed' must be an object");
    for (const auto& [name, value] : j.at("fixed").items()) cfg.fixed[name] = value.get<double>();
  }
  cfg.validate();
  return cfg;
}

SimulationPlan parse_simulation_plan(const json& j) {
  reject_unknown(j, {"model", "scenarios", "beta", "theta", "z_means", "tau", "n", "replicates",
                     "estimators", "threads"},
                 "'simulation'");
  SimulationPlan plan;
  if (j.contains("model")) plan.model = j.at("model").get<std::string>();
  if (j.contains("scenarios")) plan.scenarios = require_string_list(j.at("scenarios"), "scenarios");
  if (j.contains("beta")) plan.beta = require_number_list(j.at("beta"), "beta");
  if (j.contains("theta")) plan.theta = require_number_list(j.at("theta"), "theta");
  if (j.contains("z_means")) plan.z_means = require_number_list(j.at("z_means"), "z_means");
  if (j.contains("tau")) plan.tau_true = j.at("tau").get<double>();
  if (j.contains("n")) {
    const json& n = j.at("n");
    plan.n.clear();
    if (n.is_array()) {
      for (const auto& e : n) plan.n.push_back(e.get<long>());
    } else {
      plan.n.push_back(n.get<long>());
    }
  }
  if (j.contains("replicates")) plan.replicates = j.at("replicates").get<int>();
  if (j.contains("estimators")) {
    plan.estimators.clear();
    for (const auto& e : require_string_list(j.at("estimators"), "estimators")) {
      plan.estimators.push_back(estimator_from_string(e));
    }
  }
  if (j.contains("threads")) plan.threads = j.at("threads").get<unsigned>();
  return plan;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError("missing column '" + name + "'", 0, name);
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      const std::set<std::string> unique(table.header.begin(), table.header.end());
      if (unique.size() != table.header.size()) throw ParseError("duplicate header names");
      continue;
    }
    ++line_no;
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                           " fields, expected " + std::to_string(table.header.size()),
                       line_no);
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ParseError("empty file");
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) throw std::runtime_error("'" + path.string() + "' is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::vector<std::string> ColumnEncoding::design_names() const {
  if (!categorical) return {column};
  std::vector<std::string> names;
  for (std::size_t l = 1; l < levels.size(); ++l) names.push_back(column + "=" + levels[l]);
  return names;
}

Eigen::MatrixXd build_design(const CsvTable& table, const std::vector<ColumnEncoding>& encodings) {
  Eigen::Index cols = 1;
  for (const auto& e : encodings) cols += static_cast<Eigen::Index>(e.design_names().size());
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  m.col(0).setOnes();

  Eigen::Index c = 1;
  for (const auto& e : encodings) {
    const std::size_t idx = table.column_index(e.column);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const std::string& cell = table.rows[static_cast<std::size_t>(i)][idx];
      const auto row_no = static_cast<std::size_t>(i) + 1;
      if (!e.categorical) {
        m(i, c) = numeric_cell(cell, row_no, e.column);
        continue;
      }
      auto it = std::find(e.levels.begin(), e.levels.end(), cell);
      if (it == e.levels.end()) {
        throw ParseError("unknown level '" + cell + "' at row " + std::to_string(row_no) +
                             ", column '" + e.column + "'",
                         row_no, e.column);
      }
      const auto level = it - e.levels.begin();
      if (level > 0) m(i, c + level - 1) = 1.0;
    }
    c += static_cast<Eigen::Index>(e.design_names().size());
  }
  return m;
}

LoadedData load_dataset(const CsvTable& table, const LoadOptions& options) {
  if (table.rows.empty()) throw ParseError("no data rows");
  LoadedData out;

  const std::size_t ridx = table.column_index(options.response);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row_no = static_cast<std::size_t>(i) + 1;
    const double v = numeric_cell(table.rows[static_cast<std::size_t>(i)][ridx], row_no,
                                  options.response);
    if (v != 0.0 && v != 1.0) {
      throw ParseError("response must be 0 or 1 at row " + std::to_string(row_no) + ", column '" +
                           options.response + "'",
                       row_no, options.response);
    }
    out.data.y(i) = v;
  }

  out.x_encodings = encodings_for(table, options.x_columns, options.categorical);
  out.z_encodings = encodings_for(table, options.z_columns, options.categorical);
  out.data.X = build_design(table, out.x_encodings);
  out.data.Z = build_design(table, out.z_encodings);

  auto fill_spec = [&](const std::vector<ColumnEncoding>& encs, std::vector<std::string>& names) {
    names.emplace_back(kIntercept);
    for (const auto& e : encs) {
      for (const auto& d : e.design_names()) {
        names.push_back(d);
        out.spec.continuous[d] = !e.categorical;
      }
    }
  };
  fill_spec(out.x_encodings, out.spec.x_columns);
  fill_spec(out.z_encodings, out.spec.z_columns);

  out.data.validate();
  out.validation = validate_spec(out.spec);
  if (!out.validation.ok) {
    if (options.strict) {
      throw ValidationError("identifiability check failed: " + out.validation.message,
                            out.validation);
    }
    out.warnings.push_back("identifiability check failed: " + out.validation.message);
  }
  return out;
}

LoadedData load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  return load_dataset(read_csv(path), options);
}

ModelKind model_kind_from_id(const std::string& id) {
  if (id == "m0") return ModelKind::Logistic;
  if (id == "m1") return ModelKind::Gev;
  if (id == "m2") return ModelKind::ZiGev;
  throw std::invalid_argument("unknown model id '" + id + "' (expected m0, m1 or m2)");
}

std::string model_id(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic: return "m0";
    case ModelKind::Gev: return "m1";
    case ModelKind::ZiGev: return "m2";
  }
  return "?";
}

ModelKind estimator_from_string(const std::string& name) {
  if (name == "zi-gev") return ModelKind::ZiGev;
  if (name == "naive-gev") return ModelKind::Gev;
  if (name == "naive-logistic") return ModelKind::Logistic;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected zi-gev, naive-gev or naive-logistic)");
}

std::string estimator_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ZiGev: return "zi-gev";
    case ModelKind::Gev: return "naive-gev";
    case ModelKind::Logistic: return "naive-logistic";
  }
  return "?";
}

std::pair<SimulationPlan, std::optional<std::uint64_t>> parse_preset(std::string_view preset) {
  SimulationPlan plan;
  std::optional<std::uint64_t> seed;
  bool scenario_seen = false;
  for (const auto& raw : split(preset, ',')) {
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      if (raw == "M1" || raw == "M2") {
        plan.model = raw;
      } else if (raw == "Scenario1" || raw == "Scenario2") {
        if (!scenario_seen) plan.scenarios.clear();
        scenario_seen = true;
        plan.scenarios.push_back(raw);
      } else {
        throw std::invalid_argument("unknown preset token '" + raw + "'");
      }
      continue;
    }
    const std::string key = raw.substr(0, eq);
    const std::string value = raw.substr(eq + 1);
    auto number = [&](const std::string& v) {
      const auto parsed = parse_number(v);
      if (!parsed) throw std::invalid_argument("bad value '" + v + "' for preset key '" + key + "'");
      return *parsed;
    };
    if (key == "n") {
      plan.n.clear();
      for (const auto& part : split(value, '/')) plan.n.push_back(static_cast<long>(number(part)));
    } else if (key == "N") {
      plan.replicates = static_cast<int>(number(value));
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw std::invalid_argument("bad seed '" + value + "'");
      }
      seed = s;
    } else if (key == "tau") {
      plan.tau_true = number(value);
    } else if (key == "estimators") {
      plan.estimators.clear();
      for (const auto& part : split(value, '/')) plan.estimators.push_back(estimator_from_string(part));
    } else if (key == "threads") {
      plan.threads = static_cast<unsigned>(number(value));
    } else {
      throw std::invalid_argument("unknown preset key '" + key + "'");
    }
  }
  return {plan, seed};
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("configuration is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"input", "response", "x_columns", "z_columns", "categorical", "models", "seed",
                     "strict", "out", "fit", "model_file", "simulation"},
                 "configuration");
  RunConfig cfg;
  try {
    if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
    if (j.contains("response")) cfg.response = j.at("response").get<std::string>();
    if (j.contains("x_columns")) cfg.x_columns = require_string_list(j.at("x_columns"), "x_columns");
    if (j.contains("z_columns")) cfg.z_columns = require_string_list(j.at("z_columns"), "z_columns");
    if (j.contains("categorical")) cfg.categorical = require_string_list(j.at("categorical"), "categorical");
    if (j.contains("models")) cfg.models = require_string_list(j.at("models"), "models");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("strict")) cfg.strict = j.at("strict").get<bool>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("fit")) cfg.fit = parse_fit_config(j.at("fit"));
    if (j.contains("model_file")) cfg.model_file = j.at("model_file").get<std::string>();
    if (j.contains("simulation")) cfg.simulation = parse_simulation_plan(j.at("simulation"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad configuration value: ") + e.what());
  }
  for (const auto& m : cfg.models) model_kind_from_id(m);
  cfg.fit.seed = cfg.seed;
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

}  // namespace zigev::io
