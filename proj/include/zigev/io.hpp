#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zigev/inference.hpp"
#include "zigev/model.hpp"
#include "zigev/simulation.hpp"

namespace zigev::io {

/// Error with the offending location when it is known (1-based data row,
/// header excluded; column name).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::string column = {});
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Comma-separated text with a header row. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // throws ParseError
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// How one raw input column becomes design-matrix columns. Categorical
/// columns expand to reference-coded indicators; the reference is the
/// alphabetically first level and gets no column.
struct ColumnEncoding {
  std::string column;
  bool categorical = false;
  std::vector<std::string> levels;  // sorted; empty for numeric columns

  /// Names of the design columns this encoding produces ("col" or "col=level").
  std::vector<std::string> design_names() const;
};

struct LoadOptions {
  std::string response;
  std::vector<std::string> x_columns;
  std::vector<std::string> z_columns;
  /// Columns forced to categorical. Non-numeric columns are categorical regardless.
  std::vector<std::string> categorical;
  /// Turn a failed identifiability check into an error.
  bool strict = false;
};

struct LoadedData {
  Dataset data;
  ModelSpec spec;
  std::vector<ColumnEncoding> x_encodings;
  std::vector<ColumnEncoding> z_encodings;
  ValidationReport validation;
  std::vector<std::string> warnings;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Builds the dataset with intercepts prepended and runs validate_spec.
/// A failed validation becomes a warning, or a ValidationError when strict.
LoadedData load_dataset(const CsvTable& table, const LoadOptions& options);
LoadedData load_dataset(const std::filesystem::path& path, const LoadOptions& options);

/// Design matrix (intercept first) for new rows under fixed encodings.
/// Unknown categorical levels and missing columns raise ParseError.
Eigen::MatrixXd build_design(const CsvTable& table, const std::vector<ColumnEncoding>& encodings);

/// Options of the simulate command.
struct SimulationPlan {
  std::string model = "M1";
  std::vector<std::string> scenarios{"Scenario1"};
  std::optional<std::vector<double>> beta;
  std::optional<std::vector<double>> theta;
  std::optional<std::vector<double>> z_means;
  double tau_true = sim::kDefaultTauTrue;
  std::vector<long> n{500};
  int replicates = 200;
  std::vector<ModelKind> estimators{ModelKind::ZiGev};
  unsigned threads = 0;
};

/// Parses "M1,Scenario1,n=500,N=50,seed=7". Tokens: M1|M2, Scenario1|Scenario2
/// (repeatable), n=<a>/<b>/..., N=<replicates>, seed=<u64>, tau=<real>,
/// estimators=<zi-gev/naive-gev/naive-logistic>, threads=<k>.
/// Returns the plan and, if present, the seed.
std::pair<SimulationPlan, std::optional<std::uint64_t>> parse_preset(std::string_view preset);

/// Configuration file contents. Unknown keys are rejected.
struct RunConfig {
  std::string input;
  std::string response;
  std::vector<std::string> x_columns;
  std::vector<std::string> z_columns;
  std::vector<std::string> categorical;
  std::vector<std::string> models{"m0", "m1", "m2"};
  std::uint64_t seed = 1;
  bool strict = false;
  std::string out = "out";
  FitConfig fit;
  std::string model_file;
  SimulationPlan simulation;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig read_run_config(const std::filesystem::path& path);

/// Model identifiers used on the command line: m0 logistic, m1 gev, m2 zi-gev.
ModelKind model_kind_from_id(const std::string& id);
std::string model_id(ModelKind kind);
ModelKind estimator_from_string(const std::string& name);
std::string estimator_name(ModelKind kind);

std::string read_file(const std::filesystem::path& path);
/// Throws std::runtime_error when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace zigev::io
