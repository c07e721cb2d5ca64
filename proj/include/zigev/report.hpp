#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zigev/inference.hpp"
#include "zigev/io.hpp"
#include "zigev/simulation.hpp"

namespace zigev::report {

inline constexpr int kSchemaVersion = 1;

/// Everything the fit command emits. Tables and JSON are both rendered from this.
struct FitReport {
  std::uint64_t seed = 1;
  io::RunConfig config;
  std::vector<io::ColumnEncoding> x_encodings;
  std::vector<io::ColumnEncoding> z_encodings;
  ValidationReport validation;
  std::vector<FitResult> fits;
  std::vector<std::string> warnings;

  /// Index into fits of the lowest AIC; -1 when there are no fits.
  int best_aic_index() const;
};

/// Fixed-width comparison table: one block of Estimate/SE/z/p per model,
/// followed by log-likelihood, AIC (lowest marked with '*'), convergence and
/// boundary-row counts. `color` adds ANSI emphasis and must be false for files.
std::string fit_table(const FitReport& report, bool color = false);

std::string fit_json(const FitReport& report);

/// Reloads a fit file written by fit_json. Throws std::invalid_argument on
/// malformed content or an unsupported schema version.
FitReport fit_from_json(std::string_view text);

/// Response curves pi(eta) on eta = -6, -5.9, ..., 6 for every fitted model.
std::string response_curves_csv(const FitReport& report);

struct PredictionRow {
  std::size_t row = 0;  // 1-based
  std::string model;    // m0/m1/m2
  Prediction prediction;
};

std::string predictions_csv(const std::vector<PredictionRow>& rows);

/// One simulate invocation: a grid of scenarios by sample sizes sharing a
/// model preset and base seed.
struct StudyReport {
  std::uint64_t seed = 1;
  std::string model;
  double tau_true = sim::kDefaultTauTrue;
  int replicates = 0;
  std::vector<ModelKind> estimators;
  /// Ordered scenario-major, then by n.
  std::vector<sim::SimulationReport> cells;
};

/// Rows n x {MLE, BIAS, RMSE}; columns coefficients x scenario, one section
/// per estimator, then a diagnostics block.
std::string study_table(const StudyReport& study, bool color = false);
std::string study_json(const StudyReport& study);
StudyReport study_from_json(std::string_view text);

/// Whether stdout should get ANSI color: a terminal and NO_COLOR unset.
bool stdout_supports_color();

}  // namespace zigev::report
