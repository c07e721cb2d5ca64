#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zigev/model.hpp"

namespace zigev {

enum class OptimizerKind { Simplex, QuasiNewton };

const char* to_string(OptimizerKind kind) noexcept;
OptimizerKind optimizer_from_string(const std::string& name);

struct FitConfig {
  OptimizerKind optimizer = OptimizerKind::QuasiNewton;
  int max_iterations = 500;
  /// Bound on the infinity-norm of the log-likelihood gradient divided by n.
  double tolerance = 1e-6;
  int multistart = 5;
  double tau_lower = -5.0;
  double tau_upper = 10.0;
  /// Starting shape for the GEV models.
  double initial_tau = 0.1;
  /// Standard deviation of the per-component jitter applied to starts 2..m.
  double jitter_sd = 0.5;
  std::uint64_t seed = 1;
  /// Coefficients held at a fixed value, keyed by coefficient name
  /// ("beta[<col>]", "theta[<col>]", "tau"). They do not count towards k.
  std::map<std::string, double> fixed;
  /// Fit a zero-inflated model even when validate_spec fails; a warning is
  /// recorded on the result.
  bool allow_unidentified = false;

  void validate() const;
};

class DegenerateResponseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FitResult {
  ModelKind kind = ModelKind::ZiGev;
  ModelSpec spec;
  std::vector<std::string> names;
  ParamVector estimates;
  /// False for coefficients held fixed through FitConfig::fixed.
  std::vector<bool> estimated;
  /// NaN where unavailable.
  Eigen::VectorXd standard_errors;
  std::vector<bool> se_available;
  /// Smallest eigenvalue of the observed information over the estimated block.
  double min_information_eigenvalue = 0.0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  int k = 0;
  Eigen::Index n = 0;
  bool converged = false;
  /// ||d loglik||_inf / n over the estimated coefficients.
  double gradient_norm = 0.0;
  Eigen::Index boundary_rows = 0;
  int iterations = 0;
  int winning_start = 0;
  std::string optimizer_message;
  std::vector<std::string> warnings;

  /// Index of a coefficient by name; throws std::out_of_range.
  std::size_t index_of(const std::string& name) const;
};

struct StandardErrors {
  Eigen::VectorXd values;  // NaN where unavailable
  std::vector<bool> available;
  double min_eigenvalue = 0.0;
};

struct WaldResult {
  std::string name;
  double estimate = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct Prediction {
  double susceptible_prob = 1.0;
  double infection_prob_if_susceptible = 0.0;
  double marginal_infection_prob = 0.0;
};

/// Generic maximum-likelihood fit of any model kind.
FitResult fit_model(ModelKind kind, const Dataset& data, const ModelSpec& spec,
                    const FitConfig& config);

/// Zero-inflated GEV fit.
FitResult fit_mle(const Dataset& data, const ModelSpec& spec, const FitConfig& config);

/// GEV regression that treats every zero as a susceptible non-event.
FitResult fit_naive_gev(const Dataset& data, const ModelSpec& x_spec, const FitConfig& config);

/// Plain logistic regression on the X design.
FitResult fit_naive_logistic(const Dataset& data, const ModelSpec& x_spec,
                             const FitConfig& config);

/// Observed-information standard errors at psi. The Hessian is built by
/// central differences of the analytic gradient with step
/// 1e-5 * max(1, |psi_j|). Entries in `estimated` == false are skipped.
StandardErrors observed_information_se(ModelKind kind, const ParamVector& psi,
                                       const Dataset& data, const std::vector<bool>& estimated);

/// Hessian of the log-likelihood by central differences of the analytic gradient.
Eigen::MatrixXd loglik_hessian(ModelKind kind, const ParamVector& psi, const Dataset& data);

StandardErrors standard_errors(const FitResult& fit, const Dataset& data);

/// Throws std::invalid_argument when the standard error is unavailable.
WaldResult wald_test(const FitResult& fit, const std::string& coefficient);
WaldResult wald_test(const std::string& name, double estimate, double standard_error);

/// 2k - 2 * loglik.
double aic(double log_likelihood, int k) noexcept;
double aic(const FitResult& fit) noexcept;

Prediction predict(ModelKind kind, const ParamVector& psi,
                   const Eigen::Ref<const Eigen::VectorXd>& x_row,
                   const Eigen::Ref<const Eigen::VectorXd>& z_row);
Prediction predict_infection(const FitResult& fit, const Eigen::Ref<const Eigen::VectorXd>& x_row,
                             const Eigen::Ref<const Eigen::VectorXd>& z_row);

/// Two-sided standard-normal tail probability 2 * (1 - Phi(|z|)).
double two_sided_normal_p(double z) noexcept;

}  // namespace zigev
