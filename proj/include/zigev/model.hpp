#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zigev {

inline constexpr const char* kIntercept = "Intercept";

/// Which likelihood a parameter vector belongs to.
///   Logistic: P(Y=1|x) = logistic(x'beta)
///   Gev:      P(Y=1|x) = pi(x'beta; tau)
///   ZiGev:    P(Y=1|x,z) = pi(x'beta; tau) * logistic(z'theta)
enum class ModelKind { Logistic, Gev, ZiGev };

const char* to_string(ModelKind kind) noexcept;

/// Covariate layout of the infection (X) and susceptibility (Z) predictors.
/// Both lists start with kIntercept. Covariates absent from `continuous`
/// are treated as continuous.
struct ModelSpec {
  std::vector<std::string> x_columns;
  std::vector<std::string> z_columns;
  std::map<std::string, bool> continuous;

  bool is_continuous(const std::string& name) const;
};

struct ValidationReport {
  bool ok = false;
  /// The continuous covariate entering exactly one predictor (the exclusion
  /// restriction that makes beta and theta separately identifiable).
  std::optional<std::string> exclusion_covariate;
  /// Where the exclusion covariate lives: "z-only" or "x-only".
  std::string exclusion_side;
  std::vector<std::string> candidates;
  std::string message;
};

/// Checks list structure and the exclusion-covariate identifiability rule.
/// Failures are reported, never thrown. Pass/fail does not depend on the
/// order of either covariate list.
ValidationReport validate_spec(const ModelSpec& spec);

/// psi = (beta, theta, tau). theta is empty for the naive models; tau is
/// ignored by the logistic model.
struct ParamVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd theta;
  double tau = 0.0;

  /// Number of free entries for `kind`.
  Eigen::Index dimension(ModelKind kind) const;
  /// Flattened as [beta, theta, tau] restricted to the entries `kind` uses.
  Eigen::VectorXd flatten(ModelKind kind) const;
  static ParamVector unflatten(ModelKind kind, Eigen::Index p, Eigen::Index q,
                               const Eigen::VectorXd& flat);
};

Eigen::Index parameter_count(ModelKind kind, Eigen::Index p, Eigen::Index q);

/// Coefficient labels in flattened order: "beta[<col>]", "theta[<col>]", "tau".
std::vector<std::string> coefficient_names(ModelKind kind, const ModelSpec& spec);

enum class Susceptibility : std::uint8_t { Susceptible, Immune, Unknown };

struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  /// Optional latent susceptibility status; empty when not available.
  /// Estimation code never reads it.
  std::vector<Susceptibility> s;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return X.cols(); }
  Eigen::Index q() const noexcept { return Z.cols(); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Thrown by `score` when a row sits on the (1 - tau*eta) <= 0 boundary.
class BoundaryError : public std::runtime_error {
 public:
  explicit BoundaryError(Eigen::Index row);
  Eigen::Index row() const noexcept { return row_; }

 private:
  Eigen::Index row_;
};

/// P(Y = 1 | x, z) under the zero-inflated model.
double joint_prob(const Eigen::Ref<const Eigen::VectorXd>& x_row,
                  const Eigen::Ref<const Eigen::VectorXd>& z_row,
                  const ParamVector& psi);

/// Zero-inflated log-likelihood; probabilities clamped to [1e-12, 1 - 1e-12].
double log_likelihood(const ParamVector& psi, const Dataset& data);

/// Gradient of the zero-inflated log-likelihood in flattened (beta, theta, tau)
/// order. Throws BoundaryError naming the first boundary row.
Eigen::VectorXd score(const ParamVector& psi, const Dataset& data);

struct LikelihoodEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  /// Rows with (1 - tau*eta) <= 0; they contribute a zero gradient.
  std::vector<Eigen::Index> boundary_rows;
};

double log_likelihood(ModelKind kind, const ParamVector& psi, const Dataset& data);

/// Value and gradient for any model kind. Boundary rows are recorded rather
/// than rejected.
LikelihoodEval evaluate(ModelKind kind, const ParamVector& psi, const Dataset& data,
                        bool with_gradient = true);

Eigen::Index count_boundary_rows(ModelKind kind, const ParamVector& psi,
                                 const Dataset& data);

}  // namespace zigev
