#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace zigev::optim {

/// Returns f(x); when `grad` is non-null it also fills the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Box bounds; use +/-infinity for free coordinates.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds unbounded(Eigen::Index n);
  Eigen::VectorXd clip(const Eigen::VectorXd& x) const;
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;  // empty for derivative-free runs
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

struct BfgsOptions {
  int max_iterations = 500;
  /// Stop when the projected gradient infinity-norm drops below this.
  double gradient_tolerance = 1e-6;
  /// Largest coordinate change allowed in one line-search trial.
  double max_step = 5.0;
};

/// Quasi-Newton minimisation with an inverse-Hessian BFGS update, Armijo
/// backtracking and projection onto the bounds.
Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                     const BfgsOptions& options = {});

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double value_tolerance = 1e-12;
  double initial_step = 0.25;
  /// Restart from the best vertex until a restart stops improving.
  int max_restarts = 4;
};

Result minimize_nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                            const NelderMeadOptions& options = {});

/// Infinity-norm of the gradient with components pushing out of an active
/// bound removed.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Bounds& bounds);

}  // namespace zigev::optim
