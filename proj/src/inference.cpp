#include "zigev/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "zigev/gev.hpp"
#include "zigev/optimize.hpp"

namespace zigev {

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::Simplex ? "simplex" : "quasi-newton";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "simplex" || name == "nelder-mead") return OptimizerKind::Simplex;
  if (name == "quasi-newton" || name == "bfgs") return OptimizerKind::QuasiNewton;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

void FitConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (multistart < 1) throw std::invalid_argument("multistart must be >= 1");
  if (!(tau_lower <= 0.0 && 0.0 <= tau_upper && tau_lower < tau_upper)) {
    throw std::invalid_argument("tau bounds must contain 0");
  }
  if (!(jitter_sd >= 0.0)) throw std::invalid_argument("jitter_sd must be nonnegative");
  if (initial_tau < tau_lower || initial_tau > tau_upper) {
    throw std::invalid_argument("initial_tau outside the tau bounds");
  }
}

std::size_t FitResult::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no coefficient named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

struct Problem {
  ModelKind kind;
  const Dataset& data;
  Eigen::Index p;
  Eigen::Index q;
  Eigen::VectorXd base;  // full flat vector; fixed entries hold their values
  std::vector<Eigen::Index> free;
  optim::Bounds bounds;

  ParamVector expand(const Eigen::VectorXd& x) const {
    Eigen::VectorXd full = base;
    for (std::size_t j = 0; j < free.size(); ++j) full(free[j]) = x(static_cast<Eigen::Index>(j));
    return ParamVector::unflatten(kind, p, q, full);
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(free.size()));
    for (std::size_t j = 0; j < free.size(); ++j) x(static_cast<Eigen::Index>(j)) = full(free[j]);
    return x;
  }

  // Mean negative log-likelihood over the free coordinates.
  optim::Objective objective() const {
    const double n = static_cast<double>(data.n());
    return [this, n](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      const LikelihoodEval e = evaluate(kind, expand(x), data, grad != nullptr);
      if (grad) *grad = -restrict(e.gradient) / n;
      return -e.value / n;
    };
  }
};

struct StartOutcome {
  optim::Result result;
  bool converged = false;
  double loglik = -std::numeric_limits<double>::infinity();
};

bool separated(ModelKind kind, const ParamVector& psi, const Dataset& data) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double mu = 0.0;
    if (kind == ModelKind::Logistic) {
      mu = logistic(data.X.row(i).dot(psi.beta));
    } else {
      mu = response_prob_derivs(data.X.row(i).dot(psi.beta), psi.tau).prob;
      if (kind == ModelKind::ZiGev) mu *= logistic(data.Z.row(i).dot(psi.theta));
    }
    if (std::abs(data.y(i) - mu) >= 1e-4) return false;
  }
  return true;
}

StartOutcome run_start(const Problem& prob, const Eigen::VectorXd& x0, const FitConfig& config) {
  const auto f = prob.objective();
  optim::BfgsOptions bfgs;
  bfgs.max_iterations = config.max_iterations;
  bfgs.gradient_tolerance = config.tolerance;

  StartOutcome out;
  if (config.optimizer == OptimizerKind::QuasiNewton) {
    out.result = optim::minimize_bfgs(f, x0, prob.bounds, bfgs);
    const bool boundary =
        count_boundary_rows(prob.kind, prob.expand(out.result.x), prob.data) > 0;
    if (!out.result.converged || boundary) {
      const optim::Result nm = optim::minimize_nelder_mead(f, out.result.x, prob.bounds);
      optim::Result polished = optim::minimize_bfgs(f, nm.x, prob.bounds, bfgs);
      if (polished.value <= out.result.value) {
        polished.iterations += out.result.iterations + nm.iterations;
        polished.evaluations += out.result.evaluations + nm.evaluations;
        out.result = std::move(polished);
      }
    }
  } else {
    out.result = optim::minimize_nelder_mead(f, x0, prob.bounds);
    f(out.result.x, &out.result.gradient);
  }

  const double grad_norm = out.result.gradient.size() > 0
                               ? out.result.gradient.cwiseAbs().maxCoeff()
                               : 0.0;
  out.converged = std::isfinite(out.result.value) && grad_norm <= config.tolerance &&
                  !separated(prob.kind, prob.expand(out.result.x), prob.data);
  // Zero gradients also occur on the flat side of the GEV support boundary,
  // so a stationary point only counts once the information is positive definite.
  if (out.converged) {
    const ParamVector psi = prob.expand(out.result.x);
    std::vector<bool> estimated(static_cast<std::size_t>(psi.dimension(prob.kind)), false);
    for (Eigen::Index j : prob.free) estimated[static_cast<std::size_t>(j)] = true;
    const StandardErrors se = observed_information_se(prob.kind, psi, prob.data, estimated);
    out.converged = std::any_of(se.available.begin(), se.available.end(), [](bool b) { return b; });
  }
  out.loglik = -out.result.value * static_cast<double>(prob.data.n());
  return out;
}

FitResult run_fit(ModelKind kind, const Dataset& data, const ModelSpec& spec,
                  const FitConfig& config, const Eigen::VectorXd& start, bool with_se) {
  const Eigen::Index p = data.p();
  const Eigen::Index q = kind == ModelKind::ZiGev ? data.q() : 0;

  FitResult fit;
  fit.kind = kind;
  fit.spec = spec;
  fit.names = coefficient_names(kind, spec);
  fit.n = data.n();
  const Eigen::Index dim = parameter_count(kind, p, q);

  Problem prob{kind, data, p, q, start, {}, optim::Bounds::unbounded(0)};
  fit.estimated.assign(static_cast<std::size_t>(dim), true);
  for (const auto& [name, value] : config.fixed) {
    const std::size_t idx = fit.index_of(name);
    fit.estimated[idx] = false;
    prob.base(static_cast<Eigen::Index>(idx)) = value;
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (fit.estimated[static_cast<std::size_t>(j)]) prob.free.push_back(j);
  }
  fit.k = static_cast<int>(prob.free.size());
  if (data.n() < fit.k) {
    throw std::invalid_argument("sample size " + std::to_string(data.n()) +
                                " is smaller than the number of parameters " +
                                std::to_string(fit.k));
  }

  const Eigen::Index k = fit.k;
  prob.bounds = optim::Bounds::unbounded(k);
  const bool has_tau = kind != ModelKind::Logistic;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (has_tau && prob.free[static_cast<std::size_t>(j)] == dim - 1) {
      prob.bounds.lower(j) = config.tau_lower;
      prob.bounds.upper(j) = config.tau_upper;
    }
  }

  const Eigen::VectorXd x_base = prob.bounds.clip(prob.restrict(prob.base));
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> jitter(0.0, config.jitter_sd);

  std::vector<StartOutcome> outcomes;
  for (int s = 0; s < config.multistart; ++s) {
    Eigen::VectorXd x0 = x_base;
    if (s > 0) {
      for (Eigen::Index j = 0; j < k; ++j) x0(j) += jitter(rng);
      x0 = prob.bounds.clip(x0);
    }
    outcomes.push_back(run_start(prob, x0, config));
  }

  std::size_t best = 0;
  bool any_converged = false;
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    const auto& o = outcomes[s];
    if (o.converged && (!any_converged || o.loglik > outcomes[best].loglik)) {
      best = s;
      any_converged = true;
    }
  }
  if (!any_converged) {
    for (std::size_t s = 1; s < outcomes.size(); ++s) {
      if (outcomes[s].loglik > outcomes[best].loglik) best = s;
    }
  }

  const StartOutcome& win = outcomes[best];
  fit.estimates = prob.expand(win.result.x);
  fit.converged = win.converged;
  fit.winning_start = static_cast<int>(best);
  fit.optimizer_message = win.result.message;
  for (const auto& o : outcomes) fit.iterations += o.result.iterations;

  // Recompute at the optimum so that loglik and AIC come from one evaluation.
  const LikelihoodEval at_opt = evaluate(kind, fit.estimates, data, true);
  fit.log_likelihood = at_opt.value;
  fit.aic = aic(fit.log_likelihood, fit.k);
  fit.boundary_rows = static_cast<Eigen::Index>(at_opt.boundary_rows.size());
  fit.gradient_norm =
      k > 0 ? prob.restrict(at_opt.gradient).cwiseAbs().maxCoeff() / static_cast<double>(data.n())
            : 0.0;
  if (fit.gradient_norm > config.tolerance) fit.converged = false;
  if (!fit.converged && separated(kind, fit.estimates, data)) {
    fit.warnings.emplace_back("fitted probabilities reproduce the response exactly "
                              "(complete separation)");
  }
  if (fit.boundary_rows > 0) {
    fit.warnings.push_back(std::to_string(fit.boundary_rows) +
                           " rows lie on the GEV support boundary");
  }

  if (with_se) {
    const StandardErrors se = observed_information_se(kind, fit.estimates, data, fit.estimated);
    fit.standard_errors = se.values;
    fit.se_available = se.available;
    fit.min_information_eigenvalue = se.min_eigenvalue;
    if (std::none_of(se.available.begin(), se.available.end(), [](bool b) { return b; }) &&
        k > 0) {
      fit.warnings.emplace_back("observed information is not positive definite");
    }
  } else {
    fit.standard_errors = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::quiet_NaN());
    fit.se_available.assign(static_cast<std::size_t>(dim), false);
  }
  return fit;
}

// Cloglog (tau ~ 0) fit of the X part, started at beta = 0.
Eigen::VectorXd cloglog_start(const Dataset& data, const ModelSpec& spec, const FitConfig& config) {
  FitConfig cfg = config;
  cfg.multistart = 1;
  cfg.fixed.clear();
  for (const auto& [name, value] : config.fixed) {
    if (name.starts_with("beta[")) cfg.fixed[name] = value;
  }
  cfg.fixed["tau"] = kTauZeroThreshold;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(data.p() + 1);
  start(data.p()) = kTauZeroThreshold;
  try {
    const FitResult fit = run_fit(ModelKind::Gev, data, spec, cfg, start, false);
    if (fit.estimates.beta.allFinite()) return fit.estimates.beta;
  } catch (const std::exception&) {
    // fall through to beta = 0
  }
  return Eigen::VectorXd::Zero(data.p());
}

}  // namespace

FitResult fit_model(ModelKind kind, const Dataset& data, const ModelSpec& spec,
                    const FitConfig& config) {
  config.validate();
  data.validate();
  if (static_cast<Eigen::Index>(spec.x_columns.size()) != data.p()) {
    throw std::invalid_argument("model spec X columns do not match the design matrix");
  }
  if (kind == ModelKind::ZiGev &&
      static_cast<Eigen::Index>(spec.z_columns.size()) != data.q()) {
    throw std::invalid_argument("model spec Z columns do not match the design matrix");
  }
  const double ones = data.y.sum();
  if (ones == 0.0 || ones == static_cast<double>(data.n())) {
    throw DegenerateResponseError(
        "degenerate response: every observation has the same outcome, no finite MLE exists");
  }

  std::vector<std::string> warnings;
  if (kind == ModelKind::ZiGev) {
    const ValidationReport report = validate_spec(spec);
    if (!report.ok) {
      if (!config.allow_unidentified) {
        throw std::invalid_argument("model specification failed validation: " + report.message);
      }
      warnings.push_back("identifiability check overridden: " + report.message);
    }
  }

  const Eigen::Index p = data.p();
  const Eigen::Index q = kind == ModelKind::ZiGev ? data.q() : 0;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(parameter_count(kind, p, q));
  if (kind != ModelKind::Logistic) {
    start.head(p) = cloglog_start(data, spec, config);
    start(start.size() - 1) = config.initial_tau;
  }

  FitResult fit = run_fit(kind, data, spec, config, start, true);
  fit.warnings.insert(fit.warnings.begin(), warnings.begin(), warnings.end());
  return fit;
}

FitResult fit_mle(const Dataset& data, const ModelSpec& spec, const FitConfig& config) {
  return fit_model(ModelKind::ZiGev, data, spec, config);
}

FitResult fit_naive_gev(const Dataset& data, const ModelSpec& x_spec, const FitConfig& config) {
  return fit_model(ModelKind::Gev, data, x_spec, config);
}

FitResult fit_naive_logistic(const Dataset& data, const ModelSpec& x_spec,
                             const FitConfig& config) {
  return fit_model(ModelKind::Logistic, data, x_spec, config);
}

Eigen::MatrixXd loglik_hessian(ModelKind kind, const ParamVector& psi, const Dataset& data) {
  const Eigen::VectorXd center = psi.flatten(kind);
  const Eigen::Index dim = center.size();
  const Eigen::Index p = psi.beta.size(), q = psi.theta.size();
  Eigen::MatrixXd hess(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(center(j)));
    Eigen::VectorXd up = center, down = center;
    up(j) += h;
    down(j) -= h;
    const Eigen::VectorXd g_up =
        evaluate(kind, ParamVector::unflatten(kind, p, q, up), data).gradient;
    const Eigen::VectorXd g_down =
        evaluate(kind, ParamVector::unflatten(kind, p, q, down), data).gradient;
    hess.col(j) = (g_up - g_down) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

StandardErrors observed_information_se(ModelKind kind, const ParamVector& psi,
                                       const Dataset& data, const std::vector<bool>& estimated) {
  const Eigen::MatrixXd hess = loglik_hessian(kind, psi, data);
  const Eigen::Index dim = hess.rows();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (estimated.empty() || estimated[static_cast<std::size_t>(j)]) idx.push_back(j);
  }
  const auto m = static_cast<Eigen::Index>(idx.size());

  StandardErrors out;
  out.values = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::quiet_NaN());
  out.available.assign(static_cast<std::size_t>(dim), false);
  if (m == 0) return out;

  Eigen::MatrixXd info(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) info(a, b) = -hess(idx[a], idx[b]);
  }
  if (!info.allFinite()) {
    out.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  out.min_eigenvalue = lambda.minCoeff();
  if (!(out.min_eigenvalue > 1e-12 * std::max(1.0, lambda.maxCoeff()))) return out;

  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::MatrixXd cov = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
  for (Eigen::Index a = 0; a < m; ++a) {
    out.values(idx[a]) = std::sqrt(cov(a, a));
    out.available[static_cast<std::size_t>(idx[a])] = true;
  }
  return out;
}

StandardErrors standard_errors(const FitResult& fit, const Dataset& data) {
  return observed_information_se(fit.kind, fit.estimates, data, fit.estimated);
}

double two_sided_normal_p(double z) noexcept {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

WaldResult wald_test(const std::string& name, double estimate, double standard_error) {
  if (!(standard_error > 0.0) || !std::isfinite(standard_error)) {
    throw std::invalid_argument("standard error unavailable for '" + name + "'");
  }
  WaldResult w;
  w.name = name;
  w.estimate = estimate;
  w.standard_error = standard_error;
  w.z = estimate / standard_error;
  w.p_value = two_sided_normal_p(w.z);
  return w;
}

WaldResult wald_test(const FitResult& fit, const std::string& coefficient) {
  const std::size_t idx = fit.index_of(coefficient);
  if (!fit.se_available.at(idx)) {
    throw std::invalid_argument("standard error unavailable for '" + coefficient + "'");
  }
  const Eigen::VectorXd flat = fit.estimates.flatten(fit.kind);
  const auto j = static_cast<Eigen::Index>(idx);
  return wald_test(coefficient, flat(j), fit.standard_errors(j));
}

double aic(double log_likelihood, int k) noexcept {
  return 2.0 * k - 2.0 * log_likelihood;
}

double aic(const FitResult& fit) noexcept { return aic(fit.log_likelihood, fit.k); }

Prediction predict(ModelKind kind, const ParamVector& psi,
                   const Eigen::Ref<const Eigen::VectorXd>& x_row,
                   const Eigen::Ref<const Eigen::VectorXd>& z_row) {
  if (x_row.size() != psi.beta.size()) {
    throw std::invalid_argument("predict: x row does not match beta");
  }
  Prediction out;
  const double eta = x_row.dot(psi.beta);
  switch (kind) {
    case ModelKind::Logistic:
      out.infection_prob_if_susceptible = logistic(eta);
      break;
    case ModelKind::Gev:
      out.infection_prob_if_susceptible = response_prob_derivs(eta, psi.tau).prob;
      break;
    case ModelKind::ZiGev:
      if (z_row.size() != psi.theta.size()) {
        throw std::invalid_argument("predict: z row does not match theta");
      }
      out.infection_prob_if_susceptible = response_prob_derivs(eta, psi.tau).prob;
      out.susceptible_prob = logistic(z_row.dot(psi.theta));
      break;
  }
  out.marginal_infection_prob = out.susceptible_prob * out.infection_prob_if_susceptible;
  return out;
}

Prediction predict_infection(const FitResult& fit, const Eigen::Ref<const Eigen::VectorXd>& x_row,
                             const Eigen::Ref<const Eigen::VectorXd>& z_row) {
  return predict(fit.kind, fit.estimates, x_row, z_row);
}

}  // namespace zigev
