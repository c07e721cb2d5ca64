#include "zigev/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

#include "zigev/gev.hpp"

namespace zigev::sim {

Eigen::VectorXd model_preset(const std::string& name) {
  if (name == "M1") return Eigen::Vector3d(-2.1, 1.2, 0.0);
  if (name == "M2") return Eigen::Vector3d(-1.3, 0.0, 2.5);
  throw std::invalid_argument("unknown model preset '" + name + "' (expected M1 or M2)");
}

Eigen::VectorXd scenario_preset(const std::string& name) {
  if (name == "Scenario1") return Eigen::Vector3d(0.85, -1.8, 0.5);
  if (name == "Scenario2") return Eigen::Vector3d(0.2, 1.5, -1.71);
  throw std::invalid_argument("unknown scenario preset '" + name +
                              "' (expected Scenario1 or Scenario2)");
}

int scenario_immune_percent(const std::string& name) {
  if (name == "Scenario1") return 30;
  if (name == "Scenario2") return 70;
  return -1;
}

void SimulationConfig::validate() const {
  if (n < 1) throw std::invalid_argument("simulation sample size must be >= 1");
  if (replicates < 1) throw std::invalid_argument("replicate count must be >= 1");
  if (beta_true.size() < 1 || theta_true.size() < 1) {
    throw std::invalid_argument("beta_true and theta_true need at least an intercept");
  }
  if (!beta_true.allFinite() || !theta_true.allFinite() || !std::isfinite(tau_true)) {
    throw std::invalid_argument("true parameters must be finite");
  }
  if (z_means.size() != 0 && z_means.size() != theta_true.size() - 1) {
    throw std::invalid_argument("z_means must have one entry per non-intercept Z covariate");
  }
  if (!z_means.allFinite()) throw std::invalid_argument("z_means must be finite");
  if (estimators.empty()) throw std::invalid_argument("no estimators requested");
  GevLink link(tau_true);
  fit.validate();
}

SimulationConfig preset_config(const std::string& model, const std::string& scenario,
                               Eigen::Index n, int replicates, std::uint64_t seed,
                               double tau_true) {
  SimulationConfig cfg;
  cfg.model_name = model;
  cfg.scenario_name = scenario;
  cfg.beta_true = model_preset(model);
  cfg.theta_true = scenario_preset(scenario);
  cfg.tau_true = tau_true;
  cfg.z_means = Eigen::Vector2d(0.0, 1.0);
  cfg.n = n;
  cfg.replicates = replicates;
  cfg.base_seed = seed;
  return cfg;
}

ModelSpec simulation_spec(Eigen::Index p, Eigen::Index q) {
  ModelSpec spec;
  spec.x_columns.emplace_back(kIntercept);
  spec.z_columns.emplace_back(kIntercept);
  for (Eigen::Index j = 2; j <= p; ++j) spec.x_columns.push_back("x" + std::to_string(j));
  for (Eigen::Index j = 2; j <= q; ++j) spec.z_columns.push_back("z" + std::to_string(j));
  return spec;
}

double SimulatedDataset::immune_fraction() const {
  if (truth.empty()) return 0.0;
  const auto immune = std::count(truth.begin(), truth.end(), Susceptibility::Immune);
  return static_cast<double>(immune) / static_cast<double>(truth.size());
}

double SimulatedDataset::ones_fraction() const {
  return data.n() == 0 ? 0.0 : data.y.mean();
}

SimulatedDataset simulate_dataset(const SimulationConfig& config, std::uint64_t seed) {
  const Eigen::Index n = config.n;
  const Eigen::Index p = config.beta_true.size();
  const Eigen::Index q = config.theta_true.size();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedDataset out;
  Dataset& d = out.data;
  d.y.resize(n);
  d.X.resize(n, p);
  d.Z.resize(n, q);
  d.s.resize(static_cast<std::size_t>(n));
  out.truth.resize(static_cast<std::size_t>(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) d.X(i, j) = normal(rng);
    d.Z(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < q; ++j) {
      d.Z(i, j) = normal(rng) + (config.z_means.size() ? config.z_means(j - 1) : 0.0);
    }

    const bool susceptible = unif(rng) < logistic(d.Z.row(i).dot(config.theta_true));
    double y = 0.0;
    if (susceptible) {
      const double pi = response_prob_derivs(d.X.row(i).dot(config.beta_true), config.tau_true).prob;
      y = unif(rng) < pi ? 1.0 : 0.0;
    }
    d.y(i) = y;
    const auto ui = static_cast<std::size_t>(i);
    out.truth[ui] = susceptible ? Susceptibility::Susceptible : Susceptibility::Immune;
    d.s[ui] = y == 1.0 ? Susceptibility::Susceptible : Susceptibility::Unknown;
  }
  return out;
}

std::vector<BiasRmse> bias_rmse(const std::vector<Eigen::VectorXd>& estimates,
                                const Eigen::VectorXd& truth) {
  if (estimates.empty()) throw std::invalid_argument("bias_rmse: no estimates");
  const Eigen::Index k = truth.size();
  Eigen::VectorXd sum_dev = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(k);
  for (const auto& est : estimates) {
    if (est.size() != k) throw std::invalid_argument("bias_rmse: dimension mismatch");
    const Eigen::VectorXd dev = est - truth;
    sum_dev += dev;
    sum_sq += dev.cwiseProduct(dev);
  }
  const double count = static_cast<double>(estimates.size());
  std::vector<BiasRmse> out(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    out[static_cast<std::size_t>(j)] = {sum_dev(j) / count, std::sqrt(sum_sq(j) / count)};
  }
  return out;
}

const EstimatorSummary& SimulationReport::estimator(ModelKind kind) const {
  for (const auto& e : estimators) {
    if (e.kind == kind) return e;
  }
  throw std::out_of_range(std::string("estimator not in report: ") + to_string(kind));
}

Eigen::VectorXd truth_for(ModelKind kind, const SimulationConfig& config) {
  ParamVector psi{config.beta_true, config.theta_true, config.tau_true};
  if (kind != ModelKind::ZiGev) psi.theta.resize(0);
  return psi.flatten(kind);
}

namespace {

struct ReplicateOutcome {
  double immune_fraction = 0.0;
  double ones_fraction = 0.0;
  std::vector<std::optional<Eigen::VectorXd>> estimates;
};

ReplicateOutcome run_replicate(const SimulationConfig& config, const ModelSpec& spec, int k) {
  const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(k);
  const SimulatedDataset sample = simulate_dataset(config, seed);

  ReplicateOutcome out;
  out.immune_fraction = sample.immune_fraction();
  out.ones_fraction = sample.ones_fraction();
  FitConfig fit_cfg = config.fit;
  fit_cfg.seed = seed;
  for (ModelKind kind : config.estimators) {
    std::optional<Eigen::VectorXd> est;
    try {
      const FitResult fit = fit_model(kind, sample.data, spec, fit_cfg);
      if (fit.converged) est = fit.estimates.flatten(kind);
    } catch (const std::invalid_argument&) {
      // degenerate sample; counted as a failure
    }
    out.estimates.push_back(std::move(est));
  }
  return out;
}

}  // namespace

SimulationReport run_study(const SimulationConfig& config) {
  config.validate();
  const ModelSpec spec = simulation_spec(config.beta_true.size(), config.theta_true.size());
  const int total = config.replicates;

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(total));
  unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : config.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(total));

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&]() {
    for (int k = next.fetch_add(1); k < total && !failed; k = next.fetch_add(1)) {
      try {
        outcomes[static_cast<std::size_t>(k)] = run_replicate(config, spec, k + 1);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  // Fixed-order reduction over replicate index.
  SimulationReport report;
  report.config = config;
  report.replicates = total;
  for (const auto& o : outcomes) {
    report.mean_immune_fraction += o.immune_fraction;
    report.mean_ones_fraction += o.ones_fraction;
  }
  report.mean_immune_fraction /= total;
  report.mean_ones_fraction /= total;

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    const ModelKind kind = config.estimators[e];
    EstimatorSummary summary;
    summary.kind = kind;
    std::vector<Eigen::VectorXd> ok;
    for (const auto& o : outcomes) {
      if (o.estimates[e]) ok.push_back(*o.estimates[e]);
    }
    summary.successes = static_cast<int>(ok.size());
    summary.failures = total - summary.successes;
    if (ok.empty()) {
      throw std::runtime_error(std::string("every replicate failed for estimator ") +
                               to_string(kind));
    }
    const Eigen::VectorXd truth = truth_for(kind, config);
    const auto stats = bias_rmse(ok, truth);
    const auto names = coefficient_names(kind, spec);
    const double count = static_cast<double>(ok.size());
    for (std::size_t j = 0; j < stats.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      CoefficientSummary c;
      c.name = names[j];
      c.truth = truth(jj);
      c.bias = stats[j].bias;
      c.rmse = stats[j].rmse;
      c.mean = c.truth + c.bias;
      double ss = 0.0;
      for (const auto& est : ok) ss += (est(jj) - c.mean) * (est(jj) - c.mean);
      c.mc_se = ok.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
      summary.coefficients.push_back(c);
    }
    report.estimators.push_back(std::move(summary));
  }
  return report;
}

}  // namespace zigev::sim
