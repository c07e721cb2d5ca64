#include <cmath>

#include "doctest.h"
#include "zigev/simulation.hpp"

using namespace zigev;

TEST_CASE("presets") {
  CHECK(sim::model_preset("M1") == Eigen::Vector3d(-2.1, 1.2, 0.0));
  CHECK(sim::model_preset("M2") == Eigen::Vector3d(-1.3, 0.0, 2.5));
  CHECK(sim::scenario_preset("Scenario1") == Eigen::Vector3d(0.85, -1.8, 0.5));
  CHECK(sim::scenario_preset("Scenario2") == Eigen::Vector3d(0.2, 1.5, -1.71));
  CHECK_THROWS_AS(sim::model_preset("M3"), std::invalid_argument);
  CHECK(sim::scenario_immune_percent("Scenario2") == 70);
  const auto cfg = sim::preset_config("M1", "Scenario1", 500, 10, 7);
  CHECK(cfg.tau_true == 0.25);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("immune fractions of the scenario presets") {
  const auto s1 = sim::simulate_dataset(sim::preset_config("M1", "Scenario1", 100000, 1, 1), 11);
  const auto s2 = sim::simulate_dataset(sim::preset_config("M1", "Scenario2", 100000, 1, 1), 12);
  CHECK(std::abs(s1.immune_fraction() - 0.30) < 0.01);
  CHECK(std::abs(s2.immune_fraction() - 0.70) < 0.01);
  CHECK(s1.ones_fraction() > s2.ones_fraction());
}

TEST_CASE("simulated data structure") {
  auto cfg = sim::preset_config("M2", "Scenario1", 2000, 1, 1);
  const auto a = sim::simulate_dataset(cfg, 5);
  const auto b = sim::simulate_dataset(cfg, 5);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.X == b.data.X);
  CHECK_NOTHROW(a.data.validate());
  for (Eigen::Index i = 0; i < a.data.n(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (a.data.y(i) == 1.0) {
      CHECK(a.truth[ui] == Susceptibility::Susceptible);
      CHECK(a.data.s[ui] == Susceptibility::Susceptible);
    } else {
      CHECK(a.data.s[ui] == Susceptibility::Unknown);
    }
  }
  CHECK(sim::simulate_dataset(cfg, 6).data.y != a.data.y);

  cfg.theta_true = Eigen::Vector3d(-30.0, 0.0, 0.0);
  cfg.z_means.resize(0);
  const auto immune = sim::simulate_dataset(cfg, 7);
  CHECK(immune.data.y.sum() == 0.0);
}

TEST_CASE("bias_rmse") {
  const auto two = sim::bias_rmse({Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 3.0)},
                                  Eigen::VectorXd::Constant(1, 2.0));
  CHECK(two[0].bias == 0.0);
  CHECK(two[0].rmse == 1.0);
  const auto one = sim::bias_rmse({Eigen::Vector2d(0.5, -1.0)}, Eigen::Vector2d(0.5, -1.0));
  CHECK(one[0].bias == 0.0);
  CHECK(one[1].rmse == 0.0);

  // Spreadsheet-style: column means and root mean squares written out by hand.
  std::vector<Eigen::VectorXd> est{Eigen::Vector2d(1.0, 4.0), Eigen::Vector2d(2.0, 3.5), Eigen::Vector2d(0.5, 5.0),
                                   Eigen::Vector2d(1.5, 4.5), Eigen::Vector2d(3.0, 2.0)};
  const Eigen::Vector2d truth(1.2, 4.1);
  const double mean0 = (1.0 + 2.0 + 0.5 + 1.5 + 3.0) / 5.0;
  const double mean1 = (4.0 + 3.5 + 5.0 + 4.5 + 2.0) / 5.0;
  const double ms0 = (0.04 + 0.64 + 0.49 + 0.09 + 3.24) / 5.0;
  const double ms1 = (0.01 + 0.36 + 0.81 + 0.16 + 4.41) / 5.0;
  const auto r = sim::bias_rmse(est, truth);
  CHECK(r[0].bias == doctest::Approx(mean0 - 1.2).epsilon(1e-14));
  CHECK(r[1].bias == doctest::Approx(mean1 - 4.1).epsilon(1e-14));
  CHECK(r[0].rmse == doctest::Approx(std::sqrt(ms0)).epsilon(1e-14));
  CHECK(r[1].rmse == doctest::Approx(std::sqrt(ms1)).epsilon(1e-14));

  CHECK_THROWS_AS(sim::bias_rmse({}, truth), std::invalid_argument);
  CHECK_THROWS_AS(sim::bias_rmse({Eigen::VectorXd::Zero(3)}, truth), std::invalid_argument);
}

TEST_CASE("run_study bookkeeping") {
  auto cfg = sim::preset_config("M1", "Scenario1", 600, 12, 3);
  cfg.estimators = {ModelKind::ZiGev, ModelKind::Gev, ModelKind::Logistic};
  cfg.threads = 1;
  const auto serial = sim::run_study(cfg);
  cfg.threads = 4;
  const auto parallel = sim::run_study(cfg);

  CHECK(serial.replicates == 12);
  CHECK(serial.mean_immune_fraction == parallel.mean_immune_fraction);
  CHECK(serial.mean_immune_fraction >= 0.0);
  CHECK(serial.mean_immune_fraction <= 1.0);
  CHECK(serial.mean_ones_fraction >= 0.0);
  CHECK(serial.mean_ones_fraction <= 1.0);
  REQUIRE(serial.estimators.size() == 3);
  for (std::size_t e = 0; e < serial.estimators.size(); ++e) {
    const auto& a = serial.estimators[e];
    const auto& b = parallel.estimators[e];
    CHECK(a.successes + a.failures == 12);
    CHECK(a.successes == b.successes);
    REQUIRE(a.coefficients.size() == b.coefficients.size());
    for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
      CHECK(a.coefficients[j].bias == b.coefficients[j].bias);
      CHECK(a.coefficients[j].rmse == b.coefficients[j].rmse);
      CHECK(a.coefficients[j].rmse >= std::abs(a.coefficients[j].bias));
    }
  }
  CHECK(serial.estimator(ModelKind::Gev).coefficients.size() == 4);
  CHECK(serial.estimator(ModelKind::Logistic).coefficients.size() == 3);
  CHECK(serial.estimator(ModelKind::ZiGev).coefficients.back().name == "tau");
}

TEST_CASE("single replicate study reports the raw deviation") {
  auto cfg = sim::preset_config("M1", "Scenario1", 1500, 1, 9);
  cfg.estimators = {ModelKind::Gev};
  const auto report = sim::run_study(cfg);
  const auto& e = report.estimator(ModelKind::Gev);
  REQUIRE(e.successes == 1);

  const auto sample = sim::simulate_dataset(cfg, 10);
  FitConfig fc = cfg.fit;
  fc.seed = 10;
  const FitResult fit = fit_model(ModelKind::Gev, sample.data, sim::simulation_spec(3, 3), fc);
  const Eigen::VectorXd est = fit.estimates.flatten(ModelKind::Gev);
  const Eigen::VectorXd truth = sim::truth_for(ModelKind::Gev, cfg);
  for (std::size_t j = 0; j < e.coefficients.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    CHECK(e.coefficients[j].bias == doctest::Approx(est(jj) - truth(jj)).epsilon(1e-12));
    CHECK(e.coefficients[j].rmse == doctest::Approx(std::abs(e.coefficients[j].bias)).epsilon(1e-12));
  }
}

TEST_CASE("estimation never reads the latent susceptibility") {
  auto cfg = sim::preset_config("M1", "Scenario1", 800, 1, 2);
  auto sample = sim::simulate_dataset(cfg, 3);
  const ModelSpec spec = sim::simulation_spec(3, 3);
  const FitResult a = fit_mle(sample.data, spec, FitConfig{});
  sample.data.s.assign(sample.data.s.size(), Susceptibility::Susceptible);
  const FitResult b = fit_mle(sample.data, spec, FitConfig{});
  sample.data.s.clear();
  const FitResult c = fit_mle(sample.data, spec, FitConfig{});
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.log_likelihood == c.log_likelihood);
}

TEST_CASE("a study where every replicate fails is an error") {
  auto cfg = sim::preset_config("M1", "Scenario1", 50, 3, 1);
  cfg.theta_true = Eigen::Vector3d(-30.0, 0.0, 0.0);
  CHECK_THROWS_AS(sim::run_study(cfg), std::runtime_error);

  cfg = sim::preset_config("M1", "Scenario1", 0, 3, 1);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = sim::preset_config("M1", "Scenario1", 10, 3, 1);
  cfg.z_means = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
