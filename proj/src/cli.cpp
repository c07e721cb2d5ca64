#include "zigev/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "zigev/gev.hpp"
#include "zigev/inference.hpp"
#include "zigev/io.hpp"
#include "zigev/report.hpp"
#include "zigev/simulation.hpp"

namespace zigev::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string out;
  std::vector<std::string> models;
  std::string preset;
  std::optional<unsigned> threads;
  std::string model_file;
  std::string input;
  std::string response;
  std::vector<std::string> x_columns;
  std::vector<std::string> z_columns;
  std::vector<std::string> categorical;
  long synth_n = 515;
};

// Config file (if any) overlaid with command-line values.
io::RunConfig resolve_config(const Options& o) {
  io::RunConfig cfg = o.config.empty() ? io::RunConfig{} : io::read_run_config(o.config);
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.response.empty()) cfg.response = o.response;
  if (!o.x_columns.empty()) cfg.x_columns = o.x_columns;
  if (!o.z_columns.empty()) cfg.z_columns = o.z_columns;
  if (!o.categorical.empty()) cfg.categorical = o.categorical;
  if (!o.models.empty()) cfg.models = o.models;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.model_file.empty()) cfg.model_file = o.model_file;
  if (o.seed) cfg.seed = *o.seed;
  cfg.strict = cfg.strict || o.strict;
  cfg.fit.seed = cfg.seed;
  for (const auto& m : cfg.models) io::model_kind_from_id(m);
  return cfg;
}

io::LoadOptions load_options(const io::RunConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("no input file given (--input or config 'input')");
  if (cfg.response.empty()) throw std::invalid_argument("no response column given (--response or config 'response')");
  return io::LoadOptions{cfg.response, cfg.x_columns, cfg.z_columns, cfg.categorical, cfg.strict};
}

void print_validation(const ValidationReport& v, std::ostream& os) {
  os << "identifiability: " << (v.ok ? "ok" : "FAILED") << "\n";
  if (!v.message.empty()) os << "  " << v.message << "\n";
  if (v.exclusion_covariate) {
    os << "  exclusion covariate: " << *v.exclusion_covariate << " (" << v.exclusion_side << ")\n";
  }
  if (!v.candidates.empty()) {
    os << "  candidates:";
    for (const auto& c : v.candidates) os << " " << c;
    os << "\n";
  }
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const io::RunConfig cfg = resolve_config(o);
  io::LoadedData loaded;
  try {
    loaded = io::load_dataset(fs::path(cfg.input), load_options(cfg));
  } catch (const io::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    print_validation(e.report(), err);
    return kUsageError;
  }
  for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";

  FitConfig fit_cfg = cfg.fit;
  // Outside strict mode a failed identifiability check is a warning, so the
  // zero-inflated fit still runs.
  fit_cfg.allow_unidentified = fit_cfg.allow_unidentified || !cfg.strict;

  report::FitReport rep;
  rep.seed = cfg.seed;
  rep.config = cfg;
  rep.x_encodings = loaded.x_encodings;
  rep.z_encodings = loaded.z_encodings;
  rep.validation = loaded.validation;
  rep.warnings = loaded.warnings;
  for (const auto& id : cfg.models) {
    rep.fits.push_back(fit_model(io::model_kind_from_id(id), loaded.data, loaded.spec, fit_cfg));
  }

  const fs::path dir(cfg.out);
  io::write_file(dir / "fit.json", report::fit_json(rep));
  io::write_file(dir / "fit_table.txt", report::fit_table(rep, false));
  io::write_file(dir / "response_curves.csv", report::response_curves_csv(rep));
  out << report::fit_table(rep, report::stdout_supports_color());
  out << "wrote " << (dir / "fit.json").string() << ", " << (dir / "fit_table.txt").string() << ", "
      << (dir / "response_curves.csv").string() << "\n";

  const bool all_converged =
      std::all_of(rep.fits.begin(), rep.fits.end(), [](const FitResult& f) { return f.converged; });
  if (!all_converged) {
    err << "error: at least one model did not converge\n";
    return kNotConverged;
  }
  return kSuccess;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  const io::RunConfig cfg = resolve_config(o);
  if (cfg.model_file.empty()) throw std::invalid_argument("no fitted-model file given (--model-file)");
  if (cfg.input.empty()) throw std::invalid_argument("no input file given (--input)");
  const report::FitReport fitted = report::fit_from_json(io::read_file(cfg.model_file));

  std::vector<const FitResult*> selected;
  for (const auto& fit : fitted.fits) {
    const std::string id = io::model_id(fit.kind);
    if (o.models.empty() || std::find(o.models.begin(), o.models.end(), id) != o.models.end()) {
      selected.push_back(&fit);
    }
  }
  for (const auto& id : o.models) {
    const bool present = std::any_of(fitted.fits.begin(), fitted.fits.end(),
                                     [&](const FitResult& f) { return io::model_id(f.kind) == id; });
    if (!present) throw std::invalid_argument("model " + id + " is not in " + cfg.model_file);
  }

  const io::CsvTable table = io::read_csv(cfg.input);
  const bool need_z = std::any_of(selected.begin(), selected.end(),
                                  [](const FitResult* f) { return f->kind == ModelKind::ZiGev; });
  std::vector<std::string> missing;
  auto check = [&](const std::vector<io::ColumnEncoding>& encs) {
    for (const auto& e : encs) {
      const bool have = std::find(table.header.begin(), table.header.end(), e.column) != table.header.end();
      if (!have && std::find(missing.begin(), missing.end(), e.column) == missing.end()) {
        missing.push_back(e.column);
      }
    }
  };
  check(fitted.x_encodings);
  if (need_z) check(fitted.z_encodings);
  if (!missing.empty()) {
    std::string msg = "input is missing columns required by the fitted model:";
    for (const auto& m : missing) msg += " '" + m + "'";
    throw io::ParseError(msg);
  }

  const Eigen::MatrixXd X = io::build_design(table, fitted.x_encodings);
  const Eigen::MatrixXd Z = need_z ? io::build_design(table, fitted.z_encodings)
                                   : Eigen::MatrixXd::Ones(X.rows(), 1);
  std::vector<report::PredictionRow> rows;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (const FitResult* fit : selected) {
      rows.push_back({static_cast<std::size_t>(i) + 1, io::model_id(fit->kind),
                      predict_infection(*fit, X.row(i).transpose(), Z.row(i).transpose())});
    }
  }
  const fs::path path = fs::path(cfg.out) / "predictions.csv";
  io::write_file(path, report::predictions_csv(rows));
  out << "wrote " << X.rows() << " row(s) x " << selected.size() << " model(s) to " << path.string() << "\n";
  return kSuccess;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  io::RunConfig cfg = resolve_config(o);
  io::SimulationPlan plan = cfg.simulation;
  std::uint64_t seed = cfg.seed;
  if (!o.preset.empty()) {
    auto [p, preset_seed] = io::parse_preset(o.preset);
    plan = p;
    if (preset_seed) seed = *preset_seed;
  }
  if (o.seed) seed = *o.seed;
  if (o.threads) plan.threads = *o.threads;
  if (plan.scenarios.empty()) throw std::invalid_argument("no scenarios requested");
  if (plan.n.empty()) throw std::invalid_argument("no sample sizes requested");

  report::StudyReport study;
  study.seed = seed;
  study.model = plan.model;
  study.tau_true = plan.tau_true;
  study.replicates = plan.replicates;
  study.estimators = plan.estimators;
  for (const auto& scenario : plan.scenarios) {
    for (long n : plan.n) {
      sim::SimulationConfig sc = sim::preset_config(plan.model, scenario, n, plan.replicates, seed, plan.tau_true);
      if (plan.beta) sc.beta_true = Eigen::Map<const Eigen::VectorXd>(plan.beta->data(), static_cast<Eigen::Index>(plan.beta->size()));
      if (plan.theta) sc.theta_true = Eigen::Map<const Eigen::VectorXd>(plan.theta->data(), static_cast<Eigen::Index>(plan.theta->size()));
      if (plan.z_means) sc.z_means = Eigen::Map<const Eigen::VectorXd>(plan.z_means->data(), static_cast<Eigen::Index>(plan.z_means->size()));
      sc.estimators = plan.estimators;
      sc.fit = cfg.fit;
      sc.threads = plan.threads;
      try {
        study.cells.push_back(sim::run_study(sc));
      } catch (const std::runtime_error& e) {
        err << "error: " << scenario << ", n = " << n << ": " << e.what() << "\n";
        return kNotConverged;
      }
    }
  }

  const fs::path dir(cfg.out);
  io::write_file(dir / "simulation.json", report::study_json(study));
  io::write_file(dir / "simulation_table.txt", report::study_table(study, false));
  out << report::study_table(study, report::stdout_supports_color());
  out << "wrote " << (dir / "simulation.json").string() << ", " << (dir / "simulation_table.txt").string() << "\n";
  return kSuccess;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const io::RunConfig cfg = resolve_config(o);
  ModelSpec spec;
  std::vector<std::string> warnings;
  if (!cfg.input.empty()) {
    io::LoadOptions opts = load_options(cfg);
    opts.strict = false;
    const io::LoadedData loaded = io::load_dataset(fs::path(cfg.input), opts);
    spec = loaded.spec;
  } else {
    // Without data every named covariate is taken as continuous.
    spec.x_columns.emplace_back(kIntercept);
    spec.z_columns.emplace_back(kIntercept);
    for (const auto& c : cfg.x_columns) spec.x_columns.push_back(c);
    for (const auto& c : cfg.z_columns) spec.z_columns.push_back(c);
    for (const auto& c : cfg.categorical) spec.continuous[c] = false;
  }
  const ValidationReport v = validate_spec(spec);
  print_validation(v, out);
  if (!v.ok) {
    if (cfg.strict) return kUsageError;
    err << "warning: identifiability check failed (use --strict to make this an error)\n";
  }
  return kSuccess;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(1);
  const fs::path dir(o.out.empty() ? "." : o.out);
  const fs::path path = dir / "synthetic_dengue.csv";
  io::write_file(path, synthetic_dengue_csv(seed, o.synth_n));
  out << "wrote synthetic dataset (not real data) to " << path.string() << "\n";
  return kSuccess;
}

}  // namespace

std::string synthetic_dengue_csv(std::uint64_t seed, long n) {
  if (n < 1) throw std::invalid_argument("synthetic dataset size must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> age_dist(2, 80);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const GevLink link(4.278);
  const double susceptible = logistic(-0.3667);

  std::string csv = "y,Age,Weight\n";
  for (long i = 0; i < n; ++i) {
    const int age = age_dist(rng);
    // Rough growth curve: about 3 kg at birth, leveling off near 75 kg.
    const double typical = 3.3 + 71.7 * (1.0 - std::exp(-static_cast<double>(age) / 9.0));
    const double weight = std::max(2.5, typical * (1.0 + 0.15 * noise(rng)));
    const double w = std::round(weight * 10.0) / 10.0;
    const bool s = unif(rng) < susceptible;
    const bool y = s && unif(rng) < response_prob(1.5379 - 0.1003 * w, link);
    csv += fmt::format("{},{},{:.1f}\n", y ? 1 : 0, age, w);
  }
  return csv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-inflated GEV regression: fitting, prediction and simulation studies", "zigev"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Base random seed");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Input CSV file");
    sub->add_option("--response", o.response, "Binary response column");
    sub->add_option("--x", o.x_columns, "Infection-model covariates")->delimiter(',');
    sub->add_option("--z", o.z_columns, "Susceptibility-model covariates")->delimiter(',');
    sub->add_option("--categorical", o.categorical, "Columns to treat as categorical")->delimiter(',');
    sub->add_flag("--strict", o.strict, "Treat a failed identifiability check as an error");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit logistic (m0), GEV (m1) and zero-inflated GEV (m2) models");
  add_common(fit);
  add_data(fit);
  fit->add_option("--models", o.models, "Models to fit, e.g. m0,m1,m2")->delimiter(',');

  CLI::App* predict = app.add_subcommand("predict", "Predict infection probabilities from a fit file");
  add_common(predict);
  predict->add_option("--model-file", o.model_file, "fit.json written by the fit command");
  predict->add_option("--input", o.input, "CSV with covariate columns");
  predict->add_option("--models", o.models, "Models to use (default: all in the file)")->delimiter(',');

  CLI::App* simulate = app.add_subcommand("simulate", "Run a Monte Carlo bias/RMSE study");
  add_common(simulate);
  simulate->add_option("--preset", o.preset, "e.g. M1,Scenario1,n=500/1000,N=200,seed=7");
  simulate->add_option("--threads", o.threads, "Worker threads (0 = all cores); output does not depend on it");

  CLI::App* validate = app.add_subcommand("validate", "Check that the covariate layout is identifiable");
  add_common(validate);
  add_data(validate);

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dengue-like dataset (not real data)");
  synth->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--out", o.out, "Output directory");
  synth->add_option("--n", o.synth_n, "Number of rows");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0 and print the help of the subcommand they follow.
    return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (synth->parsed()) return cmd_synth(o, out);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const io::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    print_validation(e.report(), err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace zigev::cli
