#include "zigev/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>

#include <unistd.h>

#include <fmt/format.h>

#include "json.hpp"
#include "zigev/gev.hpp"

namespace zigev::report {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kDash = "—";
constexpr const char* kBold = "\033[1m";
constexpr const char* kReset = "\033[0m";

// Terminal columns occupied by a UTF-8 string (continuation bytes take none).
std::size_t display_width(std::string_view s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

std::string pad_left(std::string_view s, std::size_t width) {
  const std::size_t w = display_width(s);
  return std::string(width > w ? width - w : 0, ' ') + std::string(s);
}

std::string pad_right(std::string_view s, std::size_t width) {
  const std::size_t w = display_width(s);
  return std::string(s) + std::string(width > w ? width - w : 0, ' ');
}

std::string fixed4(double v) {
  if (std::isnan(v)) return "n/a";
  return fmt::format("{:.4f}", v);
}

std::string p_value(double p) {
  if (std::isnan(p)) return "n/a";
  if (p < 1e-4) return "<0.0001";
  return fmt::format("{:.4f}", p);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

Json to_json(const io::ColumnEncoding& e) {
  return Json{{"column", e.column}, {"categorical", e.categorical}, {"levels", e.levels}};
}

io::ColumnEncoding encoding_from(const Json& j) {
  io::ColumnEncoding e;
  e.column = j.at("column").get<std::string>();
  e.categorical = j.at("categorical").get<bool>();
  e.levels = j.at("levels").get<std::vector<std::string>>();
  return e;
}

Json to_json(const ValidationReport& v) {
  Json j{{"ok", v.ok}};
  j["exclusion_covariate"] = v.exclusion_covariate ? Json(*v.exclusion_covariate) : Json(nullptr);
  j["exclusion_side"] = v.exclusion_side;
  j["candidates"] = v.candidates;
  j["message"] = v.message;
  return j;
}

ValidationReport validation_from(const Json& j) {
  ValidationReport v;
  v.ok = j.at("ok").get<bool>();
  if (!j.at("exclusion_covariate").is_null()) {
    v.exclusion_covariate = j.at("exclusion_covariate").get<std::string>();
  }
  v.exclusion_side = j.at("exclusion_side").get<std::string>();
  v.candidates = j.at("candidates").get<std::vector<std::string>>();
  v.message = j.at("message").get<std::string>();
  return v;
}

Json to_json(const FitConfig& c) {
  Json fixed = Json::object();
  for (const auto& [name, value] : c.fixed) fixed[name] = value;
  return Json{{"optimizer", to_string(c.optimizer)},
              {"max_iterations", c.max_iterations},
              {"tolerance", c.tolerance},
              {"multistart", c.multistart},
              {"tau_lower", c.tau_lower},
              {"tau_upper", c.tau_upper},
              {"initial_tau", c.initial_tau},
              {"jitter_sd", c.jitter_sd},
              {"allow_unidentified", c.allow_unidentified},
              {"fixed", fixed}};
}

FitConfig fit_config_from(const Json& j) {
  FitConfig c;
  c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.max_iterations = j.at("max_iterations").get<int>();
  c.tolerance = j.at("tolerance").get<double>();
  c.multistart = j.at("multistart").get<int>();
  c.tau_lower = j.at("tau_lower").get<double>();
  c.tau_upper = j.at("tau_upper").get<double>();
  c.initial_tau = j.at("initial_tau").get<double>();
  c.jitter_sd = j.at("jitter_sd").get<double>();
  c.allow_unidentified = j.at("allow_unidentified").get<bool>();
  for (const auto& [name, value] : j.at("fixed").items()) c.fixed[name] = value.get<double>();
  return c;
}

int coefficient_group(const std::string& name) {
  if (name.starts_with("beta[")) return 0;
  if (name.starts_with("theta[")) return 1;
  return 2;
}

std::string model_label(ModelKind kind) {
  return fmt::format("{} ({})", io::model_id(kind), to_string(kind));
}

struct CoefficientCells {
  std::string estimate, se, z, p;
};

CoefficientCells cells_for(const FitResult& fit, const std::string& name) {
  auto it = std::find(fit.names.begin(), fit.names.end(), name);
  if (it == fit.names.end()) return {kDash, kDash, kDash, kDash};
  const auto j = static_cast<std::size_t>(it - fit.names.begin());
  const double est = fit.estimates.flatten(fit.kind)(static_cast<Eigen::Index>(j));
  if (!fit.estimated[j]) return {fixed4(est), "fixed", "", ""};
  if (!fit.se_available[j]) return {fixed4(est), "n/a", "n/a", "n/a"};
  const WaldResult w = wald_test(name, est, fit.standard_errors(static_cast<Eigen::Index>(j)));
  return {fixed4(est), fixed4(w.standard_error), fmt::format("{:.3f}", w.z), p_value(w.p_value)};
}

Json fit_to_json(const FitResult& fit) {
  Json j;
  j["id"] = io::model_id(fit.kind);
  j["kind"] = to_string(fit.kind);
  j["x_columns"] = fit.spec.x_columns;
  j["z_columns"] = fit.spec.z_columns;
  Json cont = Json::object();
  for (const auto& [name, is_cont] : fit.spec.continuous) cont[name] = is_cont;
  j["continuous"] = cont;
  j["beta"] = to_json(fit.estimates.beta);
  j["theta"] = to_json(fit.estimates.theta);
  j["tau"] = fit.kind == ModelKind::Logistic ? Json(nullptr) : Json(fit.estimates.tau);

  const Eigen::VectorXd flat = fit.estimates.flatten(fit.kind);
  Json coefs = Json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Json c{{"name", fit.names[i]}, {"estimate", flat(ii)}, {"estimated", bool(fit.estimated[i])}};
    if (fit.estimated[i] && fit.se_available[i]) {
      const WaldResult w = wald_test(fit.names[i], flat(ii), fit.standard_errors(ii));
      c["se"] = w.standard_error;
      c["z"] = w.z;
      c["p"] = w.p_value;
    } else {
      c["se"] = nullptr;
      c["z"] = nullptr;
      c["p"] = nullptr;
    }
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  j["log_likelihood"] = fit.log_likelihood;
  j["aic"] = fit.aic;
  j["k"] = fit.k;
  j["n"] = fit.n;
  j["converged"] = fit.converged;
  j["gradient_norm"] = number_or_null(fit.gradient_norm);
  j["min_information_eigenvalue"] = number_or_null(fit.min_information_eigenvalue);
  j["boundary_rows"] = fit.boundary_rows;
  j["iterations"] = fit.iterations;
  j["winning_start"] = fit.winning_start;
  j["optimizer_message"] = fit.optimizer_message;
  j["warnings"] = fit.warnings;
  return j;
}

FitResult fit_from(const Json& j) {
  FitResult fit;
  fit.kind = io::model_kind_from_id(j.at("id").get<std::string>());
  fit.spec.x_columns = j.at("x_columns").get<std::vector<std::string>>();
  fit.spec.z_columns = j.at("z_columns").get<std::vector<std::string>>();
  for (const auto& [name, value] : j.at("continuous").items()) fit.spec.continuous[name] = value.get<bool>();
  fit.estimates.beta = vector_from(j.at("beta"));
  fit.estimates.theta = vector_from(j.at("theta"));
  fit.estimates.tau = j.at("tau").is_null() ? 0.0 : j.at("tau").get<double>();
  if (fit.estimates.beta.size() != static_cast<Eigen::Index>(fit.spec.x_columns.size())) {
    throw std::invalid_argument("model " + io::model_id(fit.kind) + ": beta does not match x_columns");
  }
  if (fit.kind == ModelKind::ZiGev &&
      fit.estimates.theta.size() != static_cast<Eigen::Index>(fit.spec.z_columns.size())) {
    throw std::invalid_argument("model " + io::model_id(fit.kind) + ": theta does not match z_columns");
  }

  const Json& coefs = j.at("coefficients");
  fit.standard_errors.resize(static_cast<Eigen::Index>(coefs.size()));
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    const Json& c = coefs.at(i);
    fit.names.push_back(c.at("name").get<std::string>());
    fit.estimated.push_back(c.at("estimated").get<bool>());
    const double se = number_from(c.at("se"));
    fit.standard_errors(static_cast<Eigen::Index>(i)) = se;
    fit.se_available.push_back(!std::isnan(se));
  }
  if (fit.names != coefficient_names(fit.kind, fit.spec)) {
    throw std::invalid_argument("model " + io::model_id(fit.kind) + ": coefficient list is inconsistent");
  }
  fit.log_likelihood = j.at("log_likelihood").get<double>();
  fit.aic = j.at("aic").get<double>();
  fit.k = j.at("k").get<int>();
  fit.n = j.at("n").get<Eigen::Index>();
  fit.converged = j.at("converged").get<bool>();
  fit.gradient_norm = number_from(j.at("gradient_norm"));
  fit.min_information_eigenvalue = number_from(j.at("min_information_eigenvalue"));
  fit.boundary_rows = j.at("boundary_rows").get<Eigen::Index>();
  fit.iterations = j.at("iterations").get<int>();
  fit.winning_start = j.at("winning_start").get<int>();
  fit.optimizer_message = j.at("optimizer_message").get<std::string>();
  fit.warnings = j.at("warnings").get<std::vector<std::string>>();
  return fit;
}

}  // namespace

int FitReport::best_aic_index() const {
  int best = -1;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (best < 0 || fits[i].aic < fits[static_cast<std::size_t>(best)].aic) best = static_cast<int>(i);
  }
  return best;
}

std::string fit_table(const FitReport& report, bool color) {
  std::vector<std::string> rows;
  for (const auto& fit : report.fits) {
    for (const auto& name : fit.names) {
      if (std::find(rows.begin(), rows.end(), name) == rows.end()) rows.push_back(name);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const std::string& a, const std::string& b) {
    return coefficient_group(a) < coefficient_group(b);
  });

  constexpr std::size_t kCell = 10;
  constexpr std::size_t kBlock = 4 * kCell;
  std::size_t name_width = 16;
  for (const auto& r : rows) name_width = std::max(name_width, display_width(r) + 2);

  const int best = report.best_aic_index();
  std::string out;
  out += fmt::format("Model comparison (n = {}, seed = {})\n\n",
                     report.fits.empty() ? 0 : report.fits.front().n, report.seed);

  std::string line = pad_right("", name_width);
  for (const auto& fit : report.fits) line += "  " + pad_right(model_label(fit.kind), kBlock);
  out += line + "\n";
  line = pad_right("Coefficient", name_width);
  for (std::size_t m = 0; m < report.fits.size(); ++m) {
    line += "  " + pad_left("Estimate", kCell) + pad_left("SE", kCell) + pad_left("z", kCell) +
            pad_left("p", kCell);
  }
  out += line + "\n";
  out += std::string(name_width + report.fits.size() * (kBlock + 2), '-') + "\n";

  for (const auto& name : rows) {
    line = pad_right(name, name_width);
    for (const auto& fit : report.fits) {
      const CoefficientCells c = cells_for(fit, name);
      line += "  " + pad_left(c.estimate, kCell) + pad_left(c.se, kCell) + pad_left(c.z, kCell) +
              pad_left(c.p, kCell);
    }
    out += line + "\n";
  }
  out += std::string(name_width + report.fits.size() * (kBlock + 2), '-') + "\n";

  auto summary_row = [&](const std::string& label, auto&& cell) {
    std::string l = pad_right(label, name_width);
    for (std::size_t m = 0; m < report.fits.size(); ++m) {
      l += "  " + pad_right(pad_left(cell(m), kCell), kBlock);
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  summary_row("log-likelihood", [&](std::size_t m) { return fmt::format("{:.3f}", report.fits[m].log_likelihood); });
  std::string aic_line = pad_right("AIC", name_width);
  for (std::size_t m = 0; m < report.fits.size(); ++m) {
    std::string cell = pad_left(fmt::format("{:.3f}", report.fits[m].aic), kCell);
    if (static_cast<int>(m) == best) {
      cell += " *";
      if (color) cell = kBold + cell + kReset;
    }
    aic_line += "  " + pad_right(cell, kBlock + (color && static_cast<int>(m) == best ? 8 : 0));
  }
  while (!aic_line.empty() && aic_line.back() == ' ') aic_line.pop_back();
  out += aic_line + "\n";
  summary_row("parameters (k)", [&](std::size_t m) { return std::to_string(report.fits[m].k); });
  summary_row("converged", [&](std::size_t m) { return std::string(report.fits[m].converged ? "yes" : "no"); });
  summary_row("boundary rows", [&](std::size_t m) { return std::to_string(report.fits[m].boundary_rows); });

  if (best >= 0) {
    out += fmt::format("\n* lowest AIC: {}\n", model_label(report.fits[static_cast<std::size_t>(best)].kind));
  }
  out += fmt::format("identifiability: {}\n", report.validation.ok ? "ok" : "FAILED");
  if (!report.validation.message.empty()) out += "  " + report.validation.message + "\n";
  std::vector<std::string> warnings = report.warnings;
  for (const auto& fit : report.fits) {
    for (const auto& w : fit.warnings) warnings.push_back(io::model_id(fit.kind) + ": " + w);
  }
  if (!warnings.empty()) {
    out += "warnings:\n";
    for (const auto& w : warnings) out += "  " + w + "\n";
  }
  return out;
}

std::string fit_json(const FitReport& report) {
  const io::RunConfig& c = report.config;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "fit";
  j["seed"] = report.seed;
  j["config"] = Json{{"input", c.input},
                     {"response", c.response},
                     {"x_columns", c.x_columns},
                     {"z_columns", c.z_columns},
                     {"categorical", c.categorical},
                     {"models", c.models},
                     {"strict", c.strict},
                     {"fit", to_json(c.fit)}};
  Json xe = Json::array(), ze = Json::array();
  for (const auto& e : report.x_encodings) xe.push_back(to_json(e));
  for (const auto& e : report.z_encodings) ze.push_back(to_json(e));
  j["encodings"] = Json{{"x", xe}, {"z", ze}};
  j["validation"] = to_json(report.validation);
  Json models = Json::array();
  for (const auto& fit : report.fits) models.push_back(fit_to_json(fit));
  j["models"] = std::move(models);
  const int best = report.best_aic_index();
  j["best_aic_model"] = best < 0 ? Json(nullptr) : Json(io::model_id(report.fits[static_cast<std::size_t>(best)].kind));
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

FitReport fit_from_json(std::string_view text) {
  FitReport r;
  try {
    const Json j = Json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version in fit file");
    }
    if (j.at("kind").get<std::string>() != "fit") throw std::invalid_argument("not a fit file");
    r.seed = j.at("seed").get<std::uint64_t>();
    const Json& c = j.at("config");
    r.config.input = c.at("input").get<std::string>();
    r.config.response = c.at("response").get<std::string>();
    r.config.x_columns = c.at("x_columns").get<std::vector<std::string>>();
    r.config.z_columns = c.at("z_columns").get<std::vector<std::string>>();
    r.config.categorical = c.at("categorical").get<std::vector<std::string>>();
    r.config.models = c.at("models").get<std::vector<std::string>>();
    r.config.strict = c.at("strict").get<bool>();
    r.config.fit = fit_config_from(c.at("fit"));
    r.config.seed = r.seed;
    for (const auto& e : j.at("encodings").at("x")) r.x_encodings.push_back(encoding_from(e));
    for (const auto& e : j.at("encodings").at("z")) r.z_encodings.push_back(encoding_from(e));
    r.validation = validation_from(j.at("validation"));
    for (const auto& m : j.at("models")) r.fits.push_back(fit_from(m));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed fit file: ") + e.what());
  }
  return r;
}

std::string response_curves_csv(const FitReport& report) {
  std::string out = "eta";
  for (const auto& fit : report.fits) out += "," + io::model_id(fit.kind);
  out += "\n";
  for (int i = -60; i <= 60; ++i) {
    const double eta = i / 10.0;
    out += fmt::format("{:.1f}", eta);
    for (const auto& fit : report.fits) {
      const double p = fit.kind == ModelKind::Logistic ? logistic(eta)
                                                       : response_prob(eta, GevLink(fit.estimates.tau));
      out += fmt::format(",{:.10f}", p);
    }
    out += "\n";
  }
  return out;
}

std::string predictions_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "row,model,susceptible_prob,infection_prob_if_susceptible,marginal_infection_prob\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.row, r.model, r.prediction.susceptible_prob,
                       r.prediction.infection_prob_if_susceptible, r.prediction.marginal_infection_prob);
  }
  return out;
}

namespace {

std::string scenario_label(const sim::SimulationReport& cell) {
  const int pct = sim::scenario_immune_percent(cell.config.scenario_name);
  if (pct >= 0) return fmt::format("{}% of immune", pct);
  return cell.config.scenario_name;
}

std::vector<std::string> ordered_unique(const std::vector<std::string>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

}  // namespace

std::string study_table(const StudyReport& study, bool color) {
  std::vector<std::string> scenarios;
  std::vector<long> sizes;
  for (const auto& c : study.cells) {
    scenarios.push_back(c.config.scenario_name);
    if (std::find(sizes.begin(), sizes.end(), static_cast<long>(c.config.n)) == sizes.end()) {
      sizes.push_back(static_cast<long>(c.config.n));
    }
  }
  scenarios = ordered_unique(scenarios);

  auto find_cell = [&](const std::string& scenario, long n) -> const sim::SimulationReport* {
    for (const auto& c : study.cells) {
      if (c.config.scenario_name == scenario && static_cast<long>(c.config.n) == n) return &c;
    }
    return nullptr;
  };

  std::string out = fmt::format("Simulation study: model {}, tau_true = {}, N = {} replicates, seed = {}\n",
                                study.model, study.tau_true, study.replicates, study.seed);

  for (ModelKind kind : study.estimators) {
    std::vector<std::string> names;
    for (const auto& c : study.cells) {
      for (const auto& co : c.estimator(kind).coefficients) names.push_back(co.name);
    }
    names = ordered_unique(names);
    std::vector<std::vector<std::string>> groups(2);
    for (const auto& n : names) groups[n.starts_with("beta[") ? 0 : 1].push_back(n);

    const std::string title = fmt::format("Estimator: {}", io::estimator_name(kind));
    out += "\n" + (color ? kBold + title + kReset : title) + "\n";

    for (const auto& group : groups) {
      if (group.empty()) continue;
      std::size_t col = 10;
      for (const auto& n : group) col = std::max(col, display_width(n) + 2);
      const std::size_t block = col * group.size();

      std::string line = pad_right("", 12);
      for (const auto& s : scenarios) {
        const sim::SimulationReport* any = nullptr;
        for (long n : sizes) any = any ? any : find_cell(s, n);
        line += "  " + pad_right(any ? scenario_label(*any) : s, block);
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += "\n" + line + "\n";
      line = pad_left("n", 6) + pad_left("", 6);
      for (std::size_t si = 0; si < scenarios.size(); ++si) {
        line += "  ";
        for (const auto& n : group) line += pad_left(n, col);
      }
      out += line + "\n";
      out += std::string(12 + scenarios.size() * (block + 2), '-') + "\n";

      for (long n : sizes) {
        const char* stats[] = {"MLE", "BIAS", "RMSE"};
        for (int st = 0; st < 3; ++st) {
          line = pad_left(st == 0 ? std::to_string(n) : "", 6) + "  " + pad_right(stats[st], 4);
          for (const auto& s : scenarios) {
            line += "  ";
            const sim::SimulationReport* cell = find_cell(s, n);
            for (const auto& name : group) {
              std::string v = kDash;
              if (cell) {
                for (const auto& co : cell->estimator(kind).coefficients) {
                  if (co.name != name) continue;
                  const double x = st == 0 ? co.mean : st == 1 ? co.bias : co.rmse;
                  v = fmt::format("{:.3f}", x);
                }
              }
              line += pad_left(v, col);
            }
          }
          out += line + "\n";
        }
      }
    }
  }

  out += "\nDiagnostics\n";
  std::string line = pad_right("scenario", 12) + pad_left("n", 8) + pad_left("immune", 10) + pad_left("ones", 10);
  for (ModelKind kind : study.estimators) line += pad_left(io::estimator_name(kind) + " ok/fail", 24);
  out += line + "\n";
  for (const auto& c : study.cells) {
    line = pad_right(c.config.scenario_name, 12) + pad_left(std::to_string(c.config.n), 8) +
           pad_left(fmt::format("{:.3f}", c.mean_immune_fraction), 10) +
           pad_left(fmt::format("{:.3f}", c.mean_ones_fraction), 10);
    for (ModelKind kind : study.estimators) {
      const auto& e = c.estimator(kind);
      line += pad_left(fmt::format("{}/{}", e.successes, e.failures), 24);
    }
    out += line + "\n";
  }
  return out;
}

std::string study_json(const StudyReport& study) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "simulation";
  j["seed"] = study.seed;
  j["model"] = study.model;
  j["tau_true"] = study.tau_true;
  j["replicates"] = study.replicates;
  Json est = Json::array();
  for (ModelKind k : study.estimators) est.push_back(io::estimator_name(k));
  j["estimators"] = est;
  if (!study.cells.empty()) j["fit"] = to_json(study.cells.front().config.fit);

  Json cells = Json::array();
  for (const auto& c : study.cells) {
    Json cj;
    cj["scenario"] = c.config.scenario_name;
    cj["immune_percent"] = sim::scenario_immune_percent(c.config.scenario_name);
    cj["n"] = c.config.n;
    cj["beta_true"] = to_json(c.config.beta_true);
    cj["theta_true"] = to_json(c.config.theta_true);
    cj["z_means"] = to_json(c.config.z_means);
    cj["mean_immune_fraction"] = c.mean_immune_fraction;
    cj["mean_ones_fraction"] = c.mean_ones_fraction;
    Json ests = Json::array();
    for (const auto& e : c.estimators) {
      Json ej{{"estimator", io::estimator_name(e.kind)}, {"successes", e.successes}, {"failures", e.failures}};
      Json coefs = Json::array();
      for (const auto& co : e.coefficients) {
        coefs.push_back(Json{{"name", co.name},
                             {"truth", co.truth},
                             {"mean", co.mean},
                             {"bias", co.bias},
                             {"rmse", co.rmse},
                             {"mc_se", co.mc_se}});
      }
      ej["coefficients"] = std::move(coefs);
      ests.push_back(std::move(ej));
    }
    cj["estimators"] = std::move(ests);
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

StudyReport study_from_json(std::string_view text) {
  StudyReport s;
  try {
    const Json j = Json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version in simulation file");
    }
    if (j.at("kind").get<std::string>() != "simulation") throw std::invalid_argument("not a simulation file");
    s.seed = j.at("seed").get<std::uint64_t>();
    s.model = j.at("model").get<std::string>();
    s.tau_true = j.at("tau_true").get<double>();
    s.replicates = j.at("replicates").get<int>();
    for (const auto& e : j.at("estimators")) s.estimators.push_back(io::estimator_from_string(e.get<std::string>()));
    FitConfig fit;
    if (j.contains("fit")) fit = fit_config_from(j.at("fit"));

    for (const auto& cj : j.at("cells")) {
      sim::SimulationReport c;
      c.config.model_name = s.model;
      c.config.scenario_name = cj.at("scenario").get<std::string>();
      c.config.n = cj.at("n").get<Eigen::Index>();
      c.config.beta_true = vector_from(cj.at("beta_true"));
      c.config.theta_true = vector_from(cj.at("theta_true"));
      c.config.z_means = vector_from(cj.at("z_means"));
      c.config.tau_true = s.tau_true;
      c.config.replicates = s.replicates;
      c.config.base_seed = s.seed;
      c.config.estimators = s.estimators;
      c.config.fit = fit;
      c.replicates = s.replicates;
      c.mean_immune_fraction = cj.at("mean_immune_fraction").get<double>();
      c.mean_ones_fraction = cj.at("mean_ones_fraction").get<double>();
      for (const auto& ej : cj.at("estimators")) {
        sim::EstimatorSummary e;
        e.kind = io::estimator_from_string(ej.at("estimator").get<std::string>());
        e.successes = ej.at("successes").get<int>();
        e.failures = ej.at("failures").get<int>();
        for (const auto& co : ej.at("coefficients")) {
          sim::CoefficientSummary cs;
          cs.name = co.at("name").get<std::string>();
          cs.truth = co.at("truth").get<double>();
          cs.mean = co.at("mean").get<double>();
          cs.bias = co.at("bias").get<double>();
          cs.rmse = co.at("rmse").get<double>();
          cs.mc_se = co.at("mc_se").get<double>();
          e.coefficients.push_back(cs);
        }
        c.estimators.push_back(std::move(e));
      }
      s.cells.push_back(std::move(c));
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed simulation file: ") + e.what());
  }
  return s;
}

bool stdout_supports_color() {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && no_color[0] != '\0') return false;
  return ::isatty(STDOUT_FILENO) != 0;
}

}  // namespace zigev::report
