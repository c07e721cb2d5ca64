#include "zigev/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "zigev/gev.hpp"

namespace zigev {

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Gev: return "gev";
    case ModelKind::ZiGev: return "zi-gev";
  }
  return "unknown";
}

bool ModelSpec::is_continuous(const std::string& name) const {
  auto it = continuous.find(name);
  return it == continuous.end() || it->second;
}

ValidationReport validate_spec(const ModelSpec& spec) {
  ValidationReport report;
  auto starts_with_intercept = [](const std::vector<std::string>& cols) {
    return !cols.empty() && cols.front() == kIntercept;
  };
  if (!starts_with_intercept(spec.x_columns) || !starts_with_intercept(spec.z_columns)) {
    report.message = "both covariate lists must be nonempty and start with the intercept";
    return report;
  }

  const std::set<std::string> xs(spec.x_columns.begin(), spec.x_columns.end());
  const std::set<std::string> zs(spec.z_columns.begin(), spec.z_columns.end());
  if (xs.size() != spec.x_columns.size() || zs.size() != spec.z_columns.size()) {
    report.message = "duplicate covariate within a predictor";
    return report;
  }

  // std::set iteration is sorted, which makes the chosen covariate independent
  // of list order.
  std::vector<std::string> z_only, x_only;
  for (const auto& name : zs) {
    if (name != kIntercept && !xs.contains(name) && spec.is_continuous(name)) z_only.push_back(name);
  }
  for (const auto& name : xs) {
    if (name != kIntercept && !zs.contains(name) && spec.is_continuous(name)) x_only.push_back(name);
  }
  report.candidates = z_only;
  report.candidates.insert(report.candidates.end(), x_only.begin(), x_only.end());

  if (report.candidates.empty()) {
    report.message =
        "no continuous covariate enters exactly one of the infection and susceptibility "
        "predictors; every continuous covariate is shared, so beta and theta may not be "
        "identifiable";
    return report;
  }
  report.ok = true;
  if (!z_only.empty()) {
    report.exclusion_covariate = z_only.front();
    report.exclusion_side = "z-only";
  } else {
    report.exclusion_covariate = x_only.front();
    report.exclusion_side = "x-only";
  }
  report.message = "exclusion covariate '" + *report.exclusion_covariate + "' (" +
                   report.exclusion_side + ")";
  return report;
}

Eigen::Index parameter_count(ModelKind kind, Eigen::Index p, Eigen::Index q) {
  switch (kind) {
    case ModelKind::Logistic: return p;
    case ModelKind::Gev: return p + 1;
    case ModelKind::ZiGev: return p + q + 1;
  }
  return 0;
}

Eigen::Index ParamVector::dimension(ModelKind kind) const {
  return parameter_count(kind, beta.size(), theta.size());
}

Eigen::VectorXd ParamVector::flatten(ModelKind kind) const {
  Eigen::VectorXd flat(dimension(kind));
  const Eigen::Index p = beta.size();
  flat.head(p) = beta;
  if (kind == ModelKind::ZiGev) flat.segment(p, theta.size()) = theta;
  if (kind != ModelKind::Logistic) flat(flat.size() - 1) = tau;
  return flat;
}

ParamVector ParamVector::unflatten(ModelKind kind, Eigen::Index p, Eigen::Index q,
                                   const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count(kind, p, q)) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  ParamVector psi;
  psi.beta = flat.head(p);
  if (kind == ModelKind::ZiGev) psi.theta = flat.segment(p, q);
  if (kind != ModelKind::Logistic) psi.tau = flat(flat.size() - 1);
  return psi;
}

std::vector<std::string> coefficient_names(ModelKind kind, const ModelSpec& spec) {
  std::vector<std::string> names;
  for (const auto& c : spec.x_columns) names.push_back("beta[" + c + "]");
  if (kind == ModelKind::ZiGev) {
    for (const auto& c : spec.z_columns) names.push_back("theta[" + c + "]");
  }
  if (kind != ModelKind::Logistic) names.emplace_back("tau");
  return names;
}

void Dataset::validate() const {
  const Eigen::Index rows = y.size();
  if (rows < 1) throw std::invalid_argument("dataset is empty");
  if (X.rows() != rows || Z.rows() != rows) {
    throw std::invalid_argument("design matrices and response differ in row count");
  }
  if (X.cols() < 1) throw std::invalid_argument("X needs at least the intercept column");
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw std::invalid_argument("response at row " + std::to_string(i) + " is not 0/1");
    }
    if (X(i, 0) != 1.0 || (Z.cols() > 0 && Z(i, 0) != 1.0)) {
      throw std::invalid_argument("intercept column is not 1 at row " + std::to_string(i));
    }
  }
  if (!X.allFinite() || !Z.allFinite()) {
    throw std::invalid_argument("design matrix contains non-finite values");
  }
  if (!s.empty()) {
    if (static_cast<Eigen::Index>(s.size()) != rows) {
      throw std::invalid_argument("susceptibility column has wrong length");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (y(i) == 1.0 && s[static_cast<std::size_t>(i)] == Susceptibility::Immune) {
        throw std::invalid_argument("row " + std::to_string(i) + " is infected but immune");
      }
    }
  }
}

BoundaryError::BoundaryError(Eigen::Index row)
    : std::runtime_error("row " + std::to_string(row) +
                         " lies on the support boundary (1 - tau * x'beta <= 0)"),
      row_(row) {}

double joint_prob(const Eigen::Ref<const Eigen::VectorXd>& x_row,
                  const Eigen::Ref<const Eigen::VectorXd>& z_row, const ParamVector& psi) {
  if (x_row.size() != psi.beta.size() || z_row.size() != psi.theta.size()) {
    throw std::invalid_argument("joint_prob: covariate row does not match parameter vector");
  }
  const double pi = response_prob_derivs(x_row.dot(psi.beta), psi.tau).prob;
  return pi * logistic(z_row.dot(psi.theta));
}

namespace {

void check_dims(ModelKind kind, const ParamVector& psi, const Dataset& data) {
  if (psi.beta.size() != data.p()) {
    throw std::invalid_argument("beta length does not match the X design");
  }
  if (kind == ModelKind::ZiGev && psi.theta.size() != data.q()) {
    throw std::invalid_argument("theta length does not match the Z design");
  }
}

}  // namespace

LikelihoodEval evaluate(ModelKind kind, const ParamVector& psi, const Dataset& data,
                        bool with_gradient) {
  check_dims(kind, psi, data);
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();

  const Eigen::VectorXd eta = data.X * psi.beta;
  Eigen::VectorXd a;
  if (kind == ModelKind::ZiGev) a = data.Z * psi.theta;

  LikelihoodEval out;
  Eigen::VectorXd w_eta, w_a;
  double g_tau = 0.0;
  if (with_gradient) {
    w_eta.setZero(n);
    if (kind == ModelKind::ZiGev) w_a.setZero(n);
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double mu = 0.0, dmu_deta = 0.0, dmu_da = 0.0, dmu_dtau = 0.0;
    if (kind == ModelKind::Logistic) {
      mu = logistic(eta(i));
      dmu_deta = mu * (1.0 - mu);
    } else {
      const ResponseDerivs r = response_prob_derivs(eta(i), psi.tau);
      if (r.at_boundary) out.boundary_rows.push_back(i);
      if (kind == ModelKind::ZiGev) {
        const double alpha = logistic(a(i));
        mu = r.prob * alpha;
        dmu_deta = r.d_eta * alpha;
        dmu_da = r.prob * alpha * (1.0 - alpha);
        dmu_dtau = r.d_tau * alpha;
      } else {
        mu = r.prob;
        dmu_deta = r.d_eta;
        dmu_dtau = r.d_tau;
      }
    }

    const double y = data.y(i);
    const double mc = clamp_prob(mu);
    total += y * std::log(mc) + (1.0 - y) * std::log1p(-mc);

    if (with_gradient && mu == mc) {
      const double dl_dmu = y / mu - (1.0 - y) / (1.0 - mu);
      w_eta(i) = dl_dmu * dmu_deta;
      if (kind == ModelKind::ZiGev) w_a(i) = dl_dmu * dmu_da;
      g_tau += dl_dmu * dmu_dtau;
    }
  }
  out.value = total;

  if (with_gradient) {
    out.gradient.setZero(psi.dimension(kind));
    out.gradient.head(p) = data.X.transpose() * w_eta;
    if (kind == ModelKind::ZiGev) out.gradient.segment(p, data.q()) = data.Z.transpose() * w_a;
    if (kind != ModelKind::Logistic) out.gradient(out.gradient.size() - 1) = g_tau;
  }
  return out;
}

double log_likelihood(ModelKind kind, const ParamVector& psi, const Dataset& data) {
  return evaluate(kind, psi, data, false).value;
}

double log_likelihood(const ParamVector& psi, const Dataset& data) {
  return log_likelihood(ModelKind::ZiGev, psi, data);
}

Eigen::VectorXd score(const ParamVector& psi, const Dataset& data) {
  LikelihoodEval e = evaluate(ModelKind::ZiGev, psi, data, true);
  if (!e.boundary_rows.empty()) throw BoundaryError(e.boundary_rows.front());
  return std::move(e.gradient);
}

Eigen::Index count_boundary_rows(ModelKind kind, const ParamVector& psi, const Dataset& data) {
  if (kind == ModelKind::Logistic) return 0;
  check_dims(kind, psi, data);
  const Eigen::VectorXd eta = data.X * psi.beta;
  if (std::abs(psi.tau) < kTauZeroThreshold) return 0;
  return (1.0 - psi.tau * eta.array() <= 0.0).count();
}

}  // namespace zigev
