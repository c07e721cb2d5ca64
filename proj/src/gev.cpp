#include "zigev/gev.hpp"

#include <stdexcept>
#include <string>

namespace zigev {

namespace {

// d log(w) / d tau where log(w) = -log(1 - tau*eta) / tau.
// Closed form is L/tau^2 + eta/(tau*t); both terms are O(1/tau) and cancel,
// so near tau*eta = 0 use the series sum_{k>=2} (k-1)/k * eta^k * tau^(k-2).
double dlogw_dtau(double eta, double tau, double log_t, double t) {
  const double u = tau * eta;
  if (std::abs(u) < 1e-2) {
    double term = eta * eta;  // eta^k tau^(k-2) at k = 2
    double sum = 0.0;
    for (int k = 2; k <= 24; ++k) {
      sum += (k - 1.0) / k * term;
      term *= u;
    }
    return sum;
  }
  return log_t / (tau * tau) + eta / (tau * t);
}

}  // namespace

void GevParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(tau)) {
    throw std::domain_error("GEV parameters must be finite");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("GEV scale must be positive");
  }
}

GevLink::GevLink(double tau, double tau_bound) : tau_(tau) {
  if (!std::isfinite(tau)) {
    throw std::domain_error("GEV link shape must be finite");
  }
  if (std::abs(tau) > tau_bound) {
    throw std::domain_error("GEV link shape " + std::to_string(tau) +
                            " exceeds bound " + std::to_string(tau_bound));
  }
}

Skewness GevLink::skewness() const noexcept {
  if (std::abs(tau_ - kSymmetricTau) < 1e-9) return Skewness::Symmetric;
  return tau_ < kSymmetricTau ? Skewness::Negative : Skewness::Positive;
}

const char* to_string(Skewness s) noexcept {
  switch (s) {
    case Skewness::Negative: return "negatively skewed";
    case Skewness::Symmetric: return "approximately symmetric";
    case Skewness::Positive: return "positively skewed";
  }
  return "unknown";
}

double gev_cdf(double x, const GevParams& params) {
  params.validate();
  if (!std::isfinite(x)) throw std::domain_error("gev_cdf: x must be finite");

  const double z = (x - params.mu) / params.sigma;
  const double tau = params.tau;
  if (std::abs(tau) < kTauZeroThreshold) {
    return std::exp(-std::exp(-z));
  }
  const double t = 1.0 + tau * z;
  if (t <= 0.0) return tau > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(tau * z) / tau));
}

ResponseDerivs response_prob_derivs(double eta, double tau) {
  ResponseDerivs out;
  if (std::abs(tau) < kTauZeroThreshold) {
    const double w = std::exp(eta);
    if (!std::isfinite(w)) {
      out.prob = 1.0;
      return out;
    }
    const double dens = std::exp(eta - w);  // w * exp(-w)
    out.prob = -std::expm1(-w);
    out.d_eta = dens;
    out.d_tau = dens * 0.5 * eta * eta;
    return out;
  }

  const double t = 1.0 - tau * eta;
  if (t <= 0.0) {
    out.prob = tau > 0.0 ? 1.0 : 0.0;
    out.at_boundary = true;
    return out;
  }
  const double log_t = std::log1p(-tau * eta);
  const double log_w = -log_t / tau;
  const double w = std::exp(log_w);
  const double dens = std::exp(log_w - w);  // w * exp(-w); 0 when w overflows
  out.prob = -std::expm1(-w);
  out.d_eta = dens / t;
  out.d_tau = dens * dlogw_dtau(eta, tau, log_t, t);
  return out;
}

double response_prob(double eta, const GevLink& link) {
  if (!std::isfinite(eta)) throw std::domain_error("response_prob: eta must be finite");
  return response_prob_derivs(eta, link.tau()).prob;
}

double response_prob_clamped(double eta, const GevLink& link) {
  return clamp_prob(response_prob(eta, link));
}

double link_eta(double pi, const GevLink& link) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw std::domain_error("link_eta: probability must lie strictly inside (0, 1)");
  }
  const double w = -std::log1p(-pi);
  const double log_w = std::log(w);
  const double tau = link.tau();
  if (std::abs(tau) < kTauZeroThreshold) return log_w;
  return -std::expm1(-tau * log_w) / tau;
}

double logistic(double a) noexcept {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double log_logistic(double a) noexcept {
  if (a >= 0.0) return -std::log1p(std::exp(-a));
  return a - std::log1p(std::exp(a));
}

}  // namespace zigev
