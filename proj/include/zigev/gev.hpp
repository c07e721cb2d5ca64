#pragma once

// GEV distribution function, the GEV binary response curve and its inverse,
// and the logistic function.
//
// The response curve used throughout the library is
//
//   pi(eta; tau) = 1 - exp(-[(1 - tau * eta)_+]^(-1/tau)),   tau != 0
//   pi(eta; 0)   = 1 - exp(-exp(eta))                        (cloglog)
//
// i.e. pi(eta) = 1 - G(-eta) with G the GEV(0, 1, tau) distribution function.

#include <cmath>

namespace zigev {

/// Shape values with |tau| below this are evaluated on the Gumbel/cloglog branch.
inline constexpr double kTauZeroThreshold = 1e-8;

/// Interior clamp used wherever a probability feeds a logarithm.
inline constexpr double kProbEps = 1e-12;

/// Default bound on |tau| for a valid link.
inline constexpr double kDefaultTauBound = 20.0;

/// Shape at which the GEV response curve is approximately symmetric.
inline const double kSymmetricTau = std::log(2.0) - 1.0;

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double tau = 0.0;

  /// Throws std::domain_error unless sigma > 0 and every field is finite.
  void validate() const;
};

enum class Skewness { Negative, Symmetric, Positive };

/// GEV response link with location 0 and scale 1.
class GevLink {
 public:
  explicit GevLink(double tau, double tau_bound = kDefaultTauBound);

  double tau() const noexcept { return tau_; }
  Skewness skewness() const noexcept;

 private:
  double tau_;
};

const char* to_string(Skewness s) noexcept;

/// Value of pi(eta) together with its partial derivatives.
struct ResponseDerivs {
  double prob = 0.0;
  double d_eta = 0.0;
  double d_tau = 0.0;
  /// True when (1 - tau * eta) <= 0 for tau != 0.
  bool at_boundary = false;
};

double gev_cdf(double x, const GevParams& params);

/// pi(eta; tau). May return exactly 0 or 1 at the support boundary.
double response_prob(double eta, const GevLink& link);

/// response_prob clamped into [kProbEps, 1 - kProbEps].
double response_prob_clamped(double eta, const GevLink& link);

/// response_prob with analytic derivatives in eta and tau. Derivatives are
/// zero on the flat side of the support boundary.
ResponseDerivs response_prob_derivs(double eta, double tau);

/// Inverse of response_prob. Throws std::domain_error for pi outside (0, 1).
double link_eta(double pi, const GevLink& link);

double logistic(double a) noexcept;

/// log(logistic(a)) without underflow for very negative a.
double log_logistic(double a) noexcept;

inline double clamp_prob(double p) noexcept {
  return p < kProbEps ? kProbEps : (p > 1.0 - kProbEps ? 1.0 - kProbEps : p);
}

}  // namespace zigev
