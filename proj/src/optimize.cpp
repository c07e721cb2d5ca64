#include "zigev/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace zigev::optim {

Bounds Bounds::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

Eigen::VectorXd Bounds::clip(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

namespace {

// Coordinates sitting on a bound with the gradient pointing outward.
std::vector<bool> active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                             const Bounds& b) {
  std::vector<bool> active(static_cast<std::size_t>(x.size()), false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    active[static_cast<std::size_t>(i)] =
        (x(i) <= b.lower(i) && g(i) > 0.0) || (x(i) >= b.upper(i) && g(i) < 0.0);
  }
  return active;
}

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Bounds& bounds) {
  const auto active = active_set(x, grad, bounds);
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!active[static_cast<std::size_t>(i)]) norm = std::max(norm, std::abs(grad(i)));
  }
  return norm;
}

Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                     const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = bounds.clip(x0);
  res.value = f(res.x, &res.gradient);
  res.evaluations = 1;

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;
  int stalled = 0;

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    const Eigen::VectorXd& g = res.gradient;
    if (!g.allFinite()) {
      res.message = "non-finite gradient";
      return res;
    }
    if (projected_gradient_norm(res.x, g, bounds) <= options.gradient_tolerance) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }

    const auto active = active_set(res.x, g, bounds);
    auto direction = [&](const Eigen::MatrixXd& hinv) {
      Eigen::VectorXd pg = g;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) pg(i) = 0.0;
      }
      Eigen::VectorXd d = -hinv * pg;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)] || (res.x(i) <= bounds.lower(i) && d(i) < 0.0) ||
            (res.x(i) >= bounds.upper(i) && d(i) > 0.0)) {
          d(i) = 0.0;
        }
      }
      return d;
    };

    Eigen::VectorXd d = direction(H);
    if (g.dot(d) >= -1e-16 * g.norm() * d.norm() || !d.allFinite()) {
      H.setIdentity();
      h_is_identity = true;
      d = direction(H);
    }

    double alpha = 1.0;
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax * alpha > options.max_step) alpha = options.max_step / dmax;

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = bounds.clip(res.x + alpha * d);
      f_new = f(x_new, nullptr);
      ++res.evaluations;
      const double decrease = g.dot(x_new - res.x);
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic interpolation of the step.
      double next = 0.5 * alpha;
      if (std::isfinite(f_new)) {
        const double slope = g.dot(d);
        const double denom = 2.0 * (f_new - res.value - slope * alpha);
        if (denom > 0.0) next = -slope * alpha * alpha / denom;
      }
      alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
    }

    if (!accepted) {
      if (!h_is_identity) {
        H.setIdentity();
        h_is_identity = true;
        continue;
      }
      res.message = "line search failed";
      return res;
    }

    Eigen::VectorXd g_new;
    f_new = f(x_new, &g_new);
    ++res.evaluations;
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);

    const double improvement = res.value - f_new;
    stalled = (improvement <= 1e-15 * (1.0 + std::abs(res.value))) ? stalled + 1 : 0;

    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;

    if (sy > 1e-12 * s.norm() * yv.norm() && sy > 0.0) {
      if (h_is_identity) H *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = H * yv;
      // H+ = (I - rho s y')H(I - rho y s') + rho s s'
      H += (rho * rho * yv.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
      h_is_identity = false;
    }
    if (stalled >= 5) {
      res.converged = projected_gradient_norm(res.x, res.gradient, bounds) <=
                      options.gradient_tolerance;
      res.message = "no further progress";
      return res;
    }
  }
  res.converged =
      projected_gradient_norm(res.x, res.gradient, bounds) <= options.gradient_tolerance;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

Result minimize_nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                            const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = bounds.clip(x0);
  res.value = f(res.x, nullptr);
  res.evaluations = 1;

  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x, nullptr);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    const double start_value = res.value;
    std::vector<Eigen::VectorXd> simplex{res.x};
    std::vector<double> values{res.value};
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::VectorXd v = res.x;
      const double step = options.initial_step * std::max(1.0, std::abs(v(j)));
      v(j) += step;
      if (v(j) > bounds.upper(j)) v(j) = res.x(j) - step;
      v = bounds.clip(v);
      simplex.push_back(v);
      values.push_back(eval(v));
    }

    std::vector<std::size_t> order(simplex.size());
    while (res.evaluations < options.max_evaluations) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front(), worst = order.back();
      const std::size_t second_worst = order[order.size() - 2];
      if (std::abs(values[worst] - values[best]) <=
          options.value_tolerance * (1.0 + std::abs(values[best]))) {
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < simplex.size(); ++k) {
        if (k != worst) centroid += simplex[k];
      }
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd xr = bounds.clip(centroid + (centroid - simplex[worst]));
      const double fr = eval(xr);
      if (fr < values[best]) {
        const Eigen::VectorXd xe = bounds.clip(centroid + 2.0 * (centroid - simplex[worst]));
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[worst] = xe;
          values[worst] = fe;
        } else {
          simplex[worst] = xr;
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second_worst]) {
        simplex[worst] = xr;
        values[worst] = fr;
        continue;
      }
      const bool outside = fr < values[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : values[worst])) {
        simplex[worst] = xc;
        values[worst] = fc;
        continue;
      }
      for (std::size_t k = 0; k < simplex.size(); ++k) {
        if (k == best) continue;
        simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
        values[k] = eval(simplex[k]);
      }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
    if (values[best] < res.value) {
      res.value = values[best];
      res.x = simplex[best];
    }
    ++res.iterations;
    if (res.evaluations >= options.max_evaluations) {
      res.message = "evaluation limit reached";
      return res;
    }
    if (start_value - res.value <= options.value_tolerance * (1.0 + std::abs(res.value))) {
      res.converged = true;
      res.message = "simplex collapsed";
      return res;
    }
  }
  res.message = "restart limit reached";
  return res;
}

}  // namespace zigev::optim
