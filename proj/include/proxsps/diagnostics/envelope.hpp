#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsps/core.hpp"

namespace proxsps::diagnostics {

class InnerSolverFailure : public std::runtime_error {
 public:
  InnerSolverFailure(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

struct EnvelopeOptions {
  double inner_tol = 1e-9;
  int max_iterations = 50000;
  // Smoothness constant of f. When absent the step is found by backtracking.
  std::optional<double> smoothness;
};

struct EnvelopeGradient {
  ParamVector gradient;  // (x - x_hat) / eta
  double norm = 0.0;
  ParamVector prox_point;  // x_hat = prox_{eta psi}(x)
  int iterations = 0;
};

// psi = f + phi with f the full-batch loss.
struct Composite {
  const StochasticObjective* f = nullptr;
  const Regularizer* reg = nullptr;

  double value(const ParamVector& x) const { return f->full_value(x) + reg->value(x); }
};

// Gradient of the Moreau envelope env^eta_psi at x. x_hat is computed by
// proximal gradient on y -> f(y) + ||y - x||^2 / (2 eta), with phi handled by
// its prox, until the gradient mapping norm drops below inner_tol.
inline EnvelopeGradient moreau_env_grad(const Composite& psi, const ParamVector& x, double eta,
                                        const EnvelopeOptions& opts = {}) {
  if (!(eta > 0.0)) throw std::invalid_argument("moreau_env_grad: eta must be positive");
  const StochasticObjective& f = *psi.f;
  const Regularizer& reg = *psi.reg;

  auto smooth_value = [&](const ParamVector& y) { return f.full_value(y) + (y - x).squared_norm() / (2.0 * eta); };
  auto smooth_grad = [&](const ParamVector& y) {
    ParamVector g = f.full_gradient(y);
    g.axpy(1.0 / eta, y - x);
    return g;
  };

  double lipschitz = opts.smoothness ? *opts.smoothness + 1.0 / eta : 1.0 + 1.0 / eta;
  ParamVector y = x;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const ParamVector grad = smooth_grad(y);
    ParamVector next;
    while (true) {
      const double t = 1.0 / lipschitz;
      ParamVector z = y;
      z.axpy(-t, grad);
      next = reg.prox(z, t);
      if (opts.smoothness) break;
      const ParamVector d = next - y;
      const double model = smooth_value(y) + grad.dot(d) + d.squared_norm() * lipschitz / 2.0;
      if (smooth_value(next) <= model + 1e-15 * std::abs(model)) break;
      lipschitz *= 2.0;
    }
    residual = (y - next).norm() * lipschitz;
    y = std::move(next);
    if (residual <= opts.inner_tol) {
      ParamVector g = (x - y) / eta;
      const double norm = g.norm();
      return {std::move(g), norm, std::move(y), it + 1};
    }
  }
  throw InnerSolverFailure("moreau_env_grad: inner solver hit its iteration cap, residual " + std::to_string(residual),
                           residual);
}

// G_eta(x) = (x - prox_{eta phi}(x - eta grad f(x))) / eta
inline ParamVector gradient_mapping(const StochasticObjective& f, const Regularizer& reg, const ParamVector& x,
                                    double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("gradient_mapping: eta must be positive");
  ParamVector z = x;
  z.axpy(-eta, f.full_gradient(x));
  return (x - reg.prox(z, eta)) / eta;
}

// Largest eigenvalue of the full-batch Hessian at x by power iteration on
// central-difference Hessian-vector products.
inline double local_smoothness(const StochasticObjective& f, const ParamVector& x, int iterations = 100,
                               double h = 1e-5) {
  ParamVector v = x;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v /= v.norm();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    ParamVector hv = (f.full_gradient(x + h * v) - f.full_gradient(x - h * v)) / (2.0 * h);
    const double n = hv.norm();
    if (n == 0.0) return 0.0;
    estimate = n;
    v = hv / n;
  }
  return estimate;
}

// Variance of a uniformly drawn batch gradient (without replacement) around
// the full gradient, maximized over the given iterates:
//   max_x (1/N) sum_i ||grad f_i(x) - grad f(x)||^2 / b * (N - b) / (N - 1)
inline double estimate_gradient_noise(const StochasticObjective& f, const std::vector<ParamVector>& iterates,
                                      std::size_t batch_size) {
  const std::size_t n = f.dataset_size();
  if (batch_size == 0 || batch_size > n) throw std::invalid_argument("estimate_gradient_noise: bad batch size");
  double worst = 0.0;
  for (const ParamVector& x : iterates) {
    const ParamVector mean = f.full_gradient(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (f.gradient(x, Batch::single(i)) - mean).squared_norm();
    double var = acc / static_cast<double>(n);
    if (n > 1) {
      var *= static_cast<double>(n - batch_size) / (static_cast<double>(n - 1) * static_cast<double>(batch_size));
    }
    worst = std::max(worst, var);
  }
  return worst;
}

}  // namespace proxsps::diagnostics
