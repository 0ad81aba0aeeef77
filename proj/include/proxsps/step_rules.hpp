#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>

#include "proxsps/core.hpp"
#include "proxsps/prox.hpp"

namespace proxsps {

// Per-iteration diagnostics of a step rule.
struct StepRecord {
  std::size_t iter = 0;
  double alpha = 0.0;
  // Uncapped adaptive step (Polyak ratio); absent when g = 0 or the rule has none.
  std::optional<double> zeta;
  // Step actually applied along -g: gamma_k, tau_k^+, or alpha_k.
  double applied_step = 0.0;
  double loss_batch = 0.0;
  double grad_norm_sq = 0.0;
  double param_norm = 0.0;
  // The caller passed fval < C.
  bool lower_bound_violated = false;
};

struct StepResult {
  ParamVector x;
  StepRecord record;
};

namespace detail {
inline void require_positive_step(double alpha, const char* who) {
  if (!(alpha > 0.0)) throw std::invalid_argument(std::string(who) + ": step size must be positive");
}
}  // namespace detail

inline ParamVector sgd_step(const ParamVector& x, const ParamVector& g, double alpha) {
  detail::require_positive_step(alpha, "sgd_step");
  ParamVector next = x;
  next.axpy(-alpha, g);
  return next;
}

inline ParamVector prox_sgd_step(const ParamVector& x, const ParamVector& g, double alpha, const Regularizer& reg) {
  return reg.prox(sgd_step(x, g, alpha), alpha);
}

// Loss plus (lambda/2)||x||^2 treated as a single smooth loss.
struct FoldedL2 {
  double fval;
  ParamVector g;
};

inline FoldedL2 fold_l2(double fval, const ParamVector& g, const ParamVector& x, double lambda) {
  ParamVector folded = g;
  folded.axpy(lambda, x);
  return {fval + 0.5 * lambda * x.squared_norm(), std::move(folded)};
}

// x - min{alpha, (fval - C) / (c ||g||^2)} g. c_scale = 1 is the truncated
// model proximal point step.
inline StepResult sps_step(const ParamVector& x, double fval, double lower_bound, const ParamVector& g, double alpha,
                           double c_scale = 1.0) {
  detail::require_positive_step(alpha, "sps_step");
  if (!(c_scale > 0.0)) throw std::invalid_argument("sps_step: c_scale must be positive");
  x.require_same_layout(g);

  StepRecord rec;
  rec.alpha = alpha;
  rec.loss_batch = fval;
  rec.grad_norm_sq = g.squared_norm();
  rec.lower_bound_violated = fval < lower_bound;

  if (rec.grad_norm_sq == 0.0) {
    rec.param_norm = x.norm();
    return {x, rec};
  }
  const double gap = std::max(fval - lower_bound, 0.0);
  const double zeta = gap / (c_scale * rec.grad_norm_sq);
  rec.zeta = zeta;
  rec.applied_step = std::min(alpha, zeta);

  ParamVector next = x;
  next.axpy(-rec.applied_step, g);
  rec.param_norm = next.norm();
  return {std::move(next), rec};
}

// Closed-form ProxSPS step for phi = (lambda/2)||.||^2:
//   tau = min{alpha, ((1 + alpha lambda)(fval - C) - alpha lambda <g, x>)_+ / ||g||^2}
//   x+  = (x - tau g) / (1 + alpha lambda)
inline StepResult proxsps_l2_step(const ParamVector& x, double fval, double lower_bound, const ParamVector& g,
                                  double alpha, double lambda) {
  detail::require_positive_step(alpha, "proxsps_l2_step");
  if (!(lambda >= 0.0)) throw std::invalid_argument("proxsps_l2_step: lambda must be nonnegative");
  x.require_same_layout(g);

  const double shrink = 1.0 + alpha * lambda;
  StepRecord rec;
  rec.alpha = alpha;
  rec.loss_batch = fval;
  rec.grad_norm_sq = g.squared_norm();
  rec.lower_bound_violated = fval < lower_bound;

  ParamVector next = x;
  if (rec.grad_norm_sq != 0.0) {
    const double numer = shrink * (fval - lower_bound) - alpha * lambda * g.dot(x);
    const double zeta = std::max(numer, 0.0) / rec.grad_norm_sq;
    rec.zeta = zeta;
    rec.applied_step = std::min(alpha, zeta);
    next.axpy(-rec.applied_step, g);
  }
  next /= shrink;
  rec.param_norm = next.norm();
  return {std::move(next), rec};
}

inline constexpr double kGeneralStepTol = 1e-12;

// ProxSPS for an arbitrary regularizer:
//   argmin_y max{fval + <g, y - x>, C} + phi(y) + ||y - x||^2 / (2 alpha)
// which, up to the constant C, is the hinge problem with c = fval - C - <g, x>.
inline StepResult proxsps_general_step(const ParamVector& x, double fval, double lower_bound, const ParamVector& g,
                                       double alpha, const Regularizer& reg, double tol = kGeneralStepTol) {
  detail::require_positive_step(alpha, "proxsps_general_step");
  x.require_same_layout(g);

  StepRecord rec;
  rec.alpha = alpha;
  rec.loss_batch = fval;
  rec.grad_norm_sq = g.squared_norm();
  rec.lower_bound_violated = fval < lower_bound;

  TruncatedProxProblem problem{fval - lower_bound - g.dot(x), g, x, alpha, &reg};
  TruncatedProxSolution sol = solve_truncated_prox(problem, tol);
  rec.applied_step = alpha * sol.u;
  rec.param_norm = sol.y.norm();
  return {std::move(sol.y), rec};
}

// DecSPS state: c_{k-1}, gamma_{k-1} and the iteration counter.
struct DecSpsState {
  double c_prev = 1.0;
  double gamma_prev = 1.0;
  std::size_t k = 0;

  // gamma_{-1} = alpha0 and c_{-1} = c0 so the first cap is c0 * alpha0.
  static DecSpsState initial(double alpha0, double c0 = 1.0) { return {c0, alpha0, 0}; }
};

// c_k = c0 sqrt(k + 1)
struct SqrtCSchedule {
  double c0 = 1.0;
  double operator()(std::size_t k) const { return c0 * std::sqrt(static_cast<double>(k + 1)); }
};

struct DecSpsResult {
  ParamVector x;
  DecSpsState state;
  StepRecord record;
};

// gamma_k = (1/c_k) min{(fval - C) / ||g||^2, c_{k-1} gamma_{k-1}};  x+ = x - gamma_k g
template <typename CSchedule>
  requires std::invocable<const CSchedule&, std::size_t>
DecSpsResult decsps_step(const ParamVector& x, const ParamVector& g, double fval, double lower_bound,
                         const DecSpsState& state, const CSchedule& c_schedule) {
  x.require_same_layout(g);
  const double c_k = c_schedule(state.k);
  if (!(c_k > 0.0)) throw std::invalid_argument("decsps_step: c_k must be positive");
  if (c_k < state.c_prev) throw std::invalid_argument("decsps_step: c_k sequence must be nondecreasing");

  StepRecord rec;
  rec.iter = state.k;
  rec.loss_batch = fval;
  rec.grad_norm_sq = g.squared_norm();
  rec.lower_bound_violated = fval < lower_bound;

  const double cap = state.c_prev * state.gamma_prev;
  rec.alpha = cap / c_k;
  DecSpsState next_state = state;
  ++next_state.k;

  if (rec.grad_norm_sq == 0.0) {
    rec.param_norm = x.norm();
    return {x, next_state, rec};
  }
  const double ratio = std::max(fval - lower_bound, 0.0) / rec.grad_norm_sq;
  const double gamma = std::min(ratio, cap) / c_k;
  rec.zeta = ratio / c_k;
  rec.applied_step = gamma;
  next_state.c_prev = c_k;
  next_state.gamma_prev = gamma;

  ParamVector next = x;
  next.axpy(-gamma, g);
  rec.param_norm = next.norm();
  return {std::move(next), next_state, rec};
}

}  // namespace proxsps
