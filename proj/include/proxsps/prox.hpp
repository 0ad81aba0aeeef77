#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "proxsps/core.hpp"
#include "proxsps/regularizers.hpp"

namespace proxsps {

// prox of alpha * (lambda / 2) ||.||^2
inline ParamVector prox_l2(const ParamVector& x, double alpha, double lambda) {
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_l2: alpha must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("prox_l2: lambda must be nonnegative");
  return x / (1.0 + alpha * lambda);
}

// argmin_y (c + <a, y>)_+ + phi(y) + ||y - x0||^2 / (2 beta)
struct TruncatedProxProblem {
  double c = 0.0;
  ParamVector a;
  ParamVector x0;
  double beta = 1.0;
  const Regularizer* reg = nullptr;
};

enum class TruncatedProxCase {
  hinge_active,    // c + <a, y> > 0 at the solution: y = prox(x0 - beta a)
  hinge_inactive,  // c + <a, y> < 0: y = prox(x0)
  on_kink,         // c + <a, y> = 0, located by bisection
};

struct TruncatedProxSolution {
  ParamVector y;
  // Solution is prox_{beta phi}(x0 - beta * u * a); u = 1 and u = 0 for the
  // first two cases.
  double u = 0.0;
  TruncatedProxCase which = TruncatedProxCase::on_kink;
  int bisection_steps = 0;
};

class BisectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxBisectionSteps = 100;
inline constexpr double kDefaultBisectionTol = 1e-10;

inline TruncatedProxSolution solve_truncated_prox(const TruncatedProxProblem& p, double tol = kDefaultBisectionTol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_truncated_prox: tol must be positive");
  if (!(p.beta > 0.0)) throw std::invalid_argument("solve_truncated_prox: beta must be positive");
  if (p.reg == nullptr) throw std::invalid_argument("solve_truncated_prox: missing regularizer");
  p.a.require_same_layout(p.x0);

  const Regularizer& reg = *p.reg;
  auto point = [&](double u) {
    ParamVector z = p.x0;
    z.axpy(-p.beta * u, p.a);
    return reg.prox(z, p.beta);
  };
  auto residual = [&](const ParamVector& y) { return p.c + p.a.dot(y); };

  ParamVector full_step = point(1.0);
  const double r1 = residual(full_step);
  if (r1 > 0.0) return {std::move(full_step), 1.0, TruncatedProxCase::hinge_active, 0};

  ParamVector no_step = point(0.0);
  const double r0 = residual(no_step);
  if (r0 < 0.0) return {std::move(no_step), 0.0, TruncatedProxCase::hinge_inactive, 0};

  // r0 >= 0 >= r1; the residual is nonincreasing in u.
  if (std::abs(r0) <= tol) return {std::move(no_step), 0.0, TruncatedProxCase::on_kink, 0};
  if (std::abs(r1) <= tol) return {std::move(full_step), 1.0, TruncatedProxCase::on_kink, 0};

  double lo = 0.0;
  double hi = 1.0;
  double best_u = 0.0;
  double best_r = std::abs(r0);
  ParamVector best = no_step;
  for (int step = 1; step <= kMaxBisectionSteps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket collapsed to adjacent doubles
    ParamVector y = point(mid);
    const double r = residual(y);
    if (std::abs(r) <= tol) return {std::move(y), mid, TruncatedProxCase::on_kink, step};
    if (std::abs(r) < best_r) {
      best_r = std::abs(r);
      best_u = mid;
      best = y;
    }
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // The bracket is exhausted. A continuous residual can then only miss tol by
  // rounding in its own evaluation; anything larger means the prox is broken.
  const double scale = std::abs(p.c) + p.a.norm() * (p.x0.norm() + p.beta * p.a.norm());
  const double rounding_floor = 1e3 * std::numeric_limits<double>::epsilon() * scale;
  if (best_r <= rounding_floor) return {std::move(best), best_u, TruncatedProxCase::on_kink, kMaxBisectionSteps};
  throw BisectionFailure("solve_truncated_prox: bisection did not converge (residual " + std::to_string(best_r) +
                         "); check the regularizer's prox");
}

}  // namespace proxsps
