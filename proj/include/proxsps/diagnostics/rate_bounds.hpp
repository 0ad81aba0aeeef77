#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proxsps/schedule.hpp"

namespace proxsps::diagnostics {

// Constants entering the convergence guarantees for ProxSPS on smooth losses.
struct RateCheckParams {
  double L = 1.0;       // smoothness of f
  double mu = 0.0;      // strong convexity of f
  double lambda = 0.0;  // strong convexity of phi
  double beta = 0.0;    // bound on E||grad f(x;S) - grad f(x)||^2
  double theta = 2.0;   // slack, > 1
  double rho = 0.0;     // weak convexity of f
  double eta = 1.0;     // envelope parameter

  void validate() const {
    if (!(theta > 1.0)) throw std::invalid_argument("rate check: theta must exceed 1");
    if (!(L > 0.0)) throw std::invalid_argument("rate check: L must be positive");
    if (!(beta >= 0.0) || !(mu >= 0.0) || !(lambda >= 0.0) || !(rho >= 0.0)) {
      throw std::invalid_argument("rate check: beta, mu, lambda, rho must be nonnegative");
    }
  }

  // Largest admissible constant step: (1 - 1/theta) / L.
  double max_step() const { return (1.0 - 1.0 / theta) / L; }
};

enum class RateGuarantee {
  strongly_convex_decay,  // lambda > 0, alpha_k = 1/(lambda (k + k0)); averaged-iterate suboptimality
  convex_sqrt,            // lambda = 0, alpha_k = alpha / sqrt(k + 1); weighted-average suboptimality
  constant_step,          // constant alpha; E||x^K - x*||^2
  envelope_decay,         // weakly convex; alpha/sqrt(k+1) or alpha/sqrt(K); envelope gradient norm^2
};

inline std::string_view to_string(RateGuarantee t) {
  switch (t) {
    case RateGuarantee::strongly_convex_decay: return "strongly_convex_decay";
    case RateGuarantee::convex_sqrt: return "convex_sqrt";
    case RateGuarantee::constant_step: return "constant_step";
    case RateGuarantee::envelope_decay: return "envelope_decay";
  }
  return "?";
}

class StepConditionViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RateEvidence {
  Schedule schedule;
  std::size_t K = 0;
  // ||x0 - x*||^2, or env^eta_psi(x0) - inf psi for envelope_decay.
  double initial_gap = 0.0;
  // Left-hand side measured on each seed.
  std::vector<double> measured;
  // measured <= bound * (1 + relative_slack) counts as holding.
  double relative_slack = 0.0;
};

struct RateVerdict {
  double bound = 0.0;
  double measured = 0.0;  // mean over seeds
  bool holds = false;     // mean satisfies the bound
  std::size_t seeds_holding = 0;
};

namespace detail {

inline void require(bool ok, const std::string& inequality) {
  if (!ok) throw StepConditionViolation("step-size condition violated: " + inequality);
}

}  // namespace detail

// Right-hand side of the selected guarantee after K iterations.
inline double rate_bound(RateGuarantee guarantee, const RateCheckParams& p, const RateEvidence& ev) {
  p.validate();
  const double K = static_cast<double>(ev.K);
  const double D0 = ev.initial_gap;
  const double inf = std::numeric_limits<double>::infinity();
  const Schedule& s = ev.schedule;

  switch (guarantee) {
    case RateGuarantee::strongly_convex_decay: {
      detail::require(p.lambda > 0.0, "lambda > 0");
      detail::require(s.kind == ScheduleKind::strong_decay, "alpha_k = 1/(lambda (k + k0))");
      detail::require(std::abs(s.lambda - p.lambda) <= 1e-12 * p.lambda, "schedule lambda equals regularizer lambda");
      detail::require(s.max_alpha() <= p.max_step(), "alpha_k <= (1 - 1/theta) / L, i.e. k0 >= L / (lambda (1 - 1/theta))");
      if (ev.K == 0) return inf;
      const double k0 = static_cast<double>(s.k0);
      return p.lambda * k0 / (2.0 * K) * D0 + p.theta * p.beta * (1.0 + std::log(K)) / (2.0 * p.lambda * K);
    }
    case RateGuarantee::convex_sqrt: {
      detail::require(p.lambda == 0.0, "lambda = 0");
      detail::require(s.kind == ScheduleKind::sqrt_iter, "alpha_k = alpha / sqrt(k + 1)");
      detail::require(s.alpha0 <= p.max_step(), "alpha <= (1 - 1/theta) / L");
      if (ev.K == 0) return inf;
      const double denom = std::sqrt(K + 1.0) - 1.0;
      return D0 / (4.0 * s.alpha0 * denom) + p.theta * p.beta * s.alpha0 * (1.0 + std::log(K)) / (4.0 * denom);
    }
    case RateGuarantee::constant_step: {
      detail::require(s.kind == ScheduleKind::constant, "constant alpha");
      detail::require(s.alpha0 <= p.max_step(), "alpha <= (1 - 1/theta) / L");
      const double m = p.mu + 2.0 * p.lambda;
      const double noise = m > 0.0 ? p.theta * p.beta * s.alpha0 / m : (p.beta > 0.0 ? inf : 0.0);
      return std::pow(1.0 + s.alpha0 * m, -K) * D0 + noise;
    }
    case RateGuarantee::envelope_decay: {
      const double gap = p.rho - p.lambda;
      detail::require(p.eta > 0.0 && (gap <= 0.0 || p.eta < 1.0 / gap), "eta in (0, 1/(rho - lambda))");
      const double window = 1.0 - p.eta * gap;
      const double step_cap = (1.0 - 1.0 / p.theta) / (p.L + 1.0 / p.eta);
      if (ev.K == 0) return inf;
      if (s.kind == ScheduleKind::sqrt_iter) {
        detail::require(s.alpha0 <= step_cap, "alpha <= (1 - 1/theta) / (L + 1/eta)");
        const double denom = std::sqrt(K + 1.0) - 1.0;
        return D0 / (s.alpha0 * window * denom) +
               p.beta * p.theta / (2.0 * p.eta * window) * s.alpha0 * (1.0 + std::log(K)) / denom;
      }
      if (s.kind == ScheduleKind::sqrt_total) {
        detail::require(s.alpha0 <= std::sqrt(K) * step_cap, "alpha <= sqrt(K) (1 - 1/theta) / (L + 1/eta)");
        return 2.0 * D0 / (s.alpha0 * window * std::sqrt(K)) +
               p.beta * p.theta / (p.eta * window) * s.alpha0 / std::sqrt(K);
      }
      detail::require(false, "alpha_k = alpha / sqrt(k + 1) or alpha / sqrt(K)");
    }
  }
  return inf;
}

inline RateVerdict evaluate_rate_bound(RateGuarantee guarantee, const RateCheckParams& params, const RateEvidence& ev) {
  RateVerdict v;
  v.bound = rate_bound(guarantee, params, ev);
  if (ev.measured.empty()) throw std::invalid_argument("evaluate_rate_bound: no measurements");
  const double limit = v.bound * (1.0 + ev.relative_slack);
  for (double m : ev.measured) {
    if (m <= limit) ++v.seeds_holding;
  }
  v.measured = std::accumulate(ev.measured.begin(), ev.measured.end(), 0.0) / static_cast<double>(ev.measured.size());
  v.holds = v.measured <= limit;
  return v;
}

}  // namespace proxsps::diagnostics
