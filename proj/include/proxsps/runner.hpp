#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proxsps/core.hpp"
#include "proxsps/regularizers.hpp"
#include "proxsps/schedule.hpp"
#include "proxsps/step_rules.hpp"

namespace proxsps {

enum class Method { sgd, prox_sgd, sps, spsmax, proxsps, proxsps_general, decsps };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::sgd: return "sgd";
    case Method::prox_sgd: return "prox_sgd";
    case Method::sps: return "sps";
    case Method::spsmax: return "spsmax";
    case Method::proxsps: return "proxsps";
    case Method::proxsps_general: return "proxsps_general";
    case Method::decsps: return "decsps";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::sgd, Method::prox_sgd, Method::sps, Method::spsmax, Method::proxsps,
                 Method::proxsps_general, Method::decsps}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

// Methods that see the regularizer only through the loss.
inline bool folds_regularizer(Method m) {
  return m == Method::sgd || m == Method::sps || m == Method::spsmax || m == Method::decsps;
}

struct MethodConfig {
  Method method = Method::proxsps;
  double c_scale = 1.0;    // spsmax
  double decsps_c0 = 1.0;  // decsps: c_k = c0 sqrt(k + 1), gamma_{-1} = alpha0
};

struct EpochRow {
  std::size_t epoch = 0;  // one-based
  double objective = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double param_norm = 0.0;
  double zeta_median = 0.0;
  double step_median = 0.0;
  bool diverged = false;
};

struct RunOptions {
  // Called after every step with the new iterate.
  std::function<void(const ParamVector&, const StepRecord&)> on_step;
  bool keep_steps = true;
};

struct RunResult {
  ParamVector x;
  std::vector<StepRecord> steps;
  std::vector<EpochRow> rows;
  bool diverged = false;
};

inline constexpr double kDivergenceNorm = 1e12;

// lambda of a regularizer that can be added to a smooth loss.
inline double foldable_lambda(const Regularizer& reg) {
  if (const auto* l2 = dynamic_cast<const L2Regularizer*>(&reg)) return l2->lambda();
  if (dynamic_cast<const ZeroRegularizer*>(&reg) != nullptr) return 0.0;
  throw std::invalid_argument("regularizer '" + reg.name() + "' cannot be folded into the loss");
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline EpochRow diverged_row(std::size_t epoch, const std::vector<double>& zetas, const std::vector<double>& steps) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {epoch, inf, inf, inf, inf, median(zetas), median(steps), true};
}

}  // namespace detail

// Runs `epochs` passes of shuffled mini-batches from x0.
inline RunResult run_optimizer(const StochasticObjective& objective, const Regularizer& reg,
                               const MethodConfig& method, const Schedule& schedule, std::size_t epochs,
                               std::size_t batch_size, RngStream& rng, const ParamVector& x0,
                               const RunOptions& options = {}) {
  schedule.validate();
  const std::size_t n = objective.dataset_size();
  if (batch_size == 0 || batch_size > n) throw std::invalid_argument("batch_size must be in [1, dataset size]");

  const bool folded = folds_regularizer(method.method);
  const double lambda = folded ? foldable_lambda(reg) : reg.strong_convexity();
  double closed_form_lambda = 0.0;
  if (method.method == Method::proxsps) {
    if (dynamic_cast<const L2Regularizer*>(&reg) == nullptr && dynamic_cast<const ZeroRegularizer*>(&reg) == nullptr) {
      throw std::invalid_argument("proxsps needs an l2 regularizer; use proxsps_general");
    }
    closed_form_lambda = reg.strong_convexity();
  }

  RunResult result{x0, {}, {}, false};
  ParamVector& x = result.x;
  DecSpsState dec_state = DecSpsState::initial(schedule.max_alpha(), method.decsps_c0);
  const SqrtCSchedule c_schedule{method.decsps_c0};

  std::size_t k = 0;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    if (result.diverged) {
      result.rows.push_back(detail::diverged_row(epoch, {}, {}));
      continue;
    }
    std::vector<double> zetas;
    std::vector<double> applied;
    for (const Batch& batch : make_minibatches(n, batch_size, rng)) {
      const double alpha = schedule.alpha(k, epoch);
      auto [fval, g] = objective.value_and_gradient(x, batch);
      const double lb = objective.lower_bound(batch);

      ParamVector next;
      StepRecord rec;
      switch (method.method) {
        case Method::sgd: {
          auto folded_loss = fold_l2(fval, g, x, lambda);
          next = sgd_step(x, folded_loss.g, alpha);
          rec.loss_batch = folded_loss.fval;
          rec.grad_norm_sq = folded_loss.g.squared_norm();
          rec.alpha = rec.applied_step = alpha;
          break;
        }
        case Method::prox_sgd:
          next = prox_sgd_step(x, g, alpha, reg);
          rec.loss_batch = fval;
          rec.grad_norm_sq = g.squared_norm();
          rec.alpha = rec.applied_step = alpha;
          break;
        case Method::sps:
        case Method::spsmax: {
          auto folded_loss = fold_l2(fval, g, x, lambda);
          const double c = method.method == Method::sps ? 1.0 : method.c_scale;
          auto step = sps_step(x, folded_loss.fval, lb, folded_loss.g, alpha, c);
          next = std::move(step.x);
          rec = step.record;
          break;
        }
        case Method::proxsps: {
          auto step = proxsps_l2_step(x, fval, lb, g, alpha, closed_form_lambda);
          next = std::move(step.x);
          rec = step.record;
          break;
        }
        case Method::proxsps_general: {
          auto step = proxsps_general_step(x, fval, lb, g, alpha, reg);
          next = std::move(step.x);
          rec = step.record;
          break;
        }
        case Method::decsps: {
          auto folded_loss = fold_l2(fval, g, x, lambda);
          auto step = decsps_step(x, folded_loss.g, folded_loss.fval, lb, dec_state, c_schedule);
          next = std::move(step.x);
          dec_state = step.state;
          rec = step.record;
          break;
        }
      }
      rec.iter = k;
      rec.param_norm = next.norm();
      ++k;
      x = std::move(next);
      if (rec.zeta) zetas.push_back(*rec.zeta);
      applied.push_back(rec.applied_step);
      if (options.on_step) options.on_step(x, rec);
      if (options.keep_steps) result.steps.push_back(rec);

      if (!std::isfinite(fval) || !x.all_finite() || rec.param_norm > kDivergenceNorm) {
        result.diverged = true;
        break;
      }
    }
    if (result.diverged) {
      result.rows.push_back(detail::diverged_row(epoch, zetas, applied));
      continue;
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = objective.full_value(x);
    row.objective = row.train_loss + reg.value(x);
    row.val_metric = objective.validation_metric(x).value_or(row.train_loss);
    row.param_norm = x.norm();
    row.zeta_median = detail::median(zetas);
    row.step_median = detail::median(applied);
    if (!std::isfinite(row.objective)) {
      result.diverged = true;
      row = detail::diverged_row(epoch, zetas, applied);
    }
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace proxsps
