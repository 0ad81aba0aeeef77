#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace proxsps {

enum class ScheduleKind { constant, sqrt_epoch, sqrt_iter, sqrt_total, strong_decay };

inline std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::sqrt_epoch: return "sqrt_epoch";
    case ScheduleKind::sqrt_iter: return "sqrt_iter";
    case ScheduleKind::sqrt_total: return "sqrt_total";
    case ScheduleKind::strong_decay: return "strong_decay";
  }
  return "?";
}

inline std::optional<ScheduleKind> parse_schedule_kind(std::string_view s) {
  for (auto k : {ScheduleKind::constant, ScheduleKind::sqrt_epoch, ScheduleKind::sqrt_iter, ScheduleKind::sqrt_total,
                 ScheduleKind::strong_decay}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// Step size sequence alpha_k.
//   constant      alpha0
//   sqrt_epoch    alpha0 / sqrt(j) during epoch j = 1, 2, ...
//   sqrt_iter     alpha0 / sqrt(k + 1)
//   sqrt_total    alpha0 / sqrt(K_total)
//   strong_decay  1 / (lambda (k + k0))
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double alpha0 = 1.0;
  double lambda = 0.0;
  std::size_t k0 = 1;
  std::size_t total_iterations = 1;

  static Schedule constant(double alpha0) { return validated({ScheduleKind::constant, alpha0}); }
  static Schedule sqrt_epoch(double alpha0) { return validated({ScheduleKind::sqrt_epoch, alpha0}); }
  static Schedule sqrt_iter(double alpha0) { return validated({ScheduleKind::sqrt_iter, alpha0}); }
  static Schedule sqrt_total(double alpha0, std::size_t total) {
    return validated({ScheduleKind::sqrt_total, alpha0, 0.0, 1, total});
  }
  static Schedule strong_decay(double lambda, std::size_t k0) {
    return validated({ScheduleKind::strong_decay, 1.0, lambda, k0});
  }

  void validate() const {
    switch (kind) {
      case ScheduleKind::strong_decay:
        if (!(lambda > 0.0)) throw std::invalid_argument("strong_decay schedule needs lambda > 0");
        if (k0 < 1) throw std::invalid_argument("strong_decay schedule needs k0 >= 1");
        break;
      case ScheduleKind::sqrt_total:
        if (total_iterations < 1) throw std::invalid_argument("sqrt_total schedule needs K_total >= 1");
        [[fallthrough]];
      default:
        if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be positive");
    }
  }

  // k: zero-based global iteration; epoch: one-based epoch number.
  double alpha(std::size_t k, std::size_t epoch) const {
    switch (kind) {
      case ScheduleKind::constant: return alpha0;
      case ScheduleKind::sqrt_epoch: return alpha0 / std::sqrt(static_cast<double>(epoch < 1 ? 1 : epoch));
      case ScheduleKind::sqrt_iter: return alpha0 / std::sqrt(static_cast<double>(k + 1));
      case ScheduleKind::sqrt_total: return alpha0 / std::sqrt(static_cast<double>(total_iterations));
      case ScheduleKind::strong_decay: return 1.0 / (lambda * static_cast<double>(k + k0));
    }
    return alpha0;
  }

  // Largest alpha_k over all iterations; every kind is nonincreasing in k.
  double max_alpha() const { return alpha(0, 1); }

 private:
  static Schedule validated(Schedule s) {
    s.validate();
    return s;
  }
};

}  // namespace proxsps
