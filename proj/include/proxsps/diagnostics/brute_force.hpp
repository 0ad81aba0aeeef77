#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "proxsps/core.hpp"
#include "proxsps/regularizers.hpp"
#include "proxsps/rng.hpp"

namespace proxsps::diagnostics {

enum class ModelKind {
  linear,     // f + <g, y - x>
  truncated,  // max{f + <g, y - x>, C}
};

// The subproblem min_y model(y) + phi(y) + ||y - x||^2 / (2 alpha).
struct SubproblemSpec {
  ModelKind model = ModelKind::truncated;
  double fval = 0.0;
  double lower_bound = 0.0;
  ParamVector g;
  ParamVector x;
  double alpha = 1.0;
  const Regularizer* reg = nullptr;  // null means phi = 0
};

struct GridConfig {
  int points_per_dim = 9;
  double final_step = 1e-11;
  std::size_t random_directions = 16;
  std::uint64_t seed = 7;
  int max_polls = 200000;
};

inline constexpr std::size_t kBruteForceMaxDim = 5;

class DimensionTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

using Point = std::vector<long double>;

class SubproblemObjective {
 public:
  explicit SubproblemObjective(const SubproblemSpec& s) : spec_(s), n_(s.x.size()) {
    if (s.reg) {
      l2_ = dynamic_cast<const L2Regularizer*>(s.reg);
      box_ = dynamic_cast<const BoxRegularizer*>(s.reg);
      zero_ = dynamic_cast<const ZeroRegularizer*>(s.reg);
    }
  }

  long double operator()(const Point& y) const {
    long double lin = spec_.fval;
    long double prox = 0.0L;
    for (std::size_t i = 0; i < n_; ++i) {
      const long double d = y[i] - static_cast<long double>(spec_.x[i]);
      lin += static_cast<long double>(spec_.g[i]) * d;
      prox += d * d;
    }
    long double model = lin;
    if (spec_.model == ModelKind::truncated) model = std::max(lin, static_cast<long double>(spec_.lower_bound));
    return model + reg_value(y) + prox / (2.0L * spec_.alpha);
  }

  // Per-coordinate search bounds implied by the regularizer's domain.
  std::pair<long double, long double> domain() const {
    const long double inf = std::numeric_limits<long double>::infinity();
    if (box_) return {box_->lo(), box_->hi()};
    return {-inf, inf};
  }

 private:
  long double reg_value(const Point& y) const {
    if (!spec_.reg || zero_) return 0.0L;
    if (l2_) {
      long double s = 0.0L;
      for (long double v : y) s += v * v;
      return 0.5L * l2_->lambda() * s;
    }
    if (box_) {
      for (long double v : y) {
        if (v < box_->lo() || v > box_->hi()) return std::numeric_limits<long double>::infinity();
      }
      return 0.0L;
    }
    ParamVector p = ParamVector::zeros_like(spec_.x);
    for (std::size_t i = 0; i < n_; ++i) p[i] = static_cast<double>(y[i]);
    return spec_.reg->value(p);
  }

  const SubproblemSpec& spec_;
  std::size_t n_;
  const L2Regularizer* l2_ = nullptr;
  const BoxRegularizer* box_ = nullptr;
  const ZeroRegularizer* zero_ = nullptr;
};

inline void normalize(Point& d) {
  long double s = 0.0L;
  for (long double v : d) s += v * v;
  s = std::sqrt(s);
  if (s > 0.0L) {
    for (long double& v : d) v /= s;
  }
}

// Poll set: coordinate axes, g, random directions, and for every subset S of
// coordinates each axis e_i (i in S) projected onto the orthogonal complement
// of g restricted to S. The last family follows the kink of the truncated model
// while keeping the coordinates outside S fixed.
inline std::vector<Point> poll_directions(const ParamVector& g, std::size_t random_count, RngStream& rng) {
  const std::size_t n = g.size();
  std::vector<Point> dirs;
  auto push_pair = [&](Point d) {
    normalize(d);
    Point neg = d;
    for (long double& v : neg) v = -v;
    dirs.push_back(std::move(d));
    dirs.push_back(std::move(neg));
  };
  for (std::size_t i = 0; i < n; ++i) {
    Point e(n, 0.0L);
    e[i] = 1.0L;
    push_pair(e);
  }
  if (!g.is_zero()) {
    Point d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = g[i];
    push_pair(d);
  }
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    long double gs = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1U) gs += static_cast<long double>(g[j]) * g[j];
    }
    if (gs == 0.0L) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) continue;
      Point d(n, 0.0L);
      for (std::size_t j = 0; j < n; ++j) {
        if (mask >> j & 1U) d[j] = -static_cast<long double>(g[i]) * g[j] / gs;
      }
      d[i] += 1.0L;
      long double s = 0.0L;
      for (long double v : d) s += v * v;
      if (s > 1e-24L) push_pair(d);
    }
  }
  for (std::size_t k = 0; k < random_count; ++k) {
    Point d(n);
    for (long double& v : d) v = rng.normal();
    push_pair(d);
  }
  return dirs;
}

}  // namespace detail

// Minimizes the declared subproblem by a coarse grid search followed by a
// pattern search that halves its step down to cfg.final_step. Test oracle only.
inline ParamVector brute_force_subproblem_min(const SubproblemSpec& spec, const GridConfig& cfg = {}) {
  const std::size_t n = spec.x.size();
  if (n == 0) throw std::invalid_argument("brute_force_subproblem_min: empty problem");
  if (n > kBruteForceMaxDim) throw DimensionTooLarge("brute_force_subproblem_min: dimension above 5");
  spec.g.require_same_layout(spec.x);
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("brute_force_subproblem_min: alpha must be positive");
  if (cfg.points_per_dim < 2) throw std::invalid_argument("brute_force_subproblem_min: need >= 2 grid points");

  const detail::SubproblemObjective F(spec);
  const auto [dom_lo, dom_hi] = F.domain();
  const long double radius = spec.alpha * spec.g.norm() + spec.x.norm() + 1.0;

  std::vector<long double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::max<long double>(spec.x[i] - radius, dom_lo);
    hi[i] = std::min<long double>(spec.x[i] + radius, dom_hi);
    if (lo[i] > hi[i]) {
      // x is far outside the domain; search the domain itself near x.
      lo[i] = std::clamp<long double>(spec.x[i], dom_lo, dom_hi);
      hi[i] = lo[i];
    }
  }

  detail::Point best(spec.x.values().begin(), spec.x.values().end());
  long double best_val = F(best);
  std::vector<int> idx(n, 0);
  const int m = cfg.points_per_dim;
  detail::Point y(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) y[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (m - 1);
    const long double v = F(y);
    if (v < best_val) {
      best_val = v;
      best = y;
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == m) idx[k++] = 0;
    if (k == n) break;
  }
  if (!std::isfinite(static_cast<double>(best_val))) {
    throw std::runtime_error("brute_force_subproblem_min: no finite grid point");
  }

  RngStream rng(cfg.seed);
  const std::vector<detail::Point> dirs = detail::poll_directions(spec.g, cfg.random_directions, rng);
  long double step = 0.0L;
  for (std::size_t i = 0; i < n; ++i) step = std::max(step, (hi[i] - lo[i]) / (m - 1));
  if (step == 0.0L) step = 1.0L;

  int polls = 0;
  while (step >= cfg.final_step && polls < cfg.max_polls) {
    long double cand_val = best_val;
    detail::Point cand;
    for (const detail::Point& d : dirs) {
      for (std::size_t i = 0; i < n; ++i) y[i] = best[i] + step * d[i];
      const long double v = F(y);
      ++polls;
      if (v < cand_val) {
        cand_val = v;
        cand = y;
      }
    }
    if (cand.empty()) {
      step /= 2.0L;
    } else {
      best = std::move(cand);
      best_val = cand_val;
    }
  }

  ParamVector out = ParamVector::zeros_like(spec.x);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(best[i]);
  return out;
}

}  // namespace proxsps::diagnostics
