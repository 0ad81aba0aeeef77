#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "proxsps/core.hpp"
#include "proxsps/param_vector.hpp"
#include "proxsps/rng.hpp"

namespace proxsps::testing {

inline ParamVector random_vector(std::size_t n, RngStream& rng, double scale = 1.0) {
  ParamVector v(Layout::flat(n));
  for (double& x : v.values()) x = scale * rng.normal();
  return v;
}

inline ParamVector random_like(const ParamVector& like, RngStream& rng, double scale = 1.0) {
  ParamVector v = ParamVector::zeros_like(like);
  for (double& x : v.values()) x = scale * rng.normal();
  return v;
}

// alpha log-uniform on [lo, hi]
inline double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

inline double pick(RngStream& rng, const std::vector<double>& values) { return values[rng.below(values.size())]; }

// Largest relative error between the analytic gradient and central finite
// differences along random unit directions.
inline double fd_gradient_error(const StochasticObjective& f, const ParamVector& x, const Batch& batch, RngStream& rng,
                                int probes, double h = 1e-6) {
  const ParamVector g = f.gradient(x, batch);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    ParamVector d = random_like(x, rng);
    d /= d.norm();
    const double fd = (f.value(x + h * d, batch) - f.value(x - h * d, batch)) / (2.0 * h);
    const double an = g.dot(d);
    const double err = std::abs(fd - an) / std::max({1.0, std::abs(an), std::abs(fd)});
    worst = std::max(worst, err);
  }
  return worst;
}

// Smallest change of F when x is moved by +-delta along random unit directions.
template <typename F>
double min_perturbation_change(const F& objective, const ParamVector& x, RngStream& rng, int directions, double delta) {
  const double base = objective(x);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < directions; ++i) {
    ParamVector d = random_like(x, rng);
    d /= d.norm();
    for (double s : {delta, -delta}) worst = std::min(worst, objective(x + s * d) - base);
  }
  return worst;
}

}  // namespace proxsps::testing
