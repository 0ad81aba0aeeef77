#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsps/param_vector.hpp"
#include "proxsps/rng.hpp"

namespace proxsps {

// Sample indices drawn for one stochastic step.
struct Batch {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }

  static Batch full(std::size_t n) {
    Batch b;
    b.indices.resize(n);
    std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
    return b;
  }

  static Batch single(std::size_t i) { return Batch{{i}}; }

  // Throws if empty or any index is outside [0, n).
  void validate(std::size_t n) const {
    if (indices.empty()) throw std::invalid_argument("batch must contain at least one sample");
    for (std::size_t i : indices) {
      if (i >= n) {
        throw std::out_of_range("batch index " + std::to_string(i) + " out of range for dataset of size " +
                                std::to_string(n));
      }
    }
  }
};

// One epoch worth of batches: a random permutation of [0, n) cut into
// ceil(n / batch_size) consecutive pieces, the last one possibly short.
inline std::vector<Batch> make_minibatches(std::size_t n, std::size_t batch_size, RngStream& rng) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (batch_size > n) throw std::invalid_argument("batch_size exceeds dataset size");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<Batch> batches;
  batches.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.push_back(Batch{{perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(stop)}});
  }
  return batches;
}

// Finite-sum loss f(x) = (1/N) sum_i f_i(x) with per-batch access.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t dataset_size() const = 0;

  // Layout of the parameter vector this objective expects.
  virtual std::shared_ptr<const Layout> layout() const = 0;

  // Mean loss over the batch.
  virtual double value(const ParamVector& x, const Batch& batch) const = 0;

  // Gradient of value(x, batch) (a Clarke subgradient at kinks).
  virtual ParamVector gradient(const ParamVector& x, const Batch& batch) const = 0;

  virtual std::pair<double, ParamVector> value_and_gradient(const ParamVector& x, const Batch& batch) const {
    return {value(x, batch), gradient(x, batch)};
  }

  // C(s): a lower bound of value(., batch). Zero for nonnegative losses.
  virtual double lower_bound(const Batch& /*batch*/) const { return 0.0; }

  virtual double full_value(const ParamVector& x) const { return value(x, Batch::full(dataset_size())); }

  virtual ParamVector full_gradient(const ParamVector& x) const { return gradient(x, Batch::full(dataset_size())); }

  // Lipschitz constant of the full gradient, when known.
  virtual std::optional<double> smoothness_constant() const { return std::nullopt; }

  // Held-out metric, when the problem defines one.
  virtual std::optional<double> validation_metric(const ParamVector& /*x*/) const { return std::nullopt; }

 protected:
  void check_layout(const ParamVector& x) const {
    if (!(x.layout() == *layout())) throw LayoutMismatch("parameter layout does not match objective");
  }
};

// Closed, proper, lambda-strongly convex regularizer phi.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  // May be +infinity outside the domain.
  virtual double value(const ParamVector& x) const = 0;

  // argmin_y phi(y) + ||y - x||^2 / (2 alpha)
  virtual ParamVector prox(const ParamVector& x, double alpha) const = 0;

  virtual double strong_convexity() const = 0;

  virtual std::string name() const = 0;
};

// max{ f(x;s) + <g, y - x>, C(s) } with g the batch gradient at x.
inline double truncated_model_value(const StochasticObjective& objective, const ParamVector& x, const ParamVector& y,
                                    const Batch& batch) {
  x.require_same_layout(y);
  auto [fx, g] = objective.value_and_gradient(x, batch);
  const double linear = fx + g.dot(y - x);
  return std::max(linear, objective.lower_bound(batch));
}

// Same model from already evaluated quantities.
inline double truncated_model_value(double fval, double lower_bound, const ParamVector& g, const ParamVector& x,
                                    const ParamVector& y) {
  return std::max(fval + g.dot(y - x), lower_bound);
}

}  // namespace proxsps
