#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "proxsps/core.hpp"

namespace proxsps {

// phi(x) = (lambda / 2) ||x||^2
class L2Regularizer final : public Regularizer {
 public:
  explicit L2Regularizer(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l2 regularizer needs lambda >= 0");
  }

  double value(const ParamVector& x) const override { return 0.5 * lambda_ * x.squared_norm(); }

  ParamVector prox(const ParamVector& x, double alpha) const override {
    if (!(alpha > 0.0)) throw std::invalid_argument("prox step must be positive");
    return x / (1.0 + alpha * lambda_);
  }

  double strong_convexity() const override { return lambda_; }
  double lambda() const { return lambda_; }
  std::string name() const override { return "l2"; }

 private:
  double lambda_;
};

class ZeroRegularizer final : public Regularizer {
 public:
  double value(const ParamVector&) const override { return 0.0; }
  ParamVector prox(const ParamVector& x, double alpha) const override {
    if (!(alpha > 0.0)) throw std::invalid_argument("prox step must be positive");
    return x;
  }
  double strong_convexity() const override { return 0.0; }
  std::string name() const override { return "zero"; }
};

// Indicator of the box [lo, hi]^n; lo may be -inf and hi +inf.
class BoxRegularizer final : public Regularizer {
 public:
  BoxRegularizer(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) throw std::invalid_argument("box regularizer needs lo <= hi");
  }

  double value(const ParamVector& x) const override {
    for (double v : x.values()) {
      if (v < lo_ || v > hi_) return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  ParamVector prox(const ParamVector& x, double alpha) const override {
    if (!(alpha > 0.0)) throw std::invalid_argument("prox step must be positive");
    ParamVector y = x;
    for (double& v : y.values()) v = std::clamp(v, lo_, hi_);
    return y;
  }

  double strong_convexity() const override { return 0.0; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::string name() const override { return "box"; }

 private:
  double lo_;
  double hi_;
};

}  // namespace proxsps
