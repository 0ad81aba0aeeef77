#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "proxsps/core.hpp"
#include "proxsps/problems/dataset.hpp"

namespace proxsps::problems {

namespace detail {

inline Eigen::Map<const Vector> as_vector(const ParamVector& x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline ParamVector from_vector(const std::shared_ptr<const Layout>& layout, const Vector& v) {
  return ParamVector(layout, std::vector<double>(v.data(), v.data() + v.size()));
}

// Eigenvalue range of A^T A / N.
inline std::pair<double, double> gram_spectrum(const Matrix& A) {
  const Eigen::MatrixXd gram = A.transpose() * A / static_cast<double>(A.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return {std::max(eig.eigenvalues().minCoeff(), 0.0), eig.eigenvalues().maxCoeff()};
}

}  // namespace detail

struct RidgeConfig {
  int N = 80;
  int n = 100;
  std::vector<double> lambda_grid;
  std::uint64_t seed = 0;
  double noise = 0.0;  // std of additive target noise

  void validate() const {
    if (N < 1 || n < 1) throw std::invalid_argument("ridge: N and n must be >= 1");
    if (!(noise >= 0.0)) throw std::invalid_argument("ridge: noise must be >= 0");
    for (double l : lambda_grid) {
      if (!(l >= 0.0)) throw std::invalid_argument("ridge: lambda grid values must be >= 0");
    }
  }
};

struct RidgeData {
  Matrix A;      // N x n, rows a_i
  Vector b;      // N
  Vector x_hat;  // generating coefficients
};

// A standard normal, x_hat uniform on [0, 1], b = A x_hat (+ noise).
inline RidgeData gen_ridge(const RidgeConfig& cfg) {
  cfg.validate();
  RngStream rng = RngStream::derived(cfg.seed, 11);
  RidgeData d;
  d.A = standard_normal(cfg.N, cfg.n, rng);
  d.x_hat = uniform(cfg.n, 1, 0.0, 1.0, rng).col(0);
  d.b = d.A * d.x_hat;
  if (cfg.noise > 0.0) {
    for (Eigen::Index i = 0; i < d.b.size(); ++i) d.b(i) += cfg.noise * rng.normal();
  }
  return d;
}

// f_i(x) = (1/2)(a_i^T x - b_i)^2
class RidgeObjective final : public StochasticObjective {
 public:
  RidgeObjective(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size()) throw std::invalid_argument("ridge: A and b differ in row count");
    layout_ = Layout::flat(static_cast<std::size_t>(A_.cols()));
    std::tie(mu_, L_) = detail::gram_spectrum(A_);
    L_max_ = A_.rowwise().squaredNorm().maxCoeff();
  }

  std::size_t dataset_size() const override { return static_cast<std::size_t>(A_.rows()); }
  std::shared_ptr<const Layout> layout() const override { return layout_; }

  double value(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const auto xv = detail::as_vector(x);
    double acc = 0.0;
    for (std::size_t i : batch.indices) {
      const double r = A_.row(static_cast<Eigen::Index>(i)).dot(xv) - b_(static_cast<Eigen::Index>(i));
      acc += 0.5 * r * r;
    }
    return acc / static_cast<double>(batch.size());
  }

  ParamVector gradient(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).second;
  }

  std::pair<double, ParamVector> value_and_gradient(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const auto xv = detail::as_vector(x);
    Vector g = Vector::Zero(A_.cols());
    double acc = 0.0;
    for (std::size_t i : batch.indices) {
      const auto row = static_cast<Eigen::Index>(i);
      const double r = A_.row(row).dot(xv) - b_(row);
      acc += 0.5 * r * r;
      g.noalias() += r * A_.row(row).transpose();
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    return {acc * inv, detail::from_vector(layout_, g * inv)};
  }

  double full_value(const ParamVector& x) const override {
    check_layout(x);
    return 0.5 * (A_ * detail::as_vector(x) - b_).squaredNorm() / static_cast<double>(A_.rows());
  }

  ParamVector full_gradient(const ParamVector& x) const override {
    check_layout(x);
    const Vector g = A_.transpose() * (A_ * detail::as_vector(x) - b_) / static_cast<double>(A_.rows());
    return detail::from_vector(layout_, g);
  }

  std::optional<double> smoothness_constant() const override { return L_; }
  double strong_convexity() const { return mu_; }
  // max_i ||a_i||^2, the smoothness constant of the worst single sample.
  double max_sample_smoothness() const { return L_max_; }

  // argmin f(x) + (lambda/2)||x||^2; the minimum-norm least squares solution when lambda = 0.
  ParamVector solve_regularized(double lambda) const {
    const double N = static_cast<double>(A_.rows());
    Vector x;
    if (lambda == 0.0) {
      x = A_.completeOrthogonalDecomposition().solve(b_);
    } else if (A_.rows() >= A_.cols()) {
      Eigen::MatrixXd H = A_.transpose() * A_ / N;
      H.diagonal().array() += lambda;
      x = H.ldlt().solve(A_.transpose() * b_ / N);
    } else {
      Eigen::MatrixXd K = A_ * A_.transpose();
      K.diagonal().array() += N * lambda;
      x = A_.transpose() * K.ldlt().solve(b_);
    }
    return detail::from_vector(layout_, x);
  }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  Matrix A_;
  Vector b_;
  std::shared_ptr<const Layout> layout_;
  double mu_ = 0.0;
  double L_ = 0.0;
  double L_max_ = 0.0;
};

struct LogRegData {
  Matrix A;
  Vector labels;  // +-1
  Vector w_true;
};

// Labels from a random hyperplane with a fraction of them flipped.
inline LogRegData gen_logreg(int N, int n, std::uint64_t seed, double flip_prob = 0.1) {
  if (N < 1 || n < 1) throw std::invalid_argument("logreg: N and n must be >= 1");
  RngStream rng = RngStream::derived(seed, 21);
  LogRegData d;
  d.A = standard_normal(N, n, rng);
  d.w_true = standard_normal(n, 1, rng).col(0);
  d.labels.resize(N);
  for (int i = 0; i < N; ++i) {
    double label = d.A.row(i).dot(d.w_true) >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < flip_prob) label = -label;
    d.labels(i) = label;
  }
  return d;
}

// f_i(x) = log(1 + exp(-l_i a_i^T x))
class LogisticObjective final : public StochasticObjective {
 public:
  LogisticObjective(Matrix A, Vector labels) : A_(std::move(A)), labels_(std::move(labels)) {
    if (A_.rows() != labels_.size()) throw std::invalid_argument("logreg: A and labels differ in row count");
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
      if (labels_(i) != 1.0 && labels_(i) != -1.0) throw std::invalid_argument("logreg: labels must be +-1");
    }
    layout_ = Layout::flat(static_cast<std::size_t>(A_.cols()));
    L_ = detail::gram_spectrum(A_).second / 4.0;
  }

  std::size_t dataset_size() const override { return static_cast<std::size_t>(A_.rows()); }
  std::shared_ptr<const Layout> layout() const override { return layout_; }

  double value(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).first;
  }

  ParamVector gradient(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).second;
  }

  std::pair<double, ParamVector> value_and_gradient(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const auto xv = detail::as_vector(x);
    Vector g = Vector::Zero(A_.cols());
    double acc = 0.0;
    for (std::size_t i : batch.indices) {
      const auto row = static_cast<Eigen::Index>(i);
      const double margin = labels_(row) * A_.row(row).dot(xv);
      acc += softplus(-margin);
      // d/dx log(1 + exp(-m)) = -l a sigmoid(-m)
      g.noalias() -= labels_(row) * sigmoid(-margin) * A_.row(row).transpose();
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    return {acc * inv, detail::from_vector(layout_, g * inv)};
  }

  std::optional<double> smoothness_constant() const override { return L_; }

  static double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
  static double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

 private:
  Matrix A_;
  Vector labels_;
  std::shared_ptr<const Layout> layout_;
  double L_ = 0.0;
};

// f_i(x) = (1/2)(x - c_i)^T H_i (x - c_i) + m_i with H_i positive definite.
// lower_bound(batch) is the exact infimum of the batch mean.
class QuadraticObjective final : public StochasticObjective {
 public:
  QuadraticObjective(std::vector<Eigen::MatrixXd> hessians, std::vector<Vector> centers, std::vector<double> offsets)
      : H_(std::move(hessians)), c_(std::move(centers)), m_(std::move(offsets)) {
    if (H_.empty() || H_.size() != c_.size() || H_.size() != m_.size()) {
      throw std::invalid_argument("quadratic: need matching, nonempty hessians, centers and offsets");
    }
    const auto n = c_.front().size();
    layout_ = Layout::flat(static_cast<std::size_t>(n));
    for (const auto& H : H_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("quadratic: hessians must be PD");
      L_max_ = std::max(L_max_, eig.eigenvalues().maxCoeff());
    }
  }

  // H_i = M M^T / n + shift I with M standard normal; centers N(0, I); offsets U[0, 1].
  static QuadraticObjective random(int N, int n, std::uint64_t seed, double shift = 0.1) {
    RngStream rng = RngStream::derived(seed, 31);
    std::vector<Eigen::MatrixXd> H;
    std::vector<Vector> c;
    std::vector<double> m;
    for (int i = 0; i < N; ++i) {
      const Eigen::MatrixXd M = standard_normal(n, n, rng);
      Eigen::MatrixXd h = M * M.transpose() / static_cast<double>(n);
      h.diagonal().array() += shift;
      H.push_back(std::move(h));
      c.push_back(standard_normal(n, 1, rng).col(0));
      m.push_back(rng.uniform());
    }
    return QuadraticObjective(std::move(H), std::move(c), std::move(m));
  }

  std::size_t dataset_size() const override { return H_.size(); }
  std::shared_ptr<const Layout> layout() const override { return layout_; }

  double value(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).first;
  }
  ParamVector gradient(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).second;
  }

  std::pair<double, ParamVector> value_and_gradient(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const auto xv = detail::as_vector(x);
    Vector g = Vector::Zero(xv.size());
    double acc = 0.0;
    for (std::size_t i : batch.indices) {
      const Vector d = xv - c_[i];
      const Vector Hd = H_[i] * d;
      acc += 0.5 * d.dot(Hd) + m_[i];
      g += Hd;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    return {acc * inv, detail::from_vector(layout_, g * inv)};
  }

  double lower_bound(const Batch& batch) const override {
    batch.validate(dataset_size());
    const auto n = c_.front().size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    Vector h = Vector::Zero(n);
    for (std::size_t i : batch.indices) {
      H += H_[i];
      h += H_[i] * c_[i];
    }
    const Vector x_min = H.ldlt().solve(h);
    return value(detail::from_vector(layout_, x_min), batch);
  }

  // Largest eigenvalue over all per-sample hessians.
  double max_sample_smoothness() const { return L_max_; }

 private:
  std::vector<Eigen::MatrixXd> H_;
  std::vector<Vector> c_;
  std::vector<double> m_;
  std::shared_ptr<const Layout> layout_;
  double L_max_ = 0.0;
};

}  // namespace proxsps::problems
