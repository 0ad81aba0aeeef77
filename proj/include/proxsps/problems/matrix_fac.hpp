#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "proxsps/core.hpp"
#include "proxsps/problems/dataset.hpp"

namespace proxsps::problems {

struct MatrixFacConfig {
  int p = 6;
  int q = 10;
  int N = 1000;
  double upsilon = 1e-5;  // smallest diagonal scale of D
  int r = 4;
  double epsilon = 0.0;  // multiplicative noise half-width
  std::uint64_t seed = 0;

  void validate() const {
    if (p < 1 || q < 1 || N < 1 || r < 1) throw std::invalid_argument("matrix_fac: p, q, N, r must be >= 1");
    if (!(upsilon > 0.0 && upsilon <= 1.0)) throw std::invalid_argument("matrix_fac: upsilon must be in (0, 1]");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("matrix_fac: epsilon must be >= 0");
  }

  static MatrixFacConfig matrix_fac1(std::uint64_t seed = 0) { return {6, 10, 1000, 1e-5, 4, 0.0, seed}; }
  static MatrixFacConfig matrix_fac2(std::uint64_t seed = 0) { return {6, 10, 1000, 1e-5, 10, 0.05, seed}; }
};

struct MatrixFacData {
  Dataset dataset;
  Matrix A;        // q x p, noise free
  Matrix A_noisy;  // A .* (1 + E)
  Vector scales;   // diagonal of D
};

// Diagonal entries from 1 down to upsilon, equidistant in log scale.
inline Vector log_spaced_scales(int q, double upsilon) {
  Vector d(q);
  for (int i = 0; i < q; ++i) {
    d(i) = q == 1 ? 1.0 : std::pow(upsilon, static_cast<double>(i) / static_cast<double>(q - 1));
  }
  return d;
}

// Fresh inputs y ~ N(0, I) with targets A y; rows are samples.
inline void sample_pairs(const Matrix& A, int count, RngStream& rng, Matrix& inputs, Matrix& targets) {
  inputs = standard_normal(count, A.cols(), rng);
  targets = inputs * A.transpose();
}

inline MatrixFacData gen_matrix_fac(const MatrixFacConfig& cfg) {
  cfg.validate();
  RngStream matrix_rng = RngStream::derived(cfg.seed, 1);
  RngStream train_rng = RngStream::derived(cfg.seed, 2);
  RngStream val_rng = RngStream::derived(cfg.seed, 3);

  MatrixFacData out;
  const Matrix B = uniform(cfg.q, cfg.p, 0.0, 1.0, matrix_rng);
  out.scales = log_spaced_scales(cfg.q, cfg.upsilon);
  out.A = out.scales.asDiagonal() * B;
  const Matrix E = uniform(cfg.q, cfg.p, -cfg.epsilon, cfg.epsilon, matrix_rng);
  out.A_noisy = out.A.cwiseProduct((Matrix::Ones(cfg.q, cfg.p) + E));

  sample_pairs(out.A_noisy, cfg.N, train_rng, out.dataset.inputs, out.dataset.targets);
  sample_pairs(out.A, cfg.N, val_rng, out.dataset.validation_inputs, out.dataset.validation_targets);
  return out;
}

// Replaces the validation set with fresh samples drawn from the noise-free A.
inline void resample_validation(MatrixFacData& data, RngStream& rng) {
  sample_pairs(data.A, static_cast<int>(data.dataset.size()), rng, data.dataset.validation_inputs,
               data.dataset.validation_targets);
}

// f_i(W1, W2) = ||W2 W1 y_i - b_i||^2, W1 is r x p and W2 is q x r (row major).
class MatrixFactorizationObjective final : public StochasticObjective {
 public:
  MatrixFactorizationObjective(Dataset dataset, int r) : data_(std::move(dataset)), r_(r) {
    if (r < 1) throw std::invalid_argument("matrix factorization rank must be >= 1");
    data_.validate();
    p_ = static_cast<int>(data_.inputs.cols());
    q_ = static_cast<int>(data_.targets.cols());
    layout_ = std::make_shared<const Layout>(std::vector<std::pair<std::string, std::size_t>>{
        {"W1", static_cast<std::size_t>(r_ * p_)}, {"W2", static_cast<std::size_t>(q_ * r_)}});
  }

  std::size_t dataset_size() const override { return data_.size(); }
  std::shared_ptr<const Layout> layout() const override { return layout_; }
  int rank() const { return r_; }
  const Dataset& dataset() const { return data_; }

  double value(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const Matrix M = product(x);
    double acc = 0.0;
    for (std::size_t i : batch.indices) acc += residual(M, i).squaredNorm();
    return acc / static_cast<double>(batch.size());
  }

  ParamVector gradient(const ParamVector& x, const Batch& batch) const override {
    return value_and_gradient(x, batch).second;
  }

  std::pair<double, ParamVector> value_and_gradient(const ParamVector& x, const Batch& batch) const override {
    check_layout(x);
    batch.validate(dataset_size());
    const Matrix M = product(x);
    Matrix grad_M = Matrix::Zero(q_, p_);
    double acc = 0.0;
    for (std::size_t i : batch.indices) {
      const Vector e = residual(M, i);
      acc += e.squaredNorm();
      grad_M.noalias() += e * data_.inputs.row(static_cast<Eigen::Index>(i));
    }
    const double scale = 2.0 / static_cast<double>(batch.size());
    grad_M *= scale;

    ParamVector g(layout_);
    w1(g) = w2(x).transpose() * grad_M;
    w2(g) = grad_M * w1(x).transpose();
    return {acc / static_cast<double>(batch.size()), std::move(g)};
  }

  // (1/N_val) sum ||W2 W1 y - b_val||^2
  std::optional<double> validation_metric(const ParamVector& x) const override {
    check_layout(x);
    if (data_.validation_inputs.rows() == 0) return std::nullopt;
    const Matrix M = product(x);
    const Matrix diff = data_.validation_inputs * M.transpose() - data_.validation_targets;
    return diff.squaredNorm() / static_cast<double>(data_.validation_inputs.rows());
  }

  double full_value(const ParamVector& x) const override {
    check_layout(x);
    const Matrix M = product(x);
    const Matrix diff = data_.inputs * M.transpose() - data_.targets;
    return diff.squaredNorm() / static_cast<double>(data_.inputs.rows());
  }

  // Entries i.i.d. N(0, 1) / sqrt(r).
  ParamVector initial_point(std::uint64_t seed) const {
    RngStream rng = RngStream::derived(seed, 4);
    ParamVector x(layout_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(r_));
    for (double& v : x.values()) v = scale * rng.normal();
    return x;
  }

  using ConstMap = Eigen::Map<const Matrix>;
  using MutMap = Eigen::Map<Matrix>;

  ConstMap w1(const ParamVector& x) const { return ConstMap(x.segment("W1").data(), r_, p_); }
  ConstMap w2(const ParamVector& x) const { return ConstMap(x.segment("W2").data(), q_, r_); }
  MutMap w1(ParamVector& x) const { return MutMap(x.segment("W1").data(), r_, p_); }
  MutMap w2(ParamVector& x) const { return MutMap(x.segment("W2").data(), q_, r_); }

  Matrix product(const ParamVector& x) const { return w2(x) * w1(x); }

 private:
  Vector residual(const Matrix& M, std::size_t i) const {
    const auto row = static_cast<Eigen::Index>(i);
    return M * data_.inputs.row(row).transpose() - data_.targets.row(row).transpose();
  }

  Dataset data_;
  int r_;
  int p_ = 0;
  int q_ = 0;
  std::shared_ptr<const Layout> layout_;
};

}  // namespace proxsps::problems
