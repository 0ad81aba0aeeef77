#pragma once

#include <stdexcept>

#include "proxsps/problems/linear_models.hpp"

namespace proxsps::problems {

// Minimizer of l_i(z) = (1/2)(a^T z - b)^2 + (lambda/2)||z||^2, i.e.
// (a a^T + lambda I)^{-1} a b, which by Sherman-Morrison is a b / (||a||^2 + lambda).
inline Vector sample_minimizer(const Vector& a, double b, double lambda) {
  const double s = a.squaredNorm() + lambda;
  if (s == 0.0) return Vector::Zero(a.size());
  return a * (b / s);
}

// Interpolation constant of the regularized losses l_i = f_i + (lambda/2)||.||^2:
//   sigma^2 = min_x (f(x) + (lambda/2)||x||^2) - (1/N) sum_i inf_z l_i(z).
inline double sigma2(const Matrix& A, const Vector& b, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("sigma2: lambda must be >= 0");
  const RidgeObjective ridge(A, b);
  const ParamVector x = ridge.solve_regularized(lambda);
  const double reg_min = ridge.full_value(x) + 0.5 * lambda * x.squared_norm();

  double mean_inf = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Vector a = A.row(i).transpose();
    const Vector z = sample_minimizer(a, b(i), lambda);
    const double r = a.dot(z) - b(i);
    mean_inf += 0.5 * r * r + 0.5 * lambda * z.squaredNorm();
  }
  mean_inf /= static_cast<double>(A.rows());
  return reg_min - mean_inf;
}

}  // namespace proxsps::problems
