//
// Copyright 2026 The HTL Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef HTL_KERNEL_RIDGE_H_
#define HTL_KERNEL_RIDGE_H_

#include <string>

#include "htl/dataset.h"
#include "htl/predictor.h"

namespace htl {

enum class RkhsKind { kRbf, kLinear, kPolynomial };

// Positive semidefinite kernel defining the hypothesis space.
//   rbf          exp(-|x - y|^2 / (2 l^2))
//   linear       <x, y>
//   polynomial   (<x, y> + c)^degree, c >= 0
class RkhsKernel {
 public:
  static RkhsKernel Rbf(double lengthscale);
  static RkhsKernel Linear();
  static RkhsKernel Polynomial(int degree, double offset);

  double operator()(const Vector& x, const Vector& y) const;

  RkhsKind kind() const { return kind_; }
  double lengthscale() const { return lengthscale_; }
  int degree() const { return degree_; }
  double offset() const { return offset_; }
  std::string Describe() const;

  // sup K(x, x) over |x| <= x_bound. For rbf this is 1 regardless of the
  // bound; the other kinds need x_bound > 0.
  double DiagonalBound(double x_bound) const;

 private:
  RkhsKind kind_ = RkhsKind::kRbf;
  double lengthscale_ = 1.0;
  int degree_ = 1;
  double offset_ = 0.0;
};

// Entry (i, j) = K(A_i, B_j).
Matrix Gram(const RkhsKernel& kernel, const Matrix& a, const Matrix& b);

// Median pairwise Euclidean distance over the first min(n, 2000) rows; 1.0
// when fewer than two rows or all rows coincide.
double MedianHeuristic(const Matrix& features);

// f(x) = K(x, X) (K(X, X) + n lambda I)^(-1) Y.
class KrrPredictor : public Predictor {
 public:
  KrrPredictor(Matrix train_features, RkhsKernel kernel, double lambda, Vector coefficients,
               double k_bound, double jitter);

  double Predict(const Vector& x) const override;
  Index dim() const override { return train_features_.cols(); }
  std::string Describe() const override;
  // Constant k / (n lambda); nullopt when lambda == 0.
  std::optional<Vector> StabilityCoefficients(const Vector& x) const override;

  const Matrix& train_features() const { return train_features_; }
  const RkhsKernel& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  const Vector& coefficients() const { return coefficients_; }
  double k_bound() const { return k_bound_; }
  // Diagonal term added on top of n lambda to make the factorization succeed.
  double jitter() const { return jitter_; }

 private:
  Matrix train_features_;
  RkhsKernel kernel_;
  double lambda_;
  Vector coefficients_;
  double k_bound_;
  double jitter_;
};

// Solves (K + n lambda I + jitter I) coef = Y with a Cholesky factorization.
// jitter starts at 0 for lambda > 0 and at 1e-10 trace(K) / n for lambda == 0;
// on failure it is raised (to 1e-10 trace(K) / n first when it was 0) and
// multiplied by 10 up to three times before a kConditioning error.
//
// k_bound is 1 for rbf, DiagonalBound(train.x_bound()) when the dataset
// declares a bound, and max_i K(X_i, X_i) otherwise.
KrrPredictor KrrFit(const Dataset& train, const RkhsKernel& kernel, double lambda);

double KrrPredict(const KrrPredictor& p, const Vector& x);

// Every entry k / (n lambda).
Vector KrrStabilityCoeffs(const KrrPredictor& p);

// c * n^(-1 / (beta + p)), p in (0, 1).
double KrrLambdaRule(Index n, double beta, double p, double c = 1.0);

}  // namespace htl

#endif  // HTL_KERNEL_RIDGE_H_
