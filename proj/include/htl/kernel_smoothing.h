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

#ifndef HTL_KERNEL_SMOOTHING_H_
#define HTL_KERNEL_SMOOTHING_H_

#include <string>
#include <vector>

#include "htl/dataset.h"
#include "htl/predictor.h"

namespace htl {

enum class KernelShape { kBoxcar, kEpanechnikov, kTruncatedGaussian, kGaussian };

const char* KernelShapeName(KernelShape shape);
KernelShape ParseKernelShape(const std::string& name);

// Radial profile K(u), u >= 0. Every shape is positive on [0, 1), maximal at
// 0 and nonincreasing; all but kGaussian vanish for u > 1.
//   boxcar               1{u <= 1}
//   epanechnikov         0.75 (1 - u^2) 1{u <= 1}
//   truncated_gaussian   exp(-u^2 / 2) 1{u <= 1}
//   gaussian             exp(-u^2 / 2)
class SmoothingKernel {
 public:
  explicit SmoothingKernel(KernelShape shape = KernelShape::kTruncatedGaussian)
      : shape_(shape) {}

  double operator()(double u) const;
  KernelShape shape() const { return shape_; }
  // K(u) == 0 exactly for every u beyond this radius.
  double SupportRadius() const;

 private:
  KernelShape shape_;
};

// Nadaraya-Watson estimator
//
//   f(x) = sum_i w_i(x) Y_i,   w_i(x) = K(|x - X_i| / h) / sum_j K(|x - X_j| / h).
//
// When every kernel value at x is zero the weights fall back to the one-hot
// vector on the nearest training point (lowest index on ties), so the
// prediction is always a convex combination of the training labels.
class KsPredictor : public Predictor {
 public:
  KsPredictor(Dataset train, SmoothingKernel kernel, double bandwidth);

  double Predict(const Vector& x) const override;
  Index dim() const override { return train_.dim(); }
  std::string Describe() const override;
  // The weights w_i(x): the estimator is linear in the labels with these
  // coefficients.
  std::optional<Vector> StabilityCoefficients(const Vector& x) const override;

  Vector Weights(const Vector& x) const;

  const Dataset& train() const { return train_; }
  const SmoothingKernel& kernel() const { return kernel_; }
  double bandwidth() const { return bandwidth_; }

 private:
  void CheckDim(const Vector& x) const;
  Index NearestIndex(const Vector& x) const;
  double PredictSorted(double x) const;

  Dataset train_;
  SmoothingKernel kernel_;
  double bandwidth_;
  // Row-major copy of the features for cache-friendly distance loops.
  std::vector<double> rows_;
  // d == 1 only: training points sorted by (x, index), for windowed sums.
  std::vector<double> sorted_x_;
  std::vector<double> sorted_y_;
  std::vector<Index> sorted_index_;
};

Vector KsWeights(const KsPredictor& p, const Vector& x);
double KsPredict(const KsPredictor& p, const Vector& x);

// c * n^(-1 / (2 alpha + d)), the bandwidth order for a (lambda, alpha)
// Holder regression function in dimension d.
double KsBandwidthRule(Index n, Index d, double alpha, double c = 1.0);

}  // namespace htl

#endif  // HTL_KERNEL_SMOOTHING_H_
