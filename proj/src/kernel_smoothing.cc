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

#include "htl/kernel_smoothing.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "htl/error.h"

namespace htl {
namespace {

// exp(-u^2 / 2) underflows to exactly 0 for u > 38.6.
constexpr double kGaussianZeroRadius = 39.0;

}  // namespace

const char* KernelShapeName(KernelShape shape) {
  switch (shape) {
    case KernelShape::kBoxcar: return "boxcar";
    case KernelShape::kEpanechnikov: return "epanechnikov";
    case KernelShape::kTruncatedGaussian: return "truncated_gaussian";
    case KernelShape::kGaussian: return "gaussian";
  }
  return "unknown";
}

KernelShape ParseKernelShape(const std::string& name) {
  for (auto shape : {KernelShape::kBoxcar, KernelShape::kEpanechnikov,
                     KernelShape::kTruncatedGaussian, KernelShape::kGaussian}) {
    if (name == KernelShapeName(shape)) return shape;
  }
  throw HtlError(ErrorCode::kConfig, "unknown smoothing kernel '" + name + "'");
}

double SmoothingKernel::operator()(double u) const {
  switch (shape_) {
    case KernelShape::kBoxcar:
      return u <= 1.0 ? 1.0 : 0.0;
    case KernelShape::kEpanechnikov:
      return u <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelShape::kTruncatedGaussian:
      return u <= 1.0 ? std::exp(-0.5 * u * u) : 0.0;
    case KernelShape::kGaussian:
      return std::exp(-0.5 * u * u);
  }
  return 0.0;
}

double SmoothingKernel::SupportRadius() const {
  return shape_ == KernelShape::kGaussian ? kGaussianZeroRadius : 1.0;
}

KsPredictor::KsPredictor(Dataset train, SmoothingKernel kernel, double bandwidth)
    : train_(std::move(train)), kernel_(kernel), bandwidth_(bandwidth) {
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
    throw HtlError(ErrorCode::kInvalidArgument, "KsPredictor: bandwidth must be positive");
  }
  const Index n = train_.size();
  const Index d = train_.dim();
  rows_.resize(static_cast<std::size_t>(n * d));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) rows_[static_cast<std::size_t>(i * d + j)] = train_.features()(i, j);
  }
  if (d == 1) {
    sorted_index_.resize(static_cast<std::size_t>(n));
    std::iota(sorted_index_.begin(), sorted_index_.end(), Index{0});
    const Matrix& f = train_.features();
    std::stable_sort(sorted_index_.begin(), sorted_index_.end(),
                     [&f](Index a, Index b) { return f(a, 0) < f(b, 0); });
    sorted_x_.reserve(static_cast<std::size_t>(n));
    sorted_y_.reserve(static_cast<std::size_t>(n));
    for (Index i : sorted_index_) {
      sorted_x_.push_back(f(i, 0));
      sorted_y_.push_back(train_.labels()(i));
    }
  }
}

void KsPredictor::CheckDim(const Vector& x) const {
  if (x.size() != dim()) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "KsPredictor: query has dimension " + std::to_string(x.size()) +
                       ", training data " + std::to_string(dim()));
  }
}

Index KsPredictor::NearestIndex(const Vector& x) const {
  const Index n = train_.size();
  const Index d = dim();
  Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double* row = &rows_[static_cast<std::size_t>(i * d)];
    double sq = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double diff = x(j) - row[j];
      sq += diff * diff;
    }
    if (sq < best_dist) {
      best_dist = sq;
      best = i;
    }
  }
  return best;
}

Vector KsPredictor::Weights(const Vector& x) const {
  CheckDim(x);
  const Index n = train_.size();
  const Index d = dim();
  Vector w(n);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double* row = &rows_[static_cast<std::size_t>(i * d)];
    double sq = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double diff = x(j) - row[j];
      sq += diff * diff;
    }
    w(i) = kernel_(std::sqrt(sq) / bandwidth_);
    total += w(i);
  }
  if (total > 0.0) {
    w /= total;
  } else {
    w.setZero();
    w(NearestIndex(x)) = 1.0;
  }
  return w;
}

double KsPredictor::PredictSorted(double x) const {
  const double reach = kernel_.SupportRadius() * bandwidth_ * (1.0 + 1e-9);
  const auto begin = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), x - reach);
  const auto end = std::upper_bound(begin, sorted_x_.end(), x + reach);
  double weighted = 0.0;
  double total = 0.0;
  double reference = 0.0;
  for (auto it = begin; it != end; ++it) {
    const auto k = static_cast<std::size_t>(it - sorted_x_.begin());
    const double kx = kernel_(std::abs(x - *it) / bandwidth_);
    if (kx <= 0.0) continue;
    if (total == 0.0) reference = sorted_y_[k];
    weighted += kx * (sorted_y_[k] - reference);
    total += kx;
  }
  if (total > 0.0) return reference + weighted / total;

  // Nearest neighbour: the closest values sit on either side of x in sorted
  // order; among all points at that distance take the lowest original index.
  const auto pos = static_cast<std::ptrdiff_t>(
      std::lower_bound(sorted_x_.begin(), sorted_x_.end(), x) - sorted_x_.begin());
  const auto size = static_cast<std::ptrdiff_t>(sorted_x_.size());
  double best = std::numeric_limits<double>::infinity();
  if (pos < size) best = std::min(best, std::abs(x - sorted_x_[pos]));
  if (pos > 0) best = std::min(best, std::abs(x - sorted_x_[pos - 1]));
  Index winner = std::numeric_limits<Index>::max();
  double label = 0.0;
  const auto consider = [&](std::ptrdiff_t k) {
    if (sorted_index_[k] < winner) {
      winner = sorted_index_[k];
      label = sorted_y_[k];
    }
  };
  for (auto k = pos - 1; k >= 0 && std::abs(x - sorted_x_[k]) == best; --k) consider(k);
  for (auto k = pos; k < size && std::abs(x - sorted_x_[k]) == best; ++k) consider(k);
  return label;
}

double KsPredictor::Predict(const Vector& x) const {
  CheckDim(x);
  if (!sorted_x_.empty()) return PredictSorted(x(0));
  const Index n = train_.size();
  const Index d = dim();
  double weighted = 0.0;
  double total = 0.0;
  double reference = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double* row = &rows_[static_cast<std::size_t>(i * d)];
    double sq = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double diff = x(j) - row[j];
      sq += diff * diff;
    }
    const double k = kernel_(std::sqrt(sq) / bandwidth_);
    if (k <= 0.0) continue;
    if (total == 0.0) reference = train_.labels()(i);
    weighted += k * (train_.labels()(i) - reference);
    total += k;
  }
  // Accumulated relative to the first contributing label.
  if (total > 0.0) return reference + weighted / total;
  return train_.labels()(NearestIndex(x));
}

std::string KsPredictor::Describe() const {
  std::ostringstream out;
  out << "ks(kernel=" << KernelShapeName(kernel_.shape()) << ", h=" << bandwidth_ << ")";
  return out.str();
}

std::optional<Vector> KsPredictor::StabilityCoefficients(const Vector& x) const {
  return Weights(x);
}

Vector KsWeights(const KsPredictor& p, const Vector& x) { return p.Weights(x); }

double KsPredict(const KsPredictor& p, const Vector& x) { return p.Predict(x); }

double KsBandwidthRule(Index n, Index d, double alpha, double c) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw HtlError(ErrorCode::kDomain, "KsBandwidthRule: alpha must lie in (0, 1]");
  }
  if (n < 1 || d < 1) {
    throw HtlError(ErrorCode::kInvalidArgument, "KsBandwidthRule: n and d must be positive");
  }
  if (!(c > 0.0)) {
    throw HtlError(ErrorCode::kInvalidArgument, "KsBandwidthRule: constant must be positive");
  }
  return c * std::pow(static_cast<double>(n), -1.0 / (2.0 * alpha + static_cast<double>(d)));
}

}  // namespace htl
