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

#include "htl/kernel_ridge.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "htl/error.h"

namespace htl {
namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr int kJitterRetries = 3;
constexpr Index kMedianHeuristicRows = 2000;

}  // namespace

RkhsKernel RkhsKernel::Rbf(double lengthscale) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw HtlError(ErrorCode::kInvalidArgument, "RkhsKernel::Rbf: lengthscale must be positive");
  }
  RkhsKernel k;
  k.kind_ = RkhsKind::kRbf;
  k.lengthscale_ = lengthscale;
  return k;
}

RkhsKernel RkhsKernel::Linear() {
  RkhsKernel k;
  k.kind_ = RkhsKind::kLinear;
  return k;
}

RkhsKernel RkhsKernel::Polynomial(int degree, double offset) {
  if (degree < 1 || !(offset >= 0.0)) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "RkhsKernel::Polynomial: degree must be >= 1 and offset >= 0");
  }
  RkhsKernel k;
  k.kind_ = RkhsKind::kPolynomial;
  k.degree_ = degree;
  k.offset_ = offset;
  return k;
}

double RkhsKernel::operator()(const Vector& x, const Vector& y) const {
  switch (kind_) {
    case RkhsKind::kRbf:
      return std::exp(-(x - y).squaredNorm() / (2.0 * lengthscale_ * lengthscale_));
    case RkhsKind::kLinear:
      return x.dot(y);
    case RkhsKind::kPolynomial:
      return std::pow(x.dot(y) + offset_, degree_);
  }
  return 0.0;
}

std::string RkhsKernel::Describe() const {
  std::ostringstream out;
  switch (kind_) {
    case RkhsKind::kRbf: out << "rbf(l=" << lengthscale_ << ")"; break;
    case RkhsKind::kLinear: out << "linear"; break;
    case RkhsKind::kPolynomial: out << "polynomial(deg=" << degree_ << ", c=" << offset_ << ")"; break;
  }
  return out.str();
}

double RkhsKernel::DiagonalBound(double x_bound) const {
  switch (kind_) {
    case RkhsKind::kRbf:
      return 1.0;
    case RkhsKind::kLinear:
      return x_bound * x_bound;
    case RkhsKind::kPolynomial:
      return std::pow(x_bound * x_bound + offset_, degree_);
  }
  return 0.0;
}

Matrix Gram(const RkhsKernel& kernel, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "Gram: feature dimensions differ (" + std::to_string(a.cols()) + " vs " +
                       std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows(), b.rows());
  switch (kernel.kind()) {
    case RkhsKind::kRbf: {
      const double scale = -1.0 / (2.0 * kernel.lengthscale() * kernel.lengthscale());
      for (Index j = 0; j < b.rows(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
          out(i, j) = std::exp(scale * (a.row(i) - b.row(j)).squaredNorm());
        }
      }
      break;
    }
    case RkhsKind::kLinear:
      out.noalias() = a * b.transpose();
      break;
    case RkhsKind::kPolynomial:
      out.noalias() = a * b.transpose();
      out = (out.array() + kernel.offset()).pow(kernel.degree()).matrix();
      break;
  }
  return out;
}

double MedianHeuristic(const Matrix& features) {
  const Index n = std::min(features.rows(), kMedianHeuristicRows);
  if (n < 2) return 1.0;
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      distances.push_back((features.row(i) - features.row(j)).norm());
    }
  }
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  double median = *mid;
  if (distances.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(distances.begin(), mid));
  }
  return median > 0.0 ? median : 1.0;
}

KrrPredictor::KrrPredictor(Matrix train_features, RkhsKernel kernel, double lambda,
                           Vector coefficients, double k_bound, double jitter)
    : train_features_(std::move(train_features)),
      kernel_(kernel),
      lambda_(lambda),
      coefficients_(std::move(coefficients)),
      k_bound_(k_bound),
      jitter_(jitter) {}

double KrrPredictor::Predict(const Vector& x) const {
  if (x.size() != dim()) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "KrrPredictor: query has dimension " + std::to_string(x.size()) +
                       ", training data " + std::to_string(dim()));
  }
  double sum = 0.0;
  for (Index i = 0; i < train_features_.rows(); ++i) {
    sum += kernel_(x, train_features_.row(i).transpose()) * coefficients_(i);
  }
  return sum;
}

std::string KrrPredictor::Describe() const {
  std::ostringstream out;
  out << "krr(kernel=" << kernel_.Describe() << ", lambda=" << lambda_ << ")";
  return out.str();
}

std::optional<Vector> KrrPredictor::StabilityCoefficients(const Vector&) const {
  if (!(lambda_ > 0.0)) return std::nullopt;
  return KrrStabilityCoeffs(*this);
}

KrrPredictor KrrFit(const Dataset& train, const RkhsKernel& kernel, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw HtlError(ErrorCode::kInvalidArgument, "KrrFit: lambda must be finite and >= 0");
  }
  const Index n = train.size();
  const Matrix& x = train.features();
  const Vector& y = train.labels();
  Matrix system = Gram(kernel, x, x);
  double k_bound;
  if (kernel.kind() == RkhsKind::kRbf) {
    k_bound = 1.0;
  } else if (train.x_bound() > 0.0) {
    k_bound = kernel.DiagonalBound(train.x_bound());
  } else {
    k_bound = system.diagonal().maxCoeff();
  }
  const double trace = system.trace();
  const double base_jitter = trace > 0.0 ? 1e-10 * trace / static_cast<double>(n) : 1e-10;
  system.diagonal().array() += static_cast<double>(n) * lambda;

  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    Matrix shifted = system;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Vector coef = llt.solve(y);
      const double residual = (shifted * coef - y).norm();
      if (coef.allFinite() && residual <= kResidualTolerance * y.norm()) {
        return KrrPredictor(x, kernel, lambda, std::move(coef), k_bound, jitter);
      }
    }
    if (attempt >= kJitterRetries) break;
    jitter = jitter == 0.0 ? base_jitter : 10.0 * jitter;
  }
  std::ostringstream msg;
  msg << "KrrFit: factorization failed for " << kernel.Describe() << ", lambda=" << lambda
      << " after jitter escalation to " << jitter;
  throw HtlError(ErrorCode::kConditioning, msg.str());
}

double KrrPredict(const KrrPredictor& p, const Vector& x) { return p.Predict(x); }

Vector KrrStabilityCoeffs(const KrrPredictor& p) {
  if (!(p.lambda() > 0.0)) {
    throw HtlError(ErrorCode::kUndefinedStability,
                   "KrrStabilityCoeffs: lambda = 0 gives no stability bound");
  }
  const auto n = p.train_features().rows();
  return Vector::Constant(n, p.k_bound() / (static_cast<double>(n) * p.lambda()));
}

double KrrLambdaRule(Index n, double beta, double p, double c) {
  if (!(p > 0.0 && p < 1.0)) {
    throw HtlError(ErrorCode::kDomain, "KrrLambdaRule: p must lie in (0, 1)");
  }
  if (!(beta > 0.0)) {
    throw HtlError(ErrorCode::kDomain, "KrrLambdaRule: beta must be positive");
  }
  if (n < 1) throw HtlError(ErrorCode::kInvalidArgument, "KrrLambdaRule: n must be positive");
  return c * std::pow(static_cast<double>(n), -1.0 / (beta + p));
}

}  // namespace htl
