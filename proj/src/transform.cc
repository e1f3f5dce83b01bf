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

#include "htl/transform.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "htl/error.h"

namespace htl {
namespace {

std::string FormatReal(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

void RequireFinite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw HtlError(ErrorCode::kInvalidArgument, std::string(what) + " must be finite");
  }
}

}  // namespace

const char* TransformFamilyName(TransformFamily family) {
  switch (family) {
    case TransformFamily::kOffset: return "offset";
    case TransformFamily::kScale: return "scale";
    case TransformFamily::kNonTransfer: return "non_transfer";
    case TransformFamily::kLogLinear: return "loglinear";
  }
  return "unknown";
}

TransformationFunction::TransformationFunction(TransformFamily family, double parameter,
                                               double lipschitz, double guard)
    : family_(family), parameter_(parameter), lipschitz_(lipschitz), singular_guard_(guard) {}

// Default Lipschitz constants are taken on the unit box |a|, |b|, |y| <= 1.
TransformationFunction TransformationFunction::Offset(double alpha) {
  RequireFinite(alpha, "offset alpha");
  return TransformationFunction(TransformFamily::kOffset, alpha, std::hypot(1.0, alpha), 0.0);
}

TransformationFunction TransformationFunction::Scale(double alpha, double guard) {
  RequireFinite(alpha, "scale alpha");
  if (!(guard > 0.0)) {
    throw HtlError(ErrorCode::kConfig, "scale transformation: singular guard must be positive");
  }
  const double g_lipschitz = std::hypot(1.0, 1.0 + std::abs(alpha));
  const double h_lipschitz = 1.0 / (guard * guard);
  return TransformationFunction(TransformFamily::kScale, alpha,
                                std::max(g_lipschitz, h_lipschitz), guard);
}

TransformationFunction TransformationFunction::NonTransfer() {
  return TransformationFunction(TransformFamily::kNonTransfer, 0.0, 1.0, 0.0);
}

TransformationFunction TransformationFunction::LogLinear(double beta) {
  RequireFinite(beta, "loglinear beta");
  if (beta == 0.0) {
    throw HtlError(ErrorCode::kConfig, "loglinear transformation: beta must be nonzero");
  }
  // ln(b) has no global Lipschitz constant.
  return TransformationFunction(TransformFamily::kLogLinear, beta, kUnbounded, 0.0);
}

TransformationFunction TransformationFunction::WithBounds(double lipschitz,
                                                          double aux_bound) const {
  if (!(lipschitz > 0.0) || !(aux_bound > 0.0)) {
    throw HtlError(ErrorCode::kConfig, Name() + ": lipschitz_L and aux_bound_B must be positive");
  }
  TransformationFunction copy = *this;
  copy.lipschitz_ = lipschitz;
  copy.aux_bound_ = aux_bound;
  return copy;
}

double TransformationFunction::TransferStrength() const {
  switch (family_) {
    case TransformFamily::kNonTransfer: return 0.0;
    case TransformFamily::kOffset: return std::abs(parameter_);
    default: return kUnbounded;
  }
}

std::string TransformationFunction::Name() const {
  switch (family_) {
    case TransformFamily::kOffset: return "offset(alpha=" + FormatReal(parameter_) + ")";
    case TransformFamily::kScale: return "scale(alpha=" + FormatReal(parameter_) + ")";
    case TransformFamily::kNonTransfer: return "non_transfer";
    case TransformFamily::kLogLinear: return "loglinear(beta=" + FormatReal(parameter_) + ")";
  }
  return "unknown";
}

double EvalG(const TransformationFunction& tf, double a, double b) {
  switch (tf.family()) {
    case TransformFamily::kOffset:
      return tf.parameter() * a + b;
    case TransformFamily::kScale:
      return (a + tf.parameter()) * b;
    case TransformFamily::kNonTransfer:
      return b;
    case TransformFamily::kLogLinear:
      if (!(b > 0.0)) {
        throw HtlError(ErrorCode::kDomain,
                       "loglinear G: b = " + FormatReal(b) + " must be positive");
      }
      return tf.parameter() * a * std::log(b);
  }
  return 0.0;
}

double InverseG(const TransformationFunction& tf, double a, double c) {
  switch (tf.family()) {
    case TransformFamily::kOffset:
      return c - tf.parameter() * a;
    case TransformFamily::kScale: {
      const double denom = a + tf.parameter();
      if (denom == 0.0) {
        throw HtlError(ErrorCode::kSingular, tf.Name() + ": inverse undefined at a + alpha = 0 (a = " +
                                                 FormatReal(a) + ")");
      }
      return c / denom;
    }
    case TransformFamily::kNonTransfer:
      return c;
    case TransformFamily::kLogLinear: {
      const double denom = tf.parameter() * a;
      if (denom == 0.0) {
        throw HtlError(ErrorCode::kSingular,
                       tf.Name() + ": inverse undefined at beta a = 0 (a = " + FormatReal(a) + ")");
      }
      return std::exp(c / denom);
    }
  }
  return 0.0;
}

double AuxiliaryTruth(const TransformationFunction& tf, const RealFunction& f_so,
                      const RealFunction& f_ta, const Vector& x) {
  return InverseG(tf, f_so(x), f_ta(x));
}

AuxiliaryEstimator AuxiliaryEstimator::Direct(const TransformationFunction& tf, bool noiseless) {
  if (!tf.AffineInB() && !noiseless) {
    throw HtlError(ErrorCode::kConfig,
                   tf.Name() + ": direct inverse is biased for G nonlinear in b under label "
                               "noise; use the calibrated estimator or declare noiseless labels");
  }
  return AuxiliaryEstimator(tf, EstimatorMode::kDirectInverse, 0.0);
}

AuxiliaryEstimator AuxiliaryEstimator::Calibrated(const TransformationFunction& tf,
                                                  double sigma2) {
  if (tf.family() != TransformFamily::kLogLinear) {
    throw HtlError(ErrorCode::kConfig,
                   tf.Name() + ": calibrated estimator is only defined for loglinear G");
  }
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw HtlError(ErrorCode::kConfig, "calibrated estimator: sigma2 must be finite and >= 0");
  }
  return AuxiliaryEstimator(tf, EstimatorMode::kCalibrated, sigma2);
}

double ApplyH(const AuxiliaryEstimator& est, double a_hat, double y) {
  const TransformationFunction& tf = est.transformation();
  if (est.mode() == EstimatorMode::kDirectInverse) return InverseG(tf, a_hat, y);
  const double denom = tf.parameter() * a_hat;
  if (denom == 0.0) {
    throw HtlError(ErrorCode::kSingular,
                   tf.Name() + ": calibration undefined at beta a = 0 (a = " + FormatReal(a_hat) + ")");
  }
  return std::exp(y / denom + est.sigma2() * a_hat * a_hat);
}

double EstimateSigma2(const std::vector<std::vector<double>>& replicates) {
  double squares = 0.0;
  double dof = 0.0;
  for (const auto& ys : replicates) {
    if (ys.size() < 2) continue;
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    for (double y : ys) squares += (y - mean) * (y - mean);
    dof += static_cast<double>(ys.size() - 1);
  }
  if (dof == 0.0) {
    throw HtlError(ErrorCode::kInsufficientData,
                   "EstimateSigma2: no input point has two or more replicates");
  }
  return squares / dof;
}

QuantizedFamily QuantizeOffsetFamily(double l_alpha, double l_a, int k, double y_bound) {
  if (!(l_alpha > 0.0) || !(l_a > 0.0) || k < 1) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "QuantizeOffsetFamily: need L_alpha > 0, L_a > 0 and K >= 1");
  }
  QuantizedFamily family;
  family.l_alpha = l_alpha;
  family.l_a = l_a;
  family.k = k;
  family.epsilon = l_alpha / (2.0 * k);
  for (int i = -k; i <= k; ++i) {
    const double alpha = i * family.epsilon;
    const double bound = std::isfinite(y_bound) ? y_bound + std::abs(alpha) * l_a
                                                : TransformationFunction::kUnbounded;
    family.members.push_back(
        TransformationFunction::Offset(alpha).WithBounds(std::hypot(1.0, alpha), bound));
  }
  return family;
}

}  // namespace htl
