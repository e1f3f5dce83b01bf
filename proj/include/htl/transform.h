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

#ifndef HTL_TRANSFORM_H_
#define HTL_TRANSFORM_H_

#include <limits>
#include <string>
#include <vector>

#include "htl/dataset.h"

namespace htl {

enum class TransformFamily { kOffset, kScale, kNonTransfer, kLogLinear };

const char* TransformFamilyName(TransformFamily family);

// A transformation G(a, b) relating the source value a and the auxiliary
// value b to the target value, invertible in b for admissible a:
//   offset(alpha)      G = alpha a + b        G_a^-1(c) = c - alpha a
//   scale(alpha)       G = (a + alpha) b      G_a^-1(c) = c / (a + alpha)
//   non_transfer       G = b                  G_a^-1(c) = c
//   loglinear(beta)    G = beta a ln(b)       G_a^-1(c) = exp(c / (beta a))
//
// lipschitz() is the declared constant L for G jointly in (a, b) and for the
// auxiliary estimator in its first argument; aux_bound() is B, the bound on
// auxiliary labels (infinite means no clipping).
class TransformationFunction {
 public:
  static constexpr double kDefaultScaleGuard = 0.1;
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  static TransformationFunction Offset(double alpha);
  // Admissible source values satisfy |a + alpha| >= guard.
  static TransformationFunction Scale(double alpha, double guard = kDefaultScaleGuard);
  static TransformationFunction NonTransfer();
  static TransformationFunction LogLinear(double beta);

  // Overrides the family defaults for L and B. Both must be positive.
  TransformationFunction WithBounds(double lipschitz, double aux_bound) const;

  TransformFamily family() const { return family_; }
  // alpha for offset/scale, beta for loglinear, 0 for non_transfer.
  double parameter() const { return parameter_; }
  double lipschitz() const { return lipschitz_; }
  double aux_bound() const { return aux_bound_; }
  double singular_guard() const { return singular_guard_; }
  // G affine in b for fixed a, which makes the direct inverse unbiased.
  bool AffineInB() const { return family_ != TransformFamily::kLogLinear; }
  // Distance from G(a, b) = b used for selection tie-breaks: |alpha| for
  // offset, 0 for non_transfer, infinity otherwise.
  double TransferStrength() const;
  std::string Name() const;

 private:
  TransformationFunction(TransformFamily family, double parameter, double lipschitz,
                         double guard);

  TransformFamily family_;
  double parameter_;
  double lipschitz_;
  double aux_bound_ = kUnbounded;
  double singular_guard_;
};

double EvalG(const TransformationFunction& tf, double a, double b);
double InverseG(const TransformationFunction& tf, double a, double c);

// w_G(x) = G_{f_so(x)}^-1(f_ta(x)).
double AuxiliaryTruth(const TransformationFunction& tf, const RealFunction& f_so,
                      const RealFunction& f_ta, const Vector& x);

enum class EstimatorMode { kDirectInverse, kCalibrated };

// H_G, the map from (source prediction, noisy target label) to an auxiliary
// label whose expectation is w_G.
class AuxiliaryEstimator {
 public:
  // The plain inverse is unbiased when G is affine in b or when the target
  // labels are noiseless; any other pairing is a kConfig error.
  static AuxiliaryEstimator Direct(const TransformationFunction& tf, bool noiseless = false);
  // Regression calibration for loglinear G under N(0, sigma2) target noise.
  static AuxiliaryEstimator Calibrated(const TransformationFunction& tf, double sigma2);

  const TransformationFunction& transformation() const { return tf_; }
  EstimatorMode mode() const { return mode_; }
  double sigma2() const { return sigma2_; }

 private:
  AuxiliaryEstimator(TransformationFunction tf, EstimatorMode mode, double sigma2)
      : tf_(std::move(tf)), mode_(mode), sigma2_(sigma2) {}

  TransformationFunction tf_;
  EstimatorMode mode_;
  double sigma2_;
};

// direct:     G_a^-1(y)
// calibrated: exp(y / (beta a) + sigma2 a^2)
//
// The calibrated correction term sigma2 a^2 is used exactly as given by the
// loglinear regression-calibration derivation. It is not the lognormal mean
// correction sigma2 / (2 beta^2 a^2); see README.
double ApplyH(const AuxiliaryEstimator& est, double a_hat, double y);

// Pooled within-point variance
//   sum_i sum_j (Y_ij - mean_i)^2 / sum_i (n_i - 1).
// Points with a single replicate contribute to neither sum.
double EstimateSigma2(const std::vector<std::vector<double>>& replicates);

// Finite cover {G(a, b) = k eps a + b : k = -K..K}, eps = L_alpha / (2K), of
// the class {alpha a + b : |alpha| <= L_alpha, |a| <= L_a}. The grid spans
// [-L_alpha / 2, L_alpha / 2].
struct QuantizedFamily {
  double l_alpha = 1.0;
  double l_a = 1.0;
  int k = 1;
  double epsilon = 0.5;
  std::vector<TransformationFunction> members;
};

// Members carry L = sqrt(1 + alpha^2) and, when y_bound is finite,
// B = y_bound + |alpha| L_a.
QuantizedFamily QuantizeOffsetFamily(double l_alpha, double l_a, int k,
                                     double y_bound = TransformationFunction::kUnbounded);

}  // namespace htl

#endif  // HTL_TRANSFORM_H_
