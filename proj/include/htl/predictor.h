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

#ifndef HTL_PREDICTOR_H_
#define HTL_PREDICTOR_H_

#include <memory>
#include <optional>
#include <string>

#include "htl/dataset.h"

namespace htl {

// A fitted regression function. Implementations are immutable after
// construction, so concurrent Predict calls need no coordination.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual double Predict(const Vector& x) const = 0;
  virtual Index dim() const = 0;
  virtual std::string Describe() const = 0;

  // Coefficients c_i with |A(T)(x) - A(T~)(x)| <= sum_i c_i |W_i - W~_i| for
  // label perturbations of the training set; nullopt when the estimator
  // provides no such bound.
  virtual std::optional<Vector> StabilityCoefficients(const Vector& x) const;

  Vector PredictRows(const Matrix& points) const;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

// Wraps a closed-form function; used for truths and constant predictors.
class FunctionPredictor : public Predictor {
 public:
  FunctionPredictor(RealFunction fn, Index dim, std::string name = "function");

  double Predict(const Vector& x) const override { return fn_(x); }
  Index dim() const override { return dim_; }
  std::string Describe() const override { return name_; }

 private:
  RealFunction fn_;
  Index dim_;
  std::string name_;
};

PredictorPtr MakeConstantPredictor(double value, Index dim);

}  // namespace htl

#endif  // HTL_PREDICTOR_H_
