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

#include "htl/predictor.h"

#include <sstream>

namespace htl {

std::optional<Vector> Predictor::StabilityCoefficients(const Vector&) const {
  return std::nullopt;
}

Vector Predictor::PredictRows(const Matrix& points) const {
  Vector out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out(i) = Predict(points.row(i).transpose());
  return out;
}

FunctionPredictor::FunctionPredictor(RealFunction fn, Index dim, std::string name)
    : fn_(std::move(fn)), dim_(dim), name_(std::move(name)) {}

PredictorPtr MakeConstantPredictor(double value, Index dim) {
  std::ostringstream name;
  name << "constant(" << value << ")";
  return std::make_shared<FunctionPredictor>([value](const Vector&) { return value; }, dim,
                                             name.str());
}

}  // namespace htl
