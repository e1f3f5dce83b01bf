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

#ifndef HTL_EVALUATION_H_
#define HTL_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "htl/dataset.h"
#include "htl/model_selection.h"
#include "htl/predictor.h"

namespace htl {

struct MetricReport {
  double mse = 0.0;
  // 1 - ss_res / ss_tot; NaN when ss_tot == 0.
  double r_squared = 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  Index n_eval = 0;
};

MetricReport Evaluate(const Predictor& pred, const Dataset& data);

// (1/n) sum_i (Y_i - f(X_i))^2.
double Mse(const Predictor& pred, const Dataset& data);

// 1 - SS_res / SS_tot, SS_tot about the mean of data's labels. Negative when
// the predictor is worse than that mean. Needs n >= 2 and non-constant
// labels (kDegenerate otherwise).
double RSquared(const Predictor& pred, const Dataset& data);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// E[(f(X) - truth(X))^2] over n_mc inputs drawn from the sampler.
MonteCarloEstimate ExcessRiskMcEstimate(const Predictor& pred, const RealFunction& truth,
                                        const InputSampler& sampler, Index n_mc,
                                        std::uint64_t seed);
double ExcessRiskMc(const Predictor& pred, const RealFunction& truth,
                    const InputSampler& sampler, Index n_mc, std::uint64_t seed);

struct RateFit {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares of ln(risk) on ln(n). Needs >= 3 points, positive risks and
// distinct n.
RateFit RateSlope(const std::vector<std::pair<double, double>>& points);

// Query points for sup-norm probes: `count` equispaced points spanning the
// box when d == 1, `count` seeded uniform draws otherwise.
std::vector<Vector> QueryGrid(const InputSampler& sampler, std::uint64_t seed, Index count = 200);

using CoefficientFn = std::function<Vector(const Vector& x)>;

struct StabilityProbeResult {
  // max_x |A(T)(x) - A(T~)(x)|.
  double observed_sup = 0.0;
  // max_x sum_i c_i(x) |delta_i|.
  double bound = 0.0;
  // Every query satisfied its own bound (up to rounding, see below).
  bool holds = true;
  // min_x (bound(x) - |difference(x)|); negative iff some query violated.
  double min_margin = 0.0;
};

// Fits base and base-with-labels-plus-delta and compares the two predictors
// on the grid, each query against its own bound. Rounding in the two
// predictions is absorbed by a tolerance of 1e-12 (1 + |prediction|).
StabilityProbeResult StabilityProbe(const Learner& fit, const Dataset& base, const Vector& delta,
                                    const CoefficientFn& coefficients,
                                    const std::vector<Vector>& query_grid);
// Same with coefficients that do not depend on the query.
StabilityProbeResult StabilityProbe(const Learner& fit, const Dataset& base, const Vector& delta,
                                    const Vector& coefficients,
                                    const std::vector<Vector>& query_grid);
template <typename Derived>
StabilityProbeResult StabilityProbe(const Learner& fit, const Dataset& base, const Vector& delta,
                                    const Eigen::MatrixBase<Derived>& coefficients,
                                    const std::vector<Vector>& query_grid) {
  return StabilityProbe(fit, base, delta, Vector(coefficients), query_grid);
}

}  // namespace htl

#endif  // HTL_EVALUATION_H_
