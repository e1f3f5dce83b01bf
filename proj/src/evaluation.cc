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

#include "htl/evaluation.h"

#include <cmath>
#include <limits>
#include <set>

#include "htl/error.h"
#include "htl/random.h"

namespace htl {

MetricReport Evaluate(const Predictor& pred, const Dataset& data) {
  MetricReport report;
  report.n_eval = data.size();
  const double mean = data.labels().mean();
  for (Index i = 0; i < data.size(); ++i) {
    const double y = data.labels()(i);
    const double r = y - pred.Predict(data.row(i));
    report.ss_res += r * r;
    report.ss_tot += (y - mean) * (y - mean);
  }
  report.mse = report.ss_res / static_cast<double>(report.n_eval);
  report.r_squared = report.ss_tot > 0.0 ? 1.0 - report.ss_res / report.ss_tot
                                         : std::numeric_limits<double>::quiet_NaN();
  return report;
}

double Mse(const Predictor& pred, const Dataset& data) { return Evaluate(pred, data).mse; }

double RSquared(const Predictor& pred, const Dataset& data) {
  if (data.size() < 2) {
    throw HtlError(ErrorCode::kInsufficientData, "RSquared: needs at least two rows");
  }
  const MetricReport report = Evaluate(pred, data);
  if (!(report.ss_tot > 0.0)) {
    throw HtlError(ErrorCode::kDegenerate, "RSquared: labels are constant (SS_tot = 0)");
  }
  return report.r_squared;
}

MonteCarloEstimate ExcessRiskMcEstimate(const Predictor& pred, const RealFunction& truth,
                                        const InputSampler& sampler, Index n_mc,
                                        std::uint64_t seed) {
  if (n_mc < 1) throw HtlError(ErrorCode::kInvalidArgument, "ExcessRiskMc: n_mc must be >= 1");
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Index k = 0; k < n_mc; ++k) {
    const Vector x = sampler.Sample(rng);
    const double diff = pred.Predict(x) - truth(x);
    const double sq = diff * diff;
    sum += sq;
    sum_sq += sq * sq;
  }
  const double n = static_cast<double>(n_mc);
  MonteCarloEstimate out;
  out.mean = sum / n;
  if (n_mc > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
    out.standard_error = std::sqrt(var / n);
  }
  return out;
}

double ExcessRiskMc(const Predictor& pred, const RealFunction& truth,
                    const InputSampler& sampler, Index n_mc, std::uint64_t seed) {
  return ExcessRiskMcEstimate(pred, truth, sampler, n_mc, seed).mean;
}

RateFit RateSlope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw HtlError(ErrorCode::kInsufficientData, "RateSlope: needs at least three points");
  }
  std::set<double> seen;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [n, risk] : points) {
    if (!(risk > 0.0)) {
      throw HtlError(ErrorCode::kDomain, "RateSlope: risks must be positive");
    }
    if (!(n > 0.0)) throw HtlError(ErrorCode::kDomain, "RateSlope: sample sizes must be positive");
    if (!seen.insert(n).second) {
      throw HtlError(ErrorCode::kInvalidArgument, "RateSlope: duplicate sample size");
    }
    mx += std::log(n);
    my += std::log(risk);
  }
  const double m = static_cast<double>(points.size());
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [n, risk] : points) {
    const double dx = std::log(n) - mx;
    sxy += dx * (std::log(risk) - my);
    sxx += dx * dx;
  }
  RateFit fit;
  fit.points = points;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

std::vector<Vector> QueryGrid(const InputSampler& sampler, std::uint64_t seed, Index count) {
  std::vector<Vector> grid;
  grid.reserve(static_cast<std::size_t>(count));
  if (sampler.dim == 1) {
    for (Index k = 0; k < count; ++k) {
      const double t = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.5;
      grid.push_back(Vector::Constant(1, sampler.low + t * (sampler.high - sampler.low)));
    }
    return grid;
  }
  Rng rng(seed);
  for (Index k = 0; k < count; ++k) grid.push_back(sampler.Sample(rng));
  return grid;
}

StabilityProbeResult StabilityProbe(const Learner& fit, const Dataset& base, const Vector& delta,
                                    const CoefficientFn& coefficients,
                                    const std::vector<Vector>& query_grid) {
  if (delta.size() != base.size()) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "StabilityProbe: perturbation length differs from the dataset size");
  }
  const PredictorPtr original = fit(base);
  const PredictorPtr perturbed = fit(base.WithLabels(base.labels() + delta));
  const Vector magnitude = delta.cwiseAbs();

  StabilityProbeResult result;
  result.min_margin = std::numeric_limits<double>::infinity();
  for (const Vector& x : query_grid) {
    const double a = original->Predict(x);
    const double b = perturbed->Predict(x);
    const double diff = std::abs(a - b);
    const Vector c = coefficients(x);
    if (c.size() != base.size()) {
      throw HtlError(ErrorCode::kInvalidArgument,
                     "StabilityProbe: coefficient vector length differs from the dataset size");
    }
    const double bound = c.dot(magnitude);
    const double tolerance = 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
    result.observed_sup = std::max(result.observed_sup, diff);
    result.bound = std::max(result.bound, bound);
    result.min_margin = std::min(result.min_margin, bound - diff);
    if (diff > bound + tolerance) result.holds = false;
  }
  if (query_grid.empty()) result.min_margin = 0.0;
  return result;
}

StabilityProbeResult StabilityProbe(const Learner& fit, const Dataset& base, const Vector& delta,
                                    const Vector& coefficients,
                                    const std::vector<Vector>& query_grid) {
  return StabilityProbe(
      fit, base, delta, [&coefficients](const Vector&) { return coefficients; }, query_grid);
}

}  // namespace htl
