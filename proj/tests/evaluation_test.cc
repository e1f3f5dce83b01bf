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

#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "htl/evaluation.h"
#include "htl/kernel_ridge.h"
#include "htl/kernel_smoothing.h"
#include "htl/random.h"
#include "test_util.h"

namespace htl {
namespace {

using testing::CaptureCode;
using testing::Line1d;
using testing::Point;

TEST(MseTest, PerfectAndConstantPredictors) {
  const Dataset d = Line1d({0.0, 1.0}, {1.0, -1.0});
  const FunctionPredictor perfect([](const Vector& x) { return 1.0 - 2.0 * x(0); }, 1);
  EXPECT_EQ(Mse(perfect, d), 0.0);
  EXPECT_EQ(Mse(*MakeConstantPredictor(0.0, 1), d), 1.0);
}

TEST(MseTest, MatchesHandSummedResiduals) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::RandomDataset(rng, 50, 2);
    const FunctionPredictor p([](const Vector& x) { return x(0) - 0.3 * x(1); }, 2);
    double sum = 0.0;
    for (Index i = 0; i < d.size(); ++i) {
      const double r = d.labels()(i) - (d.features()(i, 0) - 0.3 * d.features()(i, 1));
      sum += r * r;
    }
    EXPECT_NEAR(Mse(p, d), sum / 50.0, 1e-12);
  }
}

TEST(RSquaredTest, ReferenceValues) {
  const Dataset d = Line1d({0, 1, 2}, {1, 2, 3});
  const FunctionPredictor perfect([](const Vector& x) { return x(0) + 1.0; }, 1);
  EXPECT_EQ(RSquared(perfect, d), 1.0);
  EXPECT_EQ(RSquared(*MakeConstantPredictor(2.0, 1), d), 0.0);
  // Predictions 3, 2, 1: SS_res = 8, SS_tot = 2.
  const FunctionPredictor reversed([](const Vector& x) { return 3.0 - x(0); }, 1);
  EXPECT_NEAR(RSquared(reversed, d), -3.0, 1e-15);
}

TEST(RSquaredTest, Contracts) {
  EXPECT_EQ(CaptureCode([] { RSquared(*MakeConstantPredictor(0.0, 1), Line1d({0}, {1})); }),
            ErrorCode::kInsufficientData);
  EXPECT_EQ(CaptureCode([] { RSquared(*MakeConstantPredictor(0.0, 1), Line1d({0, 1}, {1, 1})); }),
            ErrorCode::kDegenerate);
}

TEST(EvaluateTest, MetricIdentities) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::RandomDataset(rng, 40, 1);
    const FunctionPredictor p([](const Vector& x) { return 0.5 * x(0); }, 1);
    const MetricReport m = Evaluate(p, d);
    EXPECT_EQ(m.n_eval, 40);
    EXPECT_NEAR(m.mse, m.ss_res / 40.0, 1e-15);
    EXPECT_NEAR(m.r_squared, 1.0 - m.ss_res / m.ss_tot, 1e-15);
    EXPECT_GE(m.ss_res, 0.0);
    EXPECT_GE(m.ss_tot, 0.0);
  }
  const MetricReport flat = Evaluate(*MakeConstantPredictor(0.0, 1), Line1d({0, 1}, {1, 1}));
  EXPECT_TRUE(std::isnan(flat.r_squared));
  EXPECT_EQ(flat.mse, 1.0);
}

TEST(ExcessRiskTest, ExactCases) {
  const RealFunction truth = [](const Vector& x) { return std::sin(3.0 * x(0)); };
  const FunctionPredictor same(truth, 1);
  const FunctionPredictor shifted([&](const Vector& x) { return truth(x) + 1.0; }, 1);
  EXPECT_EQ(ExcessRiskMc(same, truth, InputSampler{}, 1000, 1), 0.0);
  EXPECT_NEAR(ExcessRiskMc(shifted, truth, InputSampler{}, 1000, 1), 1.0, 1e-12);
}

TEST(ExcessRiskTest, UniformSquareMean) {
  const RealFunction truth = [](const Vector& x) { return x(0) * x(0); };
  const FunctionPredictor p([&](const Vector& x) { return truth(x) + x(0); }, 1);
  const MonteCarloEstimate e = ExcessRiskMcEstimate(p, truth, InputSampler{}, 100000, 3);
  EXPECT_LE(std::abs(e.mean - 1.0 / 3.0), 3.0 * e.standard_error);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_EQ(e.mean, ExcessRiskMc(p, truth, InputSampler{}, 100000, 3));
}

TEST(ExcessRiskTest, NonnegativeAndDeterministic) {
  Rng rng(4);
  const Dataset d = testing::RandomDataset(rng, 50, 1);
  const KsPredictor ks(d, SmoothingKernel(), 0.2);
  const RealFunction truth = [](const Vector& x) { return x(0); };
  const double a = ExcessRiskMc(ks, truth, InputSampler{}, 500, 9);
  EXPECT_GT(a, 0.0);
  EXPECT_EQ(a, ExcessRiskMc(ks, truth, InputSampler{}, 500, 9));
}

TEST(RateSlopeTest, ExactPowerLaws) {
  EXPECT_NEAR(RateSlope({{10, 3.0 / 10}, {100, 3.0 / 100}, {1000, 3.0 / 1000}}).slope, -1.0, 1e-10);
  std::vector<std::pair<double, double>> pts;
  for (double n : {10.0, 100.0, 1000.0}) pts.emplace_back(n, 0.7 * std::pow(n, -2.0 / 3.0));
  const RateFit fit = RateSlope(pts);
  EXPECT_NEAR(fit.slope, -2.0 / 3.0, 1e-10);
  EXPECT_NEAR(fit.intercept, std::log(0.7), 1e-10);
}

TEST(RateSlopeTest, NoisyPowerLaw) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 20; ++k) {
      const double n = std::round(10.0 * std::pow(1000.0, k / 19.0));
      pts.emplace_back(n + k, 2.0 * std::pow(n + k, -0.5) * std::exp(0.2 * rng.Normal()));
    }
    EXPECT_NEAR(RateSlope(pts).slope, -0.5, 0.15);
  }
}

TEST(RateSlopeTest, Contracts) {
  EXPECT_EQ(CaptureCode([] { RateSlope({{10, 1}, {100, 0.1}}); }), ErrorCode::kInsufficientData);
  EXPECT_EQ(CaptureCode([] { RateSlope({{10, 1}, {100, 0.0}, {1000, 0.1}}); }), ErrorCode::kDomain);
  EXPECT_EQ(CaptureCode([] { RateSlope({{10, 1}, {10, 0.5}, {1000, 0.1}}); }), ErrorCode::kInvalidArgument);
}

TEST(QueryGridTest, EquispacedInOneDimension) {
  const auto grid = QueryGrid(InputSampler{1, 0.0, 2.0}, 0, 200);
  ASSERT_EQ(grid.size(), 200u);
  EXPECT_EQ(grid.front()(0), 0.0);
  EXPECT_EQ(grid.back()(0), 2.0);
  EXPECT_NEAR(grid[1](0) - grid[0](0), 2.0 / 199.0, 1e-15);
}

TEST(QueryGridTest, SeededUniformInHigherDimensions) {
  const InputSampler box{3, -1.0, 1.0};
  const auto a = QueryGrid(box, 7);
  const auto b = QueryGrid(box, 7);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_GE(a[i].minCoeff(), -1.0);
    EXPECT_LT(a[i].maxCoeff(), 1.0);
  }
  EXPECT_NE(QueryGrid(box, 8)[0], a[0]);
}

TEST(StabilityProbeTest, ZeroPerturbation) {
  Rng rng(6);
  const Dataset d = testing::RandomDataset(rng, 20, 1);
  const Learner fit = [](const Dataset& t) { return std::make_shared<KsPredictor>(t, SmoothingKernel(), 0.2); };
  const auto r = StabilityProbe(fit, d, Vector::Zero(20), Vector::Constant(20, 0.05), QueryGrid(InputSampler{}, 0));
  EXPECT_EQ(r.observed_sup, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(StabilityProbeTest, KsSinglePointPerturbation) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = testing::RandomDataset(rng, 10 + static_cast<Index>(rng.Below(40)), 1);
    const auto shape = static_cast<KernelShape>(rng.Below(4));
    const double h = rng.Uniform(0.05, 0.4);
    const KsPredictor base(d, SmoothingKernel(shape), h);
    const Learner fit = [&](const Dataset& t) { return std::make_shared<KsPredictor>(t, SmoothingKernel(shape), h); };
    Vector delta = Vector::Zero(d.size());
    const auto j = static_cast<Index>(rng.Below(static_cast<std::uint64_t>(d.size())));
    delta(j) = rng.Uniform(-2.0, 2.0);
    const auto r = StabilityProbe(fit, d, delta, [&](const Vector& x) { return base.Weights(x); },
                                  QueryGrid(InputSampler{}, 0));
    EXPECT_TRUE(r.holds) << "trial " << trial;
    EXPECT_GE(r.min_margin, -1e-12);
  }
}

TEST(StabilityProbeTest, KrrRandomPerturbation) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.Below(40));
    const Dataset d = testing::RandomDataset(rng, n, 1);
    const RkhsKernel kernel = RkhsKernel::Rbf(rng.Uniform(0.1, 1.0));
    const Learner fit = [&](const Dataset& t) { return std::make_shared<KrrPredictor>(KrrFit(t, kernel, 0.1)); };
    const Vector delta = Vector::NullaryExpr(n, [&](Index) { return rng.Uniform(-1.0, 1.0); });
    const auto r = StabilityProbe(fit, d, delta, Vector::Constant(n, 1.0 / (n * 0.1)), QueryGrid(InputSampler{}, 0));
    EXPECT_TRUE(r.holds) << "trial " << trial;
    EXPECT_LE(r.observed_sup, (1.0 / (n * 0.1)) * delta.cwiseAbs().sum() + 1e-12);
  }
}

TEST(StabilityProbeTest, DetectsViolatedBound) {
  const Dataset d = Line1d({0.0, 1.0}, {0.0, 0.0});
  const Learner fit = [](const Dataset& t) { return std::make_shared<KsPredictor>(t, SmoothingKernel(KernelShape::kBoxcar), 5.0); };
  Vector delta(2);
  delta << 1.0, 1.0;
  const auto r = StabilityProbe(fit, d, delta, Vector::Constant(2, 0.1), {Point(0.5)});
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.observed_sup, 1.0, 1e-15);
}

}  // namespace
}  // namespace htl
