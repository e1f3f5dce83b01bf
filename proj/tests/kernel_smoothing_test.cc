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
#include <vector>

#include <gtest/gtest.h>

#include "htl/kernel_smoothing.h"
#include "htl/random.h"
#include "oracles.h"
#include "test_util.h"

namespace htl {
namespace {

using testing::CaptureCode;
using testing::Line1d;
using testing::Point;

TEST(SmoothingKernelTest, ProfilesAndSupport) {
  EXPECT_EQ(SmoothingKernel(KernelShape::kBoxcar)(1.0), 1.0);
  EXPECT_EQ(SmoothingKernel(KernelShape::kBoxcar)(1.0001), 0.0);
  EXPECT_EQ(SmoothingKernel(KernelShape::kEpanechnikov)(0.0), 0.75);
  EXPECT_EQ(SmoothingKernel(KernelShape::kTruncatedGaussian)(1.5), 0.0);
  EXPECT_NEAR(SmoothingKernel(KernelShape::kGaussian)(1.5), std::exp(-1.125), 1e-15);
  EXPECT_EQ(SmoothingKernel().shape(), KernelShape::kTruncatedGaussian);
}

TEST(SmoothingKernelTest, ParsesNames) {
  for (auto shape : {KernelShape::kBoxcar, KernelShape::kEpanechnikov,
                     KernelShape::kTruncatedGaussian, KernelShape::kGaussian}) {
    EXPECT_EQ(ParseKernelShape(KernelShapeName(shape)), shape);
  }
  EXPECT_EQ(CaptureCode([] { ParseKernelShape("triangle"); }), ErrorCode::kConfig);
}

TEST(KsWeightsTest, OnlyOnePointWithinBandwidth) {
  const KsPredictor p(Line1d({0, 1}, {1, 3}), SmoothingKernel(KernelShape::kBoxcar), 0.5);
  const Vector w = KsWeights(p, Point(0.0));
  EXPECT_EQ(w(0), 1.0);
  EXPECT_EQ(w(1), 0.0);
}

TEST(KsWeightsTest, SymmetricQuery) {
  const KsPredictor p(Line1d({0, 1}, {1, 3}), SmoothingKernel(KernelShape::kBoxcar), 2.0);
  const Vector w = KsWeights(p, Point(0.5));
  EXPECT_EQ(w(0), 0.5);
  EXPECT_EQ(w(1), 0.5);
  EXPECT_EQ(KsPredict(p, Point(0.5)), 2.0);
}

TEST(KsWeightsTest, EpanechnikovHandEvaluation) {
  // K(0.25) = 0.703125, K(0.5) = 0.5625, K(2.25) = 0 -> weights 5/9, 4/9, 0.
  const KsPredictor p(Line1d({0, 0.3, 1}, {0, 0, 0}), SmoothingKernel(KernelShape::kEpanechnikov), 0.4);
  const Vector w = KsWeights(p, Point(0.1));
  EXPECT_NEAR(w(0), 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(w(1), 4.0 / 9.0, 1e-15);
  EXPECT_EQ(w(2), 0.0);
}

TEST(KsPredictTest, SinglePointReturnsItsLabel) {
  for (auto shape : {KernelShape::kBoxcar, KernelShape::kEpanechnikov,
                     KernelShape::kTruncatedGaussian, KernelShape::kGaussian}) {
    for (double h : {0.01, 0.5, 10.0}) {
      const KsPredictor p(Line1d({0.2}, {5}), SmoothingKernel(shape), h);
      for (double q : {-3.0, 0.2, 0.9}) EXPECT_EQ(KsPredict(p, Point(q)), 5.0);
    }
  }
}

TEST(KsPredictTest, MatchesBruteForceOnSquare) {
  Matrix x(50, 1);
  Vector y(50);
  for (Index i = 0; i < 50; ++i) {
    x(i, 0) = static_cast<double>(i) / 49.0;
    y(i) = x(i, 0) * x(i, 0);
  }
  const Dataset d(x, y, DomainTag::kTarget);
  const KsPredictor p(d, SmoothingKernel(KernelShape::kEpanechnikov), 0.1);
  for (int q = 0; q <= 400; ++q) {
    const Vector xq = Point(-0.05 + 1.1 * q / 400.0);
    EXPECT_NEAR(KsPredict(p, xq), oracle::KsPredict(d, KernelShape::kEpanechnikov, 0.1, xq), 1e-12);
  }
}

TEST(KsPredictTest, MatchesBruteForceRandomInstances) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.Below(3));
    const Dataset data = testing::RandomDataset(rng, 5 + static_cast<Index>(rng.Below(40)), d);
    const auto shape = static_cast<KernelShape>(rng.Below(4));
    const double h = rng.Uniform(0.02, 0.6);
    const KsPredictor p(data, SmoothingKernel(shape), h);
    for (int q = 0; q < 20; ++q) {
      Vector xq(d);
      for (Index j = 0; j < d; ++j) xq(j) = rng.Uniform(-0.2, 1.2);
      ASSERT_NEAR(KsPredict(p, xq), oracle::KsPredict(data, shape, h, xq), 1e-12)
          << "trial " << trial << " shape " << KernelShapeName(shape);
    }
  }
}

TEST(KsPredictTest, WeightsFormProbabilityVector) {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset data = testing::RandomDataset(rng, 30, 2);
    const KsPredictor p(data, SmoothingKernel(static_cast<KernelShape>(rng.Below(4))),
                        rng.Uniform(0.01, 0.5));
    for (int q = 0; q < 10; ++q) {
      const Vector xq = Vector::NullaryExpr(2, [&](Index) { return rng.Uniform(); });
      const Vector w = KsWeights(p, xq);
      EXPECT_GE(w.minCoeff(), 0.0);
      EXPECT_LE(w.maxCoeff(), 1.0);
      EXPECT_NEAR(w.sum(), 1.0, 1e-12);
      const double pred = KsPredict(p, xq);
      EXPECT_GE(pred, data.labels().minCoeff() - 1e-12);
      EXPECT_LE(pred, data.labels().maxCoeff() + 1e-12);
      EXPECT_NEAR(pred, w.dot(data.labels()), 1e-12);
    }
  }
}

TEST(KsPredictTest, EmptyNeighbourhoodFallsBackToNearest) {
  const KsPredictor p(Line1d({0.0, 0.5, 1.0}, {1, 2, 3}), SmoothingKernel(KernelShape::kBoxcar), 0.01);
  EXPECT_EQ(KsPredict(p, Point(0.9)), 3.0);
  EXPECT_EQ(KsPredict(p, Point(-4.0)), 1.0);
}

TEST(KsPredictTest, FallbackTieGoesToLowestIndex) {
  // 0.25 is equidistant from both rows; the earlier row wins in either order.
  const KsPredictor a(Line1d({0.5, 0.0}, {7, 9}), SmoothingKernel(KernelShape::kBoxcar), 0.1);
  EXPECT_EQ(KsPredict(a, Point(0.25)), 7.0);
  const KsPredictor b(Line1d({0.0, 0.5}, {9, 7}), SmoothingKernel(KernelShape::kBoxcar), 0.1);
  EXPECT_EQ(KsPredict(b, Point(0.25)), 9.0);
  const Vector w = KsWeights(b, Point(0.25));
  EXPECT_EQ(w(0), 1.0);
  EXPECT_EQ(w(1), 0.0);
}

TEST(KsPredictTest, DuplicateFeaturesFallbackLowestIndex) {
  const KsPredictor p(Line1d({0.3, 0.3, 0.3}, {4, 5, 6}), SmoothingKernel(KernelShape::kBoxcar), 0.01);
  EXPECT_EQ(KsPredict(p, Point(0.9)), 4.0);
}

TEST(KsPredictTest, StabilityBoundHoldsExactly) {
  Rng rng(33);
  for (int trial = 0; trial < 120; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.Below(2));
    const Dataset base = testing::RandomDataset(rng, 10 + static_cast<Index>(rng.Below(30)), d);
    Vector perturbed = base.labels();
    for (Index i = 0; i < perturbed.size(); ++i) {
      if (rng.Uniform() < 0.4) perturbed(i) += rng.Uniform(-1.0, 1.0);
    }
    const SmoothingKernel kernel(static_cast<KernelShape>(rng.Below(4)));
    const double h = rng.Uniform(0.05, 0.5);
    const KsPredictor f(base, kernel, h);
    const KsPredictor g(base.WithLabels(perturbed), kernel, h);
    const Vector diff = (base.labels() - perturbed).cwiseAbs();
    for (int q = 0; q < 25; ++q) {
      const Vector xq = Vector::NullaryExpr(d, [&](Index) { return rng.Uniform(); });
      const double observed = std::abs(KsPredict(f, xq) - KsPredict(g, xq));
      const double bound = KsWeights(f, xq).dot(diff);
      ASSERT_LE(observed, bound + 1e-12) << "trial " << trial;
    }
  }
}

TEST(KsPredictTest, RejectsBadInputs) {
  EXPECT_EQ(CaptureCode([] { KsPredictor(Line1d({0}, {1}), SmoothingKernel(), 0.0); }),
            ErrorCode::kInvalidArgument);
  const KsPredictor p(Line1d({0}, {1}), SmoothingKernel(), 0.1);
  EXPECT_EQ(CaptureCode([&] { KsPredict(p, Vector::Zero(2)); }), ErrorCode::kInvalidArgument);
}

TEST(KsBandwidthRuleTest, ExponentArithmetic) {
  EXPECT_EQ(KsBandwidthRule(1, 1, 1.0), 1.0);
  EXPECT_NEAR(KsBandwidthRule(1000, 1, 1.0), 0.1, 1e-12);
  EXPECT_NEAR(KsBandwidthRule(1000000, 2, 0.5), 0.01, 1e-12);
  EXPECT_NEAR(KsBandwidthRule(1000, 1, 1.0, 3.0), 0.3, 1e-12);
}

TEST(KsBandwidthRuleTest, RejectsOutOfRangeExponent) {
  EXPECT_EQ(CaptureCode([] { KsBandwidthRule(10, 1, 0.0); }), ErrorCode::kDomain);
  EXPECT_EQ(CaptureCode([] { KsBandwidthRule(10, 1, 1.5); }), ErrorCode::kDomain);
}

}  // namespace
}  // namespace htl
