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

#ifndef HTL_MODEL_SELECTION_H_
#define HTL_MODEL_SELECTION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "htl/dataset.h"
#include "htl/kernel_ridge.h"
#include "htl/kernel_smoothing.h"
#include "htl/predictor.h"

namespace htl {

// h = c n^(-1 / (2 alpha + d)) evaluated on the data each fit receives.
struct BandwidthRule {
  double alpha = 1.0;
  double c = 1.0;
};

// lambda = c n^(-1 / (beta + p)).
struct LambdaRule {
  double beta = 1.0;
  double p = 0.5;
  double c = 1.0;
};

// Exactly one of bandwidth, bandwidth_rule, bandwidth_grid is set.
struct KsSpec {
  SmoothingKernel kernel;
  std::optional<double> bandwidth;
  std::optional<BandwidthRule> bandwidth_rule;
  std::vector<double> bandwidth_grid;
};

// Exactly one of lambda, lambda_rule, lambda_grid is set. An rbf kernel with
// neither lengthscale nor lengthscale_grid uses the median heuristic on the
// data of each fit.
struct KrrSpec {
  RkhsKind kind = RkhsKind::kRbf;
  int degree = 2;
  double offset = 1.0;
  std::optional<double> lengthscale;
  std::vector<double> lengthscale_grid;
  std::optional<double> lambda;
  std::optional<LambdaRule> lambda_rule;
  std::vector<double> lambda_grid;
};

// How one stage of the pipeline turns a dataset into a predictor. Grids are
// resolved by k-fold cross-validation on whatever data the stage is given.
struct SubroutineSpec {
  std::variant<KsSpec, KrrSpec> method;
  int cv_folds = 10;

  static SubroutineSpec Ks(SmoothingKernel kernel, double bandwidth);
  static SubroutineSpec KsRule(SmoothingKernel kernel, BandwidthRule rule);
  static SubroutineSpec KsGrid(SmoothingKernel kernel, std::vector<double> grid, int folds = 10);
  static SubroutineSpec Krr(RkhsKernel kernel, double lambda);
  static SubroutineSpec KrrGrid(RkhsKernel kernel, std::vector<double> lambda_grid,
                                int folds = 10);

  bool is_ks() const { return std::holds_alternative<KsSpec>(method); }
  // True when a grid must be searched before fitting.
  bool NeedsSearch() const;
  void Validate() const;
  std::string Describe() const;
};

using Learner = std::function<PredictorPtr(const Dataset&)>;

// Fits a spec without grids.
PredictorPtr FitSubroutine(const SubroutineSpec& spec, const Dataset& data);

// Fold id in [0, folds) per row: a seeded permutation dealt round-robin, so
// folds differ in size by at most one.
std::vector<int> FoldAssignment(Index n, int folds, std::uint64_t seed);

struct GridPointScore {
  SubroutineSpec spec;
  // Mean over folds of the held-out MSE; infinity when a fit failed.
  double cv_mse;
};

// Every grid point of spec as a resolved spec, in declared order (lambda
// major, lengthscale minor for KRR).
std::vector<SubroutineSpec> ExpandGrid(const SubroutineSpec& spec);

std::vector<GridPointScore> ScoreGrid(const Dataset& data, const SubroutineSpec& spec, int folds,
                                      std::uint64_t seed);

// The grid point with the smallest mean held-out MSE; ties go to the first
// point in declared order.
SubroutineSpec GridSearchCv(const Dataset& data, const SubroutineSpec& spec, int folds,
                            std::uint64_t seed);

// Learner that resolves grids by cross-validation (cv_seed) and then fits.
Learner MakeLearner(const SubroutineSpec& spec, std::uint64_t cv_seed = 0);

}  // namespace htl

#endif  // HTL_MODEL_SELECTION_H_
