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

#include "htl/model_selection.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "htl/error.h"
#include "htl/random.h"

namespace htl {
namespace {

int CountSet(bool a, bool b, bool c) { return int{a} + int{b} + int{c}; }

RkhsKernel MakeKernel(const KrrSpec& spec, const Dataset& data) {
  switch (spec.kind) {
    case RkhsKind::kRbf:
      return RkhsKernel::Rbf(spec.lengthscale ? *spec.lengthscale
                                              : MedianHeuristic(data.features()));
    case RkhsKind::kLinear:
      return RkhsKernel::Linear();
    case RkhsKind::kPolynomial:
      return RkhsKernel::Polynomial(spec.degree, spec.offset);
  }
  return RkhsKernel::Linear();
}

}  // namespace

SubroutineSpec SubroutineSpec::Ks(SmoothingKernel kernel, double bandwidth) {
  KsSpec ks{kernel, bandwidth, std::nullopt, {}};
  return SubroutineSpec{ks};
}

SubroutineSpec SubroutineSpec::KsRule(SmoothingKernel kernel, BandwidthRule rule) {
  KsSpec ks{kernel, std::nullopt, rule, {}};
  return SubroutineSpec{ks};
}

SubroutineSpec SubroutineSpec::KsGrid(SmoothingKernel kernel, std::vector<double> grid,
                                      int folds) {
  KsSpec ks{kernel, std::nullopt, std::nullopt, std::move(grid)};
  return SubroutineSpec{ks, folds};
}

SubroutineSpec SubroutineSpec::Krr(RkhsKernel kernel, double lambda) {
  KrrSpec krr;
  krr.kind = kernel.kind();
  krr.degree = kernel.degree();
  krr.offset = kernel.offset();
  if (kernel.kind() == RkhsKind::kRbf) krr.lengthscale = kernel.lengthscale();
  krr.lambda = lambda;
  return SubroutineSpec{krr};
}

SubroutineSpec SubroutineSpec::KrrGrid(RkhsKernel kernel, std::vector<double> lambda_grid,
                                       int folds) {
  SubroutineSpec spec = Krr(kernel, 0.0);
  auto& krr = std::get<KrrSpec>(spec.method);
  krr.lambda.reset();
  krr.lambda_grid = std::move(lambda_grid);
  spec.cv_folds = folds;
  return spec;
}

bool SubroutineSpec::NeedsSearch() const {
  if (const auto* ks = std::get_if<KsSpec>(&method)) return !ks->bandwidth_grid.empty();
  const auto& krr = std::get<KrrSpec>(method);
  return !krr.lambda_grid.empty() || !krr.lengthscale_grid.empty();
}

void SubroutineSpec::Validate() const {
  if (const auto* ks = std::get_if<KsSpec>(&method)) {
    if (CountSet(ks->bandwidth.has_value(), ks->bandwidth_rule.has_value(),
                 !ks->bandwidth_grid.empty()) != 1) {
      throw HtlError(ErrorCode::kConfig,
                     "ks: exactly one of bandwidth, bandwidth_rule, bandwidth_grid is required");
    }
    if (ks->bandwidth && !(*ks->bandwidth > 0.0)) {
      throw HtlError(ErrorCode::kConfig, "ks: bandwidth must be positive");
    }
    for (double h : ks->bandwidth_grid) {
      if (!(h > 0.0)) throw HtlError(ErrorCode::kConfig, "ks: grid bandwidths must be positive");
    }
    if (ks->bandwidth_rule) {
      const auto& r = *ks->bandwidth_rule;
      if (!(r.alpha > 0.0 && r.alpha <= 1.0) || !(r.c > 0.0)) {
        throw HtlError(ErrorCode::kConfig, "ks: bandwidth_rule needs alpha in (0, 1] and c > 0");
      }
    }
  } else {
    const auto& krr = std::get<KrrSpec>(method);
    if (CountSet(krr.lambda.has_value(), krr.lambda_rule.has_value(),
                 !krr.lambda_grid.empty()) != 1) {
      throw HtlError(ErrorCode::kConfig,
                     "krr: exactly one of lambda, lambda_rule, lambda_grid is required");
    }
    if (krr.lambda && !(*krr.lambda >= 0.0)) {
      throw HtlError(ErrorCode::kConfig, "krr: lambda must be >= 0");
    }
    for (double l : krr.lambda_grid) {
      if (!(l >= 0.0)) throw HtlError(ErrorCode::kConfig, "krr: grid lambdas must be >= 0");
    }
    if (krr.lambda_rule) {
      const auto& r = *krr.lambda_rule;
      if (!(r.p > 0.0 && r.p < 1.0) || !(r.beta > 0.0) || !(r.c > 0.0)) {
        throw HtlError(ErrorCode::kConfig, "krr: lambda_rule needs beta > 0, p in (0, 1), c > 0");
      }
    }
    if (krr.lengthscale && !krr.lengthscale_grid.empty()) {
      throw HtlError(ErrorCode::kConfig, "krr: lengthscale and lengthscale_grid are exclusive");
    }
    if (krr.kind != RkhsKind::kRbf && (krr.lengthscale || !krr.lengthscale_grid.empty())) {
      throw HtlError(ErrorCode::kConfig, "krr: lengthscale applies to the rbf kernel only");
    }
  }
  if (NeedsSearch() && cv_folds < 2) {
    throw HtlError(ErrorCode::kConfig, "cv_folds must be at least 2");
  }
}

std::string SubroutineSpec::Describe() const {
  std::ostringstream out;
  if (const auto* ks = std::get_if<KsSpec>(&method)) {
    out << "ks(kernel=" << KernelShapeName(ks->kernel.shape());
    if (ks->bandwidth) out << ", h=" << *ks->bandwidth;
    if (ks->bandwidth_rule) out << ", h=rule(alpha=" << ks->bandwidth_rule->alpha << ")";
    if (!ks->bandwidth_grid.empty()) out << ", h=grid[" << ks->bandwidth_grid.size() << "]";
  } else {
    const auto& krr = std::get<KrrSpec>(method);
    out << "krr(kernel="
        << (krr.kind == RkhsKind::kRbf ? "rbf" : krr.kind == RkhsKind::kLinear ? "linear" : "polynomial");
    if (krr.lengthscale) out << ", l=" << *krr.lengthscale;
    if (krr.lambda) out << ", lambda=" << *krr.lambda;
    if (krr.lambda_rule) out << ", lambda=rule(beta=" << krr.lambda_rule->beta << ", p=" << krr.lambda_rule->p << ")";
    if (!krr.lambda_grid.empty()) out << ", lambda=grid[" << krr.lambda_grid.size() << "]";
  }
  out << ")";
  return out.str();
}

PredictorPtr FitSubroutine(const SubroutineSpec& spec, const Dataset& data) {
  spec.Validate();
  if (spec.NeedsSearch()) {
    throw HtlError(ErrorCode::kConfig, "FitSubroutine: unresolved grid in " + spec.Describe());
  }
  if (const auto* ks = std::get_if<KsSpec>(&spec.method)) {
    double h;
    if (ks->bandwidth) {
      h = *ks->bandwidth;
    } else {
      h = KsBandwidthRule(data.size(), data.dim(), ks->bandwidth_rule->alpha,
                          ks->bandwidth_rule->c);
    }
    return std::make_shared<KsPredictor>(data, ks->kernel, h);
  }
  const auto& krr = std::get<KrrSpec>(spec.method);
  const double lambda = krr.lambda ? *krr.lambda
                                   : KrrLambdaRule(data.size(), krr.lambda_rule->beta,
                                                   krr.lambda_rule->p, krr.lambda_rule->c);
  return std::make_shared<KrrPredictor>(KrrFit(data, MakeKernel(krr, data), lambda));
}

std::vector<int> FoldAssignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw HtlError(ErrorCode::kInvalidArgument, "FoldAssignment: folds must be >= 2");
  if (n < folds) {
    throw HtlError(ErrorCode::kInsufficientData,
                   "FoldAssignment: " + std::to_string(n) + " rows cannot fill " +
                       std::to_string(folds) + " folds");
  }
  Rng rng(seed);
  const auto order = rng.Permutation(n);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    fold[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = static_cast<int>(k % folds);
  }
  return fold;
}

std::vector<SubroutineSpec> ExpandGrid(const SubroutineSpec& spec) {
  std::vector<SubroutineSpec> out;
  if (const auto* ks = std::get_if<KsSpec>(&spec.method)) {
    if (ks->bandwidth_grid.empty()) return {spec};
    for (double h : ks->bandwidth_grid) {
      KsSpec point = *ks;
      point.bandwidth_grid.clear();
      point.bandwidth = h;
      out.push_back(SubroutineSpec{point, spec.cv_folds});
    }
    return out;
  }
  const auto& krr = std::get<KrrSpec>(spec.method);
  std::vector<std::optional<double>> lambdas;
  if (krr.lambda_grid.empty()) {
    lambdas.push_back(std::nullopt);
  } else {
    for (double l : krr.lambda_grid) lambdas.emplace_back(l);
  }
  std::vector<std::optional<double>> scales;
  if (krr.lengthscale_grid.empty()) {
    scales.push_back(krr.lengthscale);
  } else {
    for (double l : krr.lengthscale_grid) scales.emplace_back(l);
  }
  for (const auto& lambda : lambdas) {
    for (const auto& scale : scales) {
      KrrSpec point = krr;
      point.lambda_grid.clear();
      point.lengthscale_grid.clear();
      if (lambda) point.lambda = lambda;
      point.lengthscale = scale;
      out.push_back(SubroutineSpec{point, spec.cv_folds});
    }
  }
  return out;
}

std::vector<GridPointScore> ScoreGrid(const Dataset& data, const SubroutineSpec& spec, int folds,
                                      std::uint64_t seed) {
  spec.Validate();
  const auto points = ExpandGrid(spec);
  if (points.empty()) throw HtlError(ErrorCode::kConfig, "ScoreGrid: empty grid");
  const std::vector<int> fold = FoldAssignment(data.size(), folds, seed);

  std::vector<std::vector<Index>> train_rows(static_cast<std::size_t>(folds));
  std::vector<std::vector<Index>> held_rows(static_cast<std::size_t>(folds));
  for (Index i = 0; i < data.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold[static_cast<std::size_t>(i)] == f ? held_rows : train_rows)[static_cast<std::size_t>(f)]
          .push_back(i);
    }
  }
  std::vector<Dataset> train_parts;
  std::vector<Dataset> held_parts;
  for (int f = 0; f < folds; ++f) {
    train_parts.push_back(data.Subset(train_rows[static_cast<std::size_t>(f)], data.tag()));
    held_parts.push_back(data.Subset(held_rows[static_cast<std::size_t>(f)], data.tag()));
  }

  std::vector<GridPointScore> scores;
  for (const auto& point : points) {
    double total = 0.0;
    try {
      for (int f = 0; f < folds; ++f) {
        const auto& held = held_parts[static_cast<std::size_t>(f)];
        const PredictorPtr model = FitSubroutine(point, train_parts[static_cast<std::size_t>(f)]);
        double sse = 0.0;
        for (Index i = 0; i < held.size(); ++i) {
          const double r = held.labels()(i) - model->Predict(held.row(i));
          sse += r * r;
        }
        total += sse / static_cast<double>(held.size());
      }
      total /= folds;
    } catch (const HtlError&) {
      total = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(total)) total = std::numeric_limits<double>::infinity();
    scores.push_back({point, total});
  }
  return scores;
}

SubroutineSpec GridSearchCv(const Dataset& data, const SubroutineSpec& spec, int folds,
                            std::uint64_t seed) {
  const auto scores = ScoreGrid(data, spec, folds, seed);
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k].cv_mse < scores[best].cv_mse) best = k;
  }
  if (!std::isfinite(scores[best].cv_mse)) {
    throw HtlError(ErrorCode::kConditioning, "GridSearchCv: every grid point failed to fit");
  }
  return scores[best].spec;
}

Learner MakeLearner(const SubroutineSpec& spec, std::uint64_t cv_seed) {
  spec.Validate();
  return [spec, cv_seed](const Dataset& data) -> PredictorPtr {
    if (!spec.NeedsSearch()) return FitSubroutine(spec, data);
    return FitSubroutine(GridSearchCv(data, spec, spec.cv_folds, cv_seed), data);
  };
}

}  // namespace htl
