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

#include "htl/pipeline.h"

#include <algorithm>
#include <cmath>

#include "htl/error.h"

namespace htl {
namespace {

void RequireTag(const Dataset& data, DomainTag tag, const char* who) {
  if (data.tag() != tag) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   std::string(who) + ": expected " + DomainTagName(tag) + " data, got " +
                       DomainTagName(data.tag()));
  }
}

}  // namespace

AuxiliaryData ConstructAuxiliary(const Dataset& target, const Predictor& f_so_hat,
                                 const AuxiliaryEstimator& est) {
  RequireTag(target, DomainTag::kTarget, "ConstructAuxiliary");
  const TransformationFunction& tf = est.transformation();
  const double bound = tf.aux_bound();
  const bool guarded = tf.family() == TransformFamily::kScale;

  std::vector<Index> kept;
  std::vector<double> labels;
  Index clipped = 0;
  Index dropped = 0;
  for (Index i = 0; i < target.size(); ++i) {
    const double a = f_so_hat.Predict(target.row(i));
    if (guarded && std::abs(a + tf.parameter()) < tf.singular_guard()) {
      ++dropped;
      continue;
    }
    double w;
    try {
      w = ApplyH(est, a, target.labels()(i));
    } catch (const HtlError& e) {
      throw HtlError(e.code(), "ConstructAuxiliary: row " + std::to_string(i) + ": " + e.what());
    }
    if (std::isnan(w) || (std::isinf(w) && std::isinf(bound))) {
      throw HtlError(ErrorCode::kSingular,
                     "ConstructAuxiliary: row " + std::to_string(i) + ": non-finite auxiliary label");
    }
    if (std::abs(w) > bound) {
      w = std::clamp(w, -bound, bound);
      ++clipped;
    }
    kept.push_back(i);
    labels.push_back(w);
  }
  if (kept.empty()) {
    throw HtlError(ErrorCode::kInsufficientData,
                   "ConstructAuxiliary: every target row fell inside the singular guard of " +
                       tf.Name());
  }
  Dataset subset = target.Subset(kept, DomainTag::kTarget);
  Vector w = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return AuxiliaryData{subset.WithLabels(std::move(w), std::isfinite(bound) ? bound : 0.0),
                       std::move(kept), clipped, dropped};
}

HtlPredictor::HtlPredictor(PredictorPtr f_so_hat, PredictorPtr w_hat, TransformationFunction tf,
                           Index clipped_rows, Index guarded_rows)
    : f_so_hat_(std::move(f_so_hat)),
      w_hat_(std::move(w_hat)),
      tf_(std::move(tf)),
      clipped_rows_(clipped_rows),
      guarded_rows_(guarded_rows) {
  if (!f_so_hat_ || !w_hat_) {
    throw HtlError(ErrorCode::kInvalidArgument, "HtlPredictor: null component predictor");
  }
  if (f_so_hat_->dim() != w_hat_->dim()) {
    throw HtlError(ErrorCode::kInvalidArgument, "HtlPredictor: component dimensions differ");
  }
}

double HtlPredictor::Predict(const Vector& x) const {
  return EvalG(tf_, f_so_hat_->Predict(x), w_hat_->Predict(x));
}

std::string HtlPredictor::Describe() const {
  return "htl(" + tf_.Name() + ", source=" + f_so_hat_->Describe() +
         ", auxiliary=" + w_hat_->Describe() + ")";
}

HtlPredictorPtr HtlFitWithSource(PredictorPtr f_so_hat, const Dataset& target,
                                 const AuxiliaryEstimator& est, const Learner& w_learner) {
  AuxiliaryData aux = ConstructAuxiliary(target, *f_so_hat, est);
  PredictorPtr w_hat = w_learner(aux.data);
  return std::make_shared<HtlPredictor>(std::move(f_so_hat), std::move(w_hat),
                                        est.transformation(), aux.clipped_rows,
                                        aux.guarded_rows);
}

HtlPredictorPtr HtlFit(const Dataset& source, const Dataset& target,
                       const AuxiliaryEstimator& est, const Learner& so_learner,
                       const Learner& w_learner) {
  RequireTag(source, DomainTag::kSource, "HtlFit");
  RequireTag(target, DomainTag::kTarget, "HtlFit");
  if (source.dim() != target.dim()) {
    throw HtlError(ErrorCode::kInvalidArgument, "HtlFit: source and target dimensions differ");
  }
  return HtlFitWithSource(so_learner(source), target, est, w_learner);
}

HtlPredictorPtr HtlFit(const Dataset& source, const Dataset& target,
                       const AuxiliaryEstimator& est, const SubroutineSpec& so_spec,
                       const SubroutineSpec& w_spec) {
  return HtlFit(source, target, est, MakeLearner(so_spec), MakeLearner(w_spec));
}

double HtlPredict(const HtlPredictor& p, const Vector& x) { return p.Predict(x); }

AuxiliaryEstimator DirectEstimator(const TransformationFunction& tf) {
  return AuxiliaryEstimator::Direct(tf);
}

SelectionResult SelectTransformation(const Dataset& source, const Dataset& target,
                                     const Dataset& validation,
                                     const std::vector<TransformationFunction>& candidates,
                                     const EstimatorFactory& est_factory,
                                     const Learner& so_learner, const Learner& w_learner) {
  RequireTag(source, DomainTag::kSource, "SelectTransformation");
  RequireTag(target, DomainTag::kTarget, "SelectTransformation");
  RequireTag(validation, DomainTag::kValidation, "SelectTransformation");
  if (candidates.empty()) {
    throw HtlError(ErrorCode::kInvalidArgument, "SelectTransformation: no candidates");
  }
  const PredictorPtr f_so_hat = so_learner(source);

  std::vector<CandidateScore> scores;
  std::vector<HtlPredictorPtr> fitted(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    CandidateScore score{k, candidates[k].Name(), std::nullopt, ""};
    try {
      fitted[k] = HtlFitWithSource(f_so_hat, target, est_factory(candidates[k]), w_learner);
      double sse = 0.0;
      for (Index i = 0; i < validation.size(); ++i) {
        const double r = validation.labels()(i) - fitted[k]->Predict(validation.row(i));
        sse += r * r;
      }
      const double mse = sse / static_cast<double>(validation.size());
      if (std::isfinite(mse)) {
        score.validation_mse = mse;
      } else {
        score.error = "non-finite validation MSE";
      }
    } catch (const HtlError& e) {
      score.error = e.what();
    }
    scores.push_back(std::move(score));
  }

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (!scores[k].validation_mse) continue;
    if (!best) {
      best = k;
      continue;
    }
    const double mse = *scores[k].validation_mse;
    const double best_mse = *scores[*best].validation_mse;
    if (mse < best_mse ||
        (mse == best_mse &&
         candidates[k].TransferStrength() < candidates[*best].TransferStrength())) {
      best = k;
    }
  }
  if (!best) {
    throw HtlError(ErrorCode::kInsufficientData,
                   "SelectTransformation: every candidate failed; first error: " + scores[0].error);
  }
  return SelectionResult{candidates[*best], *best, std::move(scores), validation.size(),
                         fitted[*best]};
}

SelectionResult SelectTransformation(const Dataset& source, const Dataset& target,
                                     const Dataset& validation, const QuantizedFamily& family,
                                     const EstimatorFactory& est_factory,
                                     const Learner& so_learner, const Learner& w_learner) {
  return SelectTransformation(source, target, validation, family.members, est_factory,
                              so_learner, w_learner);
}

}  // namespace htl
