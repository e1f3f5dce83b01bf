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

#ifndef HTL_PIPELINE_H_
#define HTL_PIPELINE_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "htl/dataset.h"
#include "htl/model_selection.h"
#include "htl/predictor.h"
#include "htl/transform.h"

namespace htl {

struct AuxiliaryData {
  // Rows of the target set with labels H_G(f_so(X_i), Y_i), clipped to
  // [-B, B].
  Dataset data;
  // Indices into the target set of the rows kept in data.
  std::vector<Index> kept_rows;
  Index clipped_rows = 0;
  // Rows dropped because the source prediction fell inside the singular guard
  // of a scale transformation (|f_so(X_i) + alpha| < guard).
  Index guarded_rows = 0;
};

// Builds the auxiliary regression problem from target data. A singular
// inverse at some row is a kSingular error naming the row.
AuxiliaryData ConstructAuxiliary(const Dataset& target, const Predictor& f_so_hat,
                                 const AuxiliaryEstimator& est);

// f_ta(x) = G(f_so(x), w(x)), evaluated afresh on every call.
class HtlPredictor : public Predictor {
 public:
  HtlPredictor(PredictorPtr f_so_hat, PredictorPtr w_hat, TransformationFunction tf,
               Index clipped_rows = 0, Index guarded_rows = 0);

  double Predict(const Vector& x) const override;
  Index dim() const override { return w_hat_->dim(); }
  std::string Describe() const override;

  const PredictorPtr& f_so_hat() const { return f_so_hat_; }
  const PredictorPtr& w_hat() const { return w_hat_; }
  const TransformationFunction& transformation() const { return tf_; }
  Index clipped_rows() const { return clipped_rows_; }
  Index guarded_rows() const { return guarded_rows_; }

 private:
  PredictorPtr f_so_hat_;
  PredictorPtr w_hat_;
  TransformationFunction tf_;
  Index clipped_rows_;
  Index guarded_rows_;
};

using HtlPredictorPtr = std::shared_ptr<const HtlPredictor>;

// Steps 2-4 with an already trained source predictor.
HtlPredictorPtr HtlFitWithSource(PredictorPtr f_so_hat, const Dataset& target,
                                 const AuxiliaryEstimator& est, const Learner& w_learner);

// Trains the source regression, builds the auxiliary data, trains the
// auxiliary regression and composes the two through G.
HtlPredictorPtr HtlFit(const Dataset& source, const Dataset& target,
                       const AuxiliaryEstimator& est, const Learner& so_learner,
                       const Learner& w_learner);
HtlPredictorPtr HtlFit(const Dataset& source, const Dataset& target,
                       const AuxiliaryEstimator& est, const SubroutineSpec& so_spec,
                       const SubroutineSpec& w_spec);

double HtlPredict(const HtlPredictor& p, const Vector& x);

using EstimatorFactory = std::function<AuxiliaryEstimator(const TransformationFunction&)>;

// Direct-inverse estimator for every candidate.
AuxiliaryEstimator DirectEstimator(const TransformationFunction& tf);

struct CandidateScore {
  std::size_t index = 0;
  std::string name;
  // Empirical risk on the validation set; nullopt when the candidate failed.
  std::optional<double> validation_mse;
  std::string error;
};

struct SelectionResult {
  TransformationFunction chosen;
  std::size_t chosen_index = 0;
  std::vector<CandidateScore> per_candidate;
  Index n_val = 0;
  HtlPredictorPtr chosen_predictor;
};

// Validation-set empirical risk minimization over the candidates. The source
// predictor is trained once and shared. Ties in validation MSE go to the
// candidate with the smallest TransferStrength(), then the lowest index.
// Candidates whose fit fails are reported and skipped.
SelectionResult SelectTransformation(const Dataset& source, const Dataset& target,
                                     const Dataset& validation,
                                     const std::vector<TransformationFunction>& candidates,
                                     const EstimatorFactory& est_factory,
                                     const Learner& so_learner, const Learner& w_learner);
SelectionResult SelectTransformation(const Dataset& source, const Dataset& target,
                                     const Dataset& validation, const QuantizedFamily& family,
                                     const EstimatorFactory& est_factory,
                                     const Learner& so_learner, const Learner& w_learner);

}  // namespace htl

#endif  // HTL_PIPELINE_H_
