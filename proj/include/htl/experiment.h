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

#ifndef HTL_EXPERIMENT_H_
#define HTL_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "htl/dataset.h"
#include "htl/model_selection.h"
#include "htl/transform.h"

namespace htl {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class ExperimentKind {
  kSyntheticOffset,
  kSyntheticScale,
  kCsvTransfer,
  kRateSweep,
  kSelection,
};

const char* ExperimentKindName(ExperimentKind kind);

// Named building blocks for synthetic truths, all functions of x in the
// sampler box:
//   doppler      Doppler(x0)
//   x0           first coordinate
//   sin4pi       sin(4 pi x0)
//   square       x0^2
//   one, zero    constants
//   kin_smooth   near-linear function of 8 inputs
//   kin_rough    kin_smooth plus oscillating interactions
RealFunction NamedFunction(const std::string& name);

// A truth is a linear combination of named functions.
struct FunctionExpr {
  struct Term {
    std::string fn;
    double coef = 1.0;
  };
  std::vector<Term> terms;

  RealFunction Build() const;
  std::string Describe() const;
};

// A configured transformation plus the auxiliary estimator paired with it.
struct TransformSpec {
  TransformationFunction tf = TransformationFunction::NonTransfer();
  EstimatorMode mode = EstimatorMode::kDirectInverse;
  double sigma2 = 0.0;
  bool noiseless = false;

  AuxiliaryEstimator Estimator() const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSyntheticOffset;

  // Synthetic data.
  FunctionExpr source_fn;
  FunctionExpr target_fn;
  InputSampler sampler;
  double noise_variance_source = 0.0;
  double noise_variance_target = 0.0;
  double holder_constant = 1.0;
  double holder_exponent = 1.0;

  // CSV data (csv_transfer), resolved against the config file directory.
  std::string source_csv;
  std::string target_csv;
  ColumnSelector label_column = std::string("y");

  // n_so == 0 means "all source rows" for csv_transfer.
  Index n_so = 0;
  std::vector<Index> n_ta;
  Index n_val = 0;
  Index n_test = 1000;

  SubroutineSpec source_method;
  SubroutineSpec auxiliary_method;
  std::vector<std::string> baselines;
  std::vector<TransformSpec> transformations;

  // Selection candidates: a quantized offset family and/or explicit specs.
  std::optional<QuantizedFamily> quantized_family;
  std::vector<TransformSpec> candidates;

  Index n_mc = 2000;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";

  // The parsed document, echoed in the report.
  nlohmann::json raw;

  SyntheticSpec Synthetic() const;
  bool is_synthetic() const { return kind != ExperimentKind::kCsvTransfer; }
};

// Parses and validates a JSON config. Syntax errors name the line; schema
// errors name the JSON pointer of the offending field. Both are kConfig.
ExperimentConfig ParseConfig(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig LoadConfig(const std::string& path);

struct ExperimentReport {
  nlohmann::json report;
  std::string rows_csv;
  std::string series_csv;
  bool partial_failure = false;

  // report.json, rows.csv, series.csv; no timestamps so identical configs
  // give identical bytes.
  void Write(const std::string& dir) const;
};

// Runs every (seed, n_ta, method) cell. A failing method is recorded in its
// row and the run continues.
ExperimentReport RunExperiment(const ExperimentConfig& config);

// Writes source.csv, target.csv (max n_ta rows) and, with n_val > 0,
// validation.csv for the first seed. Returns the written paths.
std::vector<std::string> WriteSyntheticData(const ExperimentConfig& config,
                                            const std::string& dir);

}  // namespace htl

#endif  // HTL_EXPERIMENT_H_
