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

#ifndef HTL_DATASET_H_
#define HTL_DATASET_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>

#include <Eigen/Core>

namespace htl {

class Rng;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// A real-valued function on R^d (regression truths, synthetic generators).
using RealFunction = std::function<double(const Vector&)>;

enum class DomainTag { kSource, kTarget, kValidation };

const char* DomainTagName(DomainTag tag);

// Labeled sample from one domain. Immutable once constructed.
//
// x_bound / y_bound are the norm bounds on rows and labels; 0 means
// "not declared" and disables the corresponding check.
class Dataset {
 public:
  Dataset(Matrix features, Vector labels, DomainTag tag, double x_bound = 0.0,
          double y_bound = 0.0);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  DomainTag tag() const { return tag_; }
  double x_bound() const { return x_bound_; }
  double y_bound() const { return y_bound_; }
  Index size() const { return labels_.size(); }
  Index dim() const { return features_.cols(); }
  Vector row(Index i) const { return features_.row(i).transpose(); }

  // Same features, new labels; the label bound is reset to y_bound.
  Dataset WithLabels(Vector labels, double y_bound = 0.0) const;
  Dataset WithTag(DomainTag tag) const;
  Dataset Subset(std::span<const Index> rows, DomainTag tag) const;

  // Rows of a followed by rows of b.
  static Dataset Concatenate(const Dataset& a, const Dataset& b, DomainTag tag);

 private:
  Matrix features_;
  Vector labels_;
  DomainTag tag_;
  double x_bound_;
  double y_bound_;
};

// Uniform distribution on the box [low, high]^dim.
struct InputSampler {
  Index dim = 1;
  double low = 0.0;
  double high = 1.0;

  Vector Sample(Rng& rng) const;
  // Largest Euclidean norm of a point in the box.
  double NormBound() const;
};

struct SyntheticSpec {
  RealFunction source_fn;
  RealFunction target_fn;
  InputSampler input_sampler;
  double noise_variance_source = 0.0;
  double noise_variance_target = 0.0;
  // Smoothness class of the truths; recorded for reports, never enforced.
  double holder_constant = 1.0;
  double holder_exponent = 1.0;
  // When positive, generated labels are clipped to [-y_bound, y_bound].
  double y_bound = 0.0;

  void Validate() const;
};

// sqrt(x(1-x)) sin(2.1 pi / (x + 0.05)) on [0, 1].
double Doppler(double x);

// Draws n inputs from the sampler, then n Gaussian noise terms, and labels
// each input with the source (kSource) or target (kTarget, kValidation)
// truth plus noise. Pure function of (spec, n, tag, seed).
Dataset GenerateSynthetic(const SyntheticSpec& spec, Index n, DomainTag tag,
                          std::uint64_t seed);

// Label column is selected by header name or by zero-based index.
using ColumnSelector = std::variant<std::string, Index>;

Dataset LoadCsv(const std::string& path, const ColumnSelector& label_column,
                DomainTag tag = DomainTag::kTarget);

// Writes a header (x0..x{d-1},y) and one row per sample, 17 significant
// digits so that LoadCsv restores the values exactly.
void WriteCsv(const Dataset& data, const std::string& path);

// Parts with zero rows are absent.
struct SplitParts {
  Dataset train;
  std::optional<Dataset> validation;
  std::optional<Dataset> test;
};

// Shuffled disjoint partition. Sizes are floor(f_train n), floor(f_val n) and
// the remainder.
SplitParts Split(const Dataset& data, double f_train, double f_val,
                 std::uint64_t seed);

}  // namespace htl

#endif  // HTL_DATASET_H_
