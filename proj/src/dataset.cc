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

#include "htl/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "htl/error.h"
#include "htl/random.h"

namespace htl {
namespace {

// Relative slack on the declared bounds.
constexpr double kBoundSlack = 1e-12;

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool ParseReal(const std::string& text, double& value) {
  const std::string cell = Trim(text);
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

}  // namespace

const char* DomainTagName(DomainTag tag) {
  switch (tag) {
    case DomainTag::kSource: return "source";
    case DomainTag::kTarget: return "target";
    case DomainTag::kValidation: return "validation";
  }
  return "unknown";
}

Dataset::Dataset(Matrix features, Vector labels, DomainTag tag, double x_bound,
                 double y_bound)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      tag_(tag),
      x_bound_(x_bound),
      y_bound_(y_bound) {
  if (labels_.size() < 1) {
    throw HtlError(ErrorCode::kInsufficientData, "Dataset: at least one row is required");
  }
  if (features_.rows() != labels_.size()) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "Dataset: " + std::to_string(features_.rows()) + " feature rows but " +
                       std::to_string(labels_.size()) + " labels");
  }
  if (features_.cols() < 1) {
    throw HtlError(ErrorCode::kInvalidArgument, "Dataset: features need at least one column");
  }
  if (!(x_bound_ >= 0.0) || !(y_bound_ >= 0.0)) {
    throw HtlError(ErrorCode::kInvalidArgument, "Dataset: bounds must be nonnegative");
  }
  if (!features_.allFinite() || !labels_.allFinite()) {
    throw HtlError(ErrorCode::kInvalidArgument, "Dataset: non-finite value");
  }
  if (x_bound_ > 0.0) {
    const double limit = x_bound_ * (1.0 + kBoundSlack);
    for (Index i = 0; i < features_.rows(); ++i) {
      if (features_.row(i).norm() > limit) {
        throw HtlError(ErrorCode::kInvalidArgument,
                       "Dataset: row " + std::to_string(i) + " exceeds x_bound");
      }
    }
  }
  if (y_bound_ > 0.0 && labels_.cwiseAbs().maxCoeff() > y_bound_ * (1.0 + kBoundSlack)) {
    throw HtlError(ErrorCode::kInvalidArgument, "Dataset: label exceeds y_bound");
  }
}

Dataset Dataset::WithLabels(Vector labels, double y_bound) const {
  return Dataset(features_, std::move(labels), tag_, x_bound_, y_bound);
}

Dataset Dataset::WithTag(DomainTag tag) const {
  return Dataset(features_, labels_, tag, x_bound_, y_bound_);
}

Dataset Dataset::Subset(std::span<const Index> rows, DomainTag tag) const {
  Matrix features(static_cast<Index>(rows.size()), dim());
  Vector labels(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= size()) {
      throw HtlError(ErrorCode::kInvalidArgument, "Dataset::Subset: row out of range");
    }
    features.row(static_cast<Index>(k)) = features_.row(r);
    labels(static_cast<Index>(k)) = labels_(r);
  }
  return Dataset(std::move(features), std::move(labels), tag, x_bound_, y_bound_);
}

Dataset Dataset::Concatenate(const Dataset& a, const Dataset& b, DomainTag tag) {
  if (a.dim() != b.dim()) {
    throw HtlError(ErrorCode::kInvalidArgument, "Dataset::Concatenate: dimension mismatch");
  }
  Matrix features(a.size() + b.size(), a.dim());
  features << a.features(), b.features();
  Vector labels(a.size() + b.size());
  labels << a.labels(), b.labels();
  const double x_bound =
      (a.x_bound() > 0.0 && b.x_bound() > 0.0) ? std::max(a.x_bound(), b.x_bound()) : 0.0;
  const double y_bound =
      (a.y_bound() > 0.0 && b.y_bound() > 0.0) ? std::max(a.y_bound(), b.y_bound()) : 0.0;
  return Dataset(std::move(features), std::move(labels), tag, x_bound, y_bound);
}

Vector InputSampler::Sample(Rng& rng) const {
  Vector x(dim);
  for (Index j = 0; j < dim; ++j) x(j) = rng.Uniform(low, high);
  return x;
}

double InputSampler::NormBound() const {
  const double corner = std::max(std::abs(low), std::abs(high));
  return corner * std::sqrt(static_cast<double>(dim));
}

void SyntheticSpec::Validate() const {
  if (!source_fn || !target_fn) {
    throw HtlError(ErrorCode::kConfig, "SyntheticSpec: source and target functions are required");
  }
  if (!(noise_variance_source >= 0.0) || !(noise_variance_target >= 0.0)) {
    throw HtlError(ErrorCode::kConfig, "SyntheticSpec: noise variances must be nonnegative");
  }
  if (!(holder_exponent > 0.0 && holder_exponent <= 1.0)) {
    throw HtlError(ErrorCode::kConfig, "SyntheticSpec: holder_exponent must lie in (0, 1]");
  }
  if (!(holder_constant > 0.0)) {
    throw HtlError(ErrorCode::kConfig, "SyntheticSpec: holder_constant must be positive");
  }
  if (input_sampler.dim < 1 || !(input_sampler.high > input_sampler.low)) {
    throw HtlError(ErrorCode::kConfig, "SyntheticSpec: empty input box");
  }
}

double Doppler(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw HtlError(ErrorCode::kDomain, "Doppler: x = " + std::to_string(x) + " outside [0, 1]");
  }
  return std::sqrt(x * (1.0 - x)) * std::sin(2.1 * std::numbers::pi / (x + 0.05));
}

Dataset GenerateSynthetic(const SyntheticSpec& spec, Index n, DomainTag tag,
                          std::uint64_t seed) {
  spec.Validate();
  if (n < 1) {
    throw HtlError(ErrorCode::kInvalidArgument, "GenerateSynthetic: n must be positive");
  }
  const bool source = tag == DomainTag::kSource;
  const RealFunction& truth = source ? spec.source_fn : spec.target_fn;
  const double stddev =
      std::sqrt(source ? spec.noise_variance_source : spec.noise_variance_target);

  Rng rng(seed);
  Matrix features(n, spec.input_sampler.dim);
  for (Index i = 0; i < n; ++i) features.row(i) = spec.input_sampler.Sample(rng).transpose();
  Vector labels(n);
  for (Index i = 0; i < n; ++i) {
    const double noise = stddev > 0.0 ? stddev * rng.Normal() : 0.0;
    double y = truth(features.row(i).transpose()) + noise;
    if (spec.y_bound > 0.0) y = std::clamp(y, -spec.y_bound, spec.y_bound);
    labels(i) = y;
  }
  return Dataset(std::move(features), std::move(labels), tag, spec.input_sampler.NormBound(),
                 spec.y_bound);
}

Dataset LoadCsv(const std::string& path, const ColumnSelector& label_column, DomainTag tag) {
  std::ifstream in(path);
  if (!in) throw HtlError(ErrorCode::kIo, "LoadCsv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw HtlError(ErrorCode::kInsufficientData, "LoadCsv: '" + path + "' is empty");
  }
  std::vector<std::string> header = SplitLine(line);
  for (auto& name : header) name = Trim(name);
  const auto width = static_cast<Index>(header.size());

  Index label_index = -1;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it != header.end()) label_index = it - header.begin();
    if (label_index < 0) {
      throw HtlError(ErrorCode::kMissingColumn,
                     "LoadCsv: label column '" + *name + "' not in header of '" + path + "'");
    }
  } else {
    label_index = std::get<Index>(label_column);
    if (label_index < 0 || label_index >= width) {
      throw HtlError(ErrorCode::kMissingColumn,
                     "LoadCsv: label column index " + std::to_string(label_index) +
                         " out of range for " + std::to_string(width) + " columns");
    }
  }
  if (width < 2) {
    throw HtlError(ErrorCode::kInvalidArgument, "LoadCsv: need at least one feature column");
  }

  std::vector<double> values;
  Index rows = 0;
  Index line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    const auto cells = SplitLine(line);
    if (static_cast<Index>(cells.size()) != width) {
      throw HtlError(ErrorCode::kRaggedRow,
                     "LoadCsv: line " + std::to_string(line_number) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(width));
    }
    for (Index c = 0; c < width; ++c) {
      double v;
      if (!ParseReal(cells[static_cast<std::size_t>(c)], v)) {
        throw HtlError(ErrorCode::kParse,
                       "LoadCsv: row " + std::to_string(rows + 1) + " (line " +
                           std::to_string(line_number) + "), column '" +
                           header[static_cast<std::size_t>(c)] + "': cannot parse '" +
                           Trim(cells[static_cast<std::size_t>(c)]) + "' as a finite real");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    throw HtlError(ErrorCode::kInsufficientData, "LoadCsv: '" + path + "' has no data rows");
  }

  Matrix features(rows, width - 1);
  Vector labels(rows);
  for (Index r = 0; r < rows; ++r) {
    Index out = 0;
    for (Index c = 0; c < width; ++c) {
      const double v = values[static_cast<std::size_t>(r * width + c)];
      if (c == label_index) {
        labels(r) = v;
      } else {
        features(r, out++) = v;
      }
    }
  }
  const double x_bound = features.rowwise().norm().maxCoeff();
  const double y_bound = labels.cwiseAbs().maxCoeff();
  return Dataset(std::move(features), std::move(labels), tag, x_bound, y_bound);
}

void WriteCsv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw HtlError(ErrorCode::kIo, "WriteCsv: cannot open '" + path + "'");
  for (Index j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  char buffer[32];
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", data.features()(i, j));
      out << buffer << ',';
    }
    std::snprintf(buffer, sizeof(buffer), "%.17g", data.labels()(i));
    out << buffer << '\n';
  }
  if (!out) throw HtlError(ErrorCode::kIo, "WriteCsv: write to '" + path + "' failed");
}

SplitParts Split(const Dataset& data, double f_train, double f_val, std::uint64_t seed) {
  if (!(f_train >= 0.0) || !(f_val >= 0.0) || f_train + f_val > 1.0 + 1e-12) {
    throw HtlError(ErrorCode::kInvalidArgument,
                   "Split: fractions must be nonnegative and sum to at most 1");
  }
  const Index n = data.size();
  // 0.29 * 100 rounds to 28.999999999999996.
  const auto part = [n](double f) {
    return static_cast<Index>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const Index n_train = std::min(part(f_train), n);
  const Index n_val = std::min(part(f_val), n - n_train);
  if (n_train < 1) {
    throw HtlError(ErrorCode::kInsufficientData,
                   "Split: training part is empty (f_train * n < 1)");
  }

  Rng rng(seed);
  const std::vector<Index> order = rng.Permutation(n);
  const std::span<const Index> all(order);
  SplitParts parts{data.Subset(all.subspan(0, static_cast<std::size_t>(n_train)), data.tag()),
                   std::nullopt, std::nullopt};
  if (n_val > 0) {
    parts.validation = data.Subset(
        all.subspan(static_cast<std::size_t>(n_train), static_cast<std::size_t>(n_val)),
        DomainTag::kValidation);
  }
  if (n_train + n_val < n) {
    parts.test = data.Subset(all.subspan(static_cast<std::size_t>(n_train + n_val)), data.tag());
  }
  return parts;
}

}  // namespace htl
