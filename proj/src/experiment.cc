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

#include "htl/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "htl/error.h"
#include "htl/evaluation.h"
#include "htl/kernel_smoothing.h"
#include "htl/pipeline.h"
#include "htl/random.h"

namespace htl {

using nlohmann::json;

namespace {

// Sub-seed streams of one experiment seed.
enum Stream : std::uint64_t {
  kSourceStream = 1,
  kTargetStream = 2,
  kValidationStream = 3,
  kTestStream = 4,
  kCvStream = 5,
  kMonteCarloStream = 6,
};

[[noreturn]] void ConfigError(const std::string& path, const std::string& message) {
  throw HtlError(ErrorCode::kConfig, "config " + (path.empty() ? "/" : path) + ": " + message);
}

void CheckKeys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) ConfigError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      ConfigError(path + "/" + key, "unknown field");
    }
  }
}

const json* Find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double GetNumber(const json& obj, const std::string& path, const char* key,
                 std::optional<double> fallback = std::nullopt) {
  const json* v = Find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    ConfigError(path + "/" + key, "required field missing");
  }
  if (!v->is_number()) ConfigError(path + "/" + key, "expected a number");
  return v->get<double>();
}

Index GetCount(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    ConfigError(path, "expected a nonnegative integer");
  }
  return static_cast<Index>(v.get<std::int64_t>());
}

std::string GetString(const json& obj, const std::string& path, const char* key,
                      std::optional<std::string> fallback = std::nullopt) {
  const json* v = Find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    ConfigError(path + "/" + key, "required field missing");
  }
  if (!v->is_string()) ConfigError(path + "/" + key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> GetNumberList(const json& obj, const std::string& path, const char* key) {
  std::vector<double> out;
  const json* v = Find(obj, key);
  if (!v) return out;
  if (!v->is_array() || v->empty()) ConfigError(path + "/" + key, "expected a nonempty array");
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) ConfigError(path + "/" + key + "/" + std::to_string(i), "expected a number");
    out.push_back((*v)[i].get<double>());
  }
  return out;
}

// Rethrows library validation errors with the config path attached.
template <typename F>
auto AtPath(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const HtlError& e) {
    if (e.code() == ErrorCode::kConfig && std::string(e.what()).rfind("config ", 0) == 0) throw;
    ConfigError(path, e.what());
  }
}

double KinSmooth(const Vector& x) {
  static constexpr double kWeights[8] = {1.0, -0.8, 0.6, -0.4, 0.5, -0.3, 0.2, -0.1};
  double s = 0.5;
  for (Index j = 0; j < std::min<Index>(x.size(), 8); ++j) s += 0.1 * kWeights[j] * x(j);
  return s + 0.05 * std::sin(std::numbers::pi * x(0));
}

double KinRough(const Vector& x) {
  const double x1 = x.size() > 1 ? x(1) : 0.0;
  const double x2 = x.size() > 2 ? x(2) : 0.0;
  const double x3 = x.size() > 3 ? x(3) : 0.0;
  return KinSmooth(x) + 0.3 * std::sin(6.0 * std::numbers::pi * x(0)) * std::cos(4.0 * std::numbers::pi * x1) +
         0.2 * std::sin(5.0 * std::numbers::pi * (x2 - x3));
}

FunctionExpr ParseFunctionExpr(const json& v, const std::string& path) {
  FunctionExpr expr;
  const auto add_term = [&](const json& term, const std::string& at) {
    if (term.is_string()) {
      expr.terms.push_back({term.get<std::string>(), 1.0});
      return;
    }
    CheckKeys(term, at, {"fn", "coef"});
    expr.terms.push_back({GetString(term, at, "fn"), GetNumber(term, at, "coef", 1.0)});
  };
  if (v.is_string()) {
    add_term(v, path);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) add_term(v[i], path + "/" + std::to_string(i));
  } else if (v.is_object()) {
    CheckKeys(v, path, {"terms"});
    const json* terms = Find(v, "terms");
    if (!terms || !terms->is_array()) ConfigError(path + "/terms", "expected an array");
    for (std::size_t i = 0; i < terms->size(); ++i) {
      add_term((*terms)[i], path + "/terms/" + std::to_string(i));
    }
  } else {
    ConfigError(path, "expected a function name, a term list or {\"terms\": [...]}");
  }
  if (expr.terms.empty()) ConfigError(path, "empty function expression");
  for (std::size_t i = 0; i < expr.terms.size(); ++i) {
    AtPath(path, [&] { return NamedFunction(expr.terms[i].fn); });
  }
  return expr;
}

SubroutineSpec ParseSubroutine(const json& v, const std::string& path) {
  const std::string method = GetString(v, path, "method");
  SubroutineSpec spec;
  if (const json* folds = Find(v, "cv_folds")) {
    spec.cv_folds = static_cast<int>(GetCount(*folds, path + "/cv_folds"));
  }
  if (method == "ks") {
    CheckKeys(v, path, {"method", "kernel", "bandwidth", "bandwidth_rule", "bandwidth_grid", "cv_folds"});
    KsSpec ks;
    ks.kernel = SmoothingKernel(AtPath(path + "/kernel", [&] {
      return ParseKernelShape(GetString(v, path, "kernel", "truncated_gaussian"));
    }));
    if (Find(v, "bandwidth")) ks.bandwidth = GetNumber(v, path, "bandwidth");
    if (const json* rule = Find(v, "bandwidth_rule")) {
      const std::string at = path + "/bandwidth_rule";
      CheckKeys(*rule, at, {"alpha", "c"});
      ks.bandwidth_rule = BandwidthRule{GetNumber(*rule, at, "alpha"), GetNumber(*rule, at, "c", 1.0)};
    }
    ks.bandwidth_grid = GetNumberList(v, path, "bandwidth_grid");
    spec.method = ks;
  } else if (method == "krr") {
    CheckKeys(v, path, {"method", "kernel", "degree", "offset", "lengthscale", "lengthscale_grid",
                        "lambda", "lambda_rule", "lambda_grid", "cv_folds"});
    KrrSpec krr;
    const std::string kernel = GetString(v, path, "kernel", "rbf");
    if (kernel == "rbf") {
      krr.kind = RkhsKind::kRbf;
    } else if (kernel == "linear") {
      krr.kind = RkhsKind::kLinear;
    } else if (kernel == "polynomial") {
      krr.kind = RkhsKind::kPolynomial;
    } else {
      ConfigError(path + "/kernel", "unknown RKHS kernel '" + kernel + "'");
    }
    krr.degree = static_cast<int>(GetNumber(v, path, "degree", 2.0));
    krr.offset = GetNumber(v, path, "offset", 1.0);
    if (Find(v, "lengthscale")) krr.lengthscale = GetNumber(v, path, "lengthscale");
    krr.lengthscale_grid = GetNumberList(v, path, "lengthscale_grid");
    if (Find(v, "lambda")) krr.lambda = GetNumber(v, path, "lambda");
    if (const json* rule = Find(v, "lambda_rule")) {
      const std::string at = path + "/lambda_rule";
      CheckKeys(*rule, at, {"beta", "p", "c"});
      krr.lambda_rule = LambdaRule{GetNumber(*rule, at, "beta"), GetNumber(*rule, at, "p"),
                                   GetNumber(*rule, at, "c", 1.0)};
    }
    krr.lambda_grid = GetNumberList(v, path, "lambda_grid");
    spec.method = krr;
  } else {
    ConfigError(path + "/method", "expected \"ks\" or \"krr\", got '" + method + "'");
  }
  AtPath(path, [&] {
    spec.Validate();
    return 0;
  });
  return spec;
}

TransformSpec ParseTransform(const json& v, const std::string& path) {
  CheckKeys(v, path, {"family", "alpha", "beta", "lipschitz_L", "aux_bound_B", "estimator_mode",
                      "sigma2", "noiseless", "singular_guard"});
  const std::string family = GetString(v, path, "family");
  TransformSpec spec;
  spec.tf = AtPath(path, [&] {
    if (family == "offset") return TransformationFunction::Offset(GetNumber(v, path, "alpha"));
    if (family == "scale") {
      return TransformationFunction::Scale(
          GetNumber(v, path, "alpha"),
          GetNumber(v, path, "singular_guard", TransformationFunction::kDefaultScaleGuard));
    }
    if (family == "non_transfer") return TransformationFunction::NonTransfer();
    if (family == "loglinear") return TransformationFunction::LogLinear(GetNumber(v, path, "beta"));
    ConfigError(path + "/family", "unknown transformation family '" + family + "'");
  });
  if (Find(v, "lipschitz_L") || Find(v, "aux_bound_B")) {
    const double l = GetNumber(v, path, "lipschitz_L", spec.tf.lipschitz());
    const double b = GetNumber(v, path, "aux_bound_B", spec.tf.aux_bound());
    spec.tf = AtPath(path, [&] { return spec.tf.WithBounds(l, b); });
  }
  const std::string mode = GetString(v, path, "estimator_mode", "direct");
  if (mode == "direct") {
    spec.mode = EstimatorMode::kDirectInverse;
  } else if (mode == "calibrated") {
    spec.mode = EstimatorMode::kCalibrated;
  } else {
    ConfigError(path + "/estimator_mode", "expected \"direct\" or \"calibrated\"");
  }
  spec.sigma2 = GetNumber(v, path, "sigma2", 0.0);
  if (const json* n = Find(v, "noiseless")) {
    if (!n->is_boolean()) ConfigError(path + "/noiseless", "expected a boolean");
    spec.noiseless = n->get<bool>();
  }
  AtPath(path, [&] { return spec.Estimator(); });
  return spec;
}

std::vector<TransformSpec> ParseTransformList(const json& v, const std::string& path) {
  if (!v.is_array()) ConfigError(path, "expected an array");
  std::vector<TransformSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(ParseTransform(v[i], path + "/" + std::to_string(i)));
  return out;
}

std::string FormatReal(double v) {
  if (std::isnan(v)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Row {
  std::string method;
  Index n_ta = 0;
  std::uint64_t seed = 0;
  std::size_t seed_index = 0;
  bool ok = false;
  std::string error;
  MetricReport metrics;
  double excess_risk = std::numeric_limits<double>::quiet_NaN();
  Index clipped_rows = 0;
  Index guarded_rows = 0;
  std::string model;
};

struct MeanSd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

// Sample mean and (n - 1) standard deviation over the finite values.
MeanSd Summarize(const std::vector<double>& values) {
  MeanSd out;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++out.count;
  }
  if (out.count == 0) return out;
  out.mean = sum / static_cast<double>(out.count);
  if (out.count > 1) {
    double ss = 0.0;
    for (double v : values) {
      if (std::isfinite(v)) ss += (v - out.mean) * (v - out.mean);
    }
    out.sd = std::sqrt(ss / static_cast<double>(out.count - 1));
  }
  return out;
}

// Per-seed data shared by every method and n_ta value.
struct SeedData {
  std::optional<Dataset> source;
  std::optional<Dataset> target;  // max(n_ta) rows; smaller sizes take a prefix
  std::optional<Dataset> validation;
  std::optional<Dataset> test;
};

SeedData SyntheticSeedData(const ExperimentConfig& config, const SyntheticSpec& spec,
                           std::uint64_t seed, Index max_n_ta) {
  SeedData data;
  if (config.n_so > 0) {
    data.source = GenerateSynthetic(spec, config.n_so, DomainTag::kSource, DeriveSeed(seed, kSourceStream));
  }
  data.target = GenerateSynthetic(spec, max_n_ta, DomainTag::kTarget, DeriveSeed(seed, kTargetStream));
  if (config.n_val > 0) {
    data.validation = GenerateSynthetic(spec, config.n_val, DomainTag::kValidation,
                                        DeriveSeed(seed, kValidationStream));
  }
  data.test = GenerateSynthetic(spec, config.n_test, DomainTag::kTarget, DeriveSeed(seed, kTestStream));
  return data;
}

SeedData CsvSeedData(const ExperimentConfig& config, const Dataset& source_all,
                     const Dataset& target_all, std::uint64_t seed, Index max_n_ta) {
  SeedData data;
  Rng source_rng(DeriveSeed(seed, kSourceStream));
  const auto source_order = source_rng.Permutation(source_all.size());
  const Index n_so = config.n_so > 0 ? config.n_so : source_all.size();
  data.source = source_all.Subset(std::span<const Index>(source_order).subspan(0, static_cast<std::size_t>(n_so)),
                                  DomainTag::kSource);

  Rng target_rng(DeriveSeed(seed, kTargetStream));
  const auto order = target_rng.Permutation(target_all.size());
  const std::span<const Index> rows(order);
  data.target = target_all.Subset(rows.subspan(0, static_cast<std::size_t>(max_n_ta)), DomainTag::kTarget);
  Index next = max_n_ta;
  if (config.n_val > 0) {
    data.validation = target_all.Subset(
        rows.subspan(static_cast<std::size_t>(next), static_cast<std::size_t>(config.n_val)),
        DomainTag::kValidation);
    next += config.n_val;
  }
  auto rest = rows.subspan(static_cast<std::size_t>(next));
  if (config.n_test > 0 && static_cast<Index>(rest.size()) > config.n_test) {
    rest = rest.subspan(0, static_cast<std::size_t>(config.n_test));
  }
  data.test = target_all.Subset(rest, DomainTag::kTarget);
  return data;
}

Dataset Prefix(const Dataset& data, Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  return data.Subset(rows, data.tag());
}

}  // namespace

const char* ExperimentKindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSyntheticOffset: return "synthetic_offset";
    case ExperimentKind::kSyntheticScale: return "synthetic_scale";
    case ExperimentKind::kCsvTransfer: return "csv_transfer";
    case ExperimentKind::kRateSweep: return "rate_sweep";
    case ExperimentKind::kSelection: return "selection";
  }
  return "unknown";
}

RealFunction NamedFunction(const std::string& name) {
  if (name == "doppler") return [](const Vector& x) { return Doppler(x(0)); };
  if (name == "x0") return [](const Vector& x) { return x(0); };
  if (name == "sin4pi") return [](const Vector& x) { return std::sin(4.0 * std::numbers::pi * x(0)); };
  if (name == "square") return [](const Vector& x) { return x(0) * x(0); };
  if (name == "one") return [](const Vector&) { return 1.0; };
  if (name == "zero") return [](const Vector&) { return 0.0; };
  if (name == "kin_smooth") return KinSmooth;
  if (name == "kin_rough") return KinRough;
  throw HtlError(ErrorCode::kConfig, "unknown function '" + name + "'");
}

RealFunction FunctionExpr::Build() const {
  std::vector<std::pair<RealFunction, double>> parts;
  for (const auto& term : terms) parts.emplace_back(NamedFunction(term.fn), term.coef);
  return [parts](const Vector& x) {
    double sum = 0.0;
    for (const auto& [fn, coef] : parts) sum += coef * fn(x);
    return sum;
  };
}

std::string FunctionExpr::Describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out << " + ";
    if (terms[i].coef != 1.0) out << terms[i].coef << "*";
    out << terms[i].fn;
  }
  return out.str();
}

AuxiliaryEstimator TransformSpec::Estimator() const {
  if (mode == EstimatorMode::kCalibrated) return AuxiliaryEstimator::Calibrated(tf, sigma2);
  return AuxiliaryEstimator::Direct(tf, noiseless);
}

SyntheticSpec ExperimentConfig::Synthetic() const {
  SyntheticSpec spec;
  spec.source_fn = source_fn.Build();
  spec.target_fn = target_fn.Build();
  spec.input_sampler = sampler;
  spec.noise_variance_source = noise_variance_source;
  spec.noise_variance_target = noise_variance_target;
  spec.holder_constant = holder_constant;
  spec.holder_exponent = holder_exponent;
  return spec;
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n');
    throw HtlError(ErrorCode::kConfig, "config line " + std::to_string(line) + ": " + e.what());
  }
  CheckKeys(doc, "", {"experiment_kind", "data", "sizes", "methods", "transformations", "selection",
                      "rate_sweep", "seeds", "output_dir"});

  ExperimentConfig config;
  config.raw = doc;
  const std::string kind = GetString(doc, "", "experiment_kind");
  bool known = false;
  for (auto k : {ExperimentKind::kSyntheticOffset, ExperimentKind::kSyntheticScale,
                 ExperimentKind::kCsvTransfer, ExperimentKind::kRateSweep, ExperimentKind::kSelection}) {
    if (kind == ExperimentKindName(k)) {
      config.kind = k;
      known = true;
    }
  }
  if (!known) ConfigError("/experiment_kind", "unknown experiment kind '" + kind + "'");

  // data
  const json* data = Find(doc, "data");
  if (!data) ConfigError("/data", "required field missing");
  CheckKeys(*data, "/data", {"source_fn", "target_fn", "input", "noise_variance_source",
                             "noise_variance_target", "holder_constant", "holder_exponent",
                             "source_csv", "target_csv", "label_column"});
  if (config.is_synthetic()) {
    const json* s = Find(*data, "source_fn");
    const json* t = Find(*data, "target_fn");
    if (!s) ConfigError("/data/source_fn", "required field missing");
    if (!t) ConfigError("/data/target_fn", "required field missing");
    config.source_fn = ParseFunctionExpr(*s, "/data/source_fn");
    config.target_fn = ParseFunctionExpr(*t, "/data/target_fn");
    if (const json* input = Find(*data, "input")) {
      CheckKeys(*input, "/data/input", {"dim", "low", "high"});
      config.sampler.dim = Find(*input, "dim") ? GetCount((*input)["dim"], "/data/input/dim") : 1;
      config.sampler.low = GetNumber(*input, "/data/input", "low", 0.0);
      config.sampler.high = GetNumber(*input, "/data/input", "high", 1.0);
    }
    config.noise_variance_source = GetNumber(*data, "/data", "noise_variance_source", 0.0);
    config.noise_variance_target = GetNumber(*data, "/data", "noise_variance_target", 0.0);
    config.holder_constant = GetNumber(*data, "/data", "holder_constant", 1.0);
    config.holder_exponent = GetNumber(*data, "/data", "holder_exponent", 1.0);
    AtPath("/data", [&] {
      config.Synthetic().Validate();
      return 0;
    });
  } else {
    const auto resolve = [&](const char* key) {
      std::filesystem::path p = GetString(*data, "/data", key);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      if (!std::filesystem::exists(p)) {
        ConfigError(std::string("/data/") + key, "file '" + p.string() + "' does not exist");
      }
      return p.string();
    };
    config.source_csv = resolve("source_csv");
    config.target_csv = resolve("target_csv");
    if (const json* label = Find(*data, "label_column")) {
      if (label->is_string()) {
        config.label_column = label->get<std::string>();
      } else {
        config.label_column = GetCount(*label, "/data/label_column");
      }
    }
  }

  // sizes
  const json* sizes = Find(doc, "sizes");
  if (!sizes) ConfigError("/sizes", "required field missing");
  CheckKeys(*sizes, "/sizes", {"n_so", "n_ta", "n_val", "n_test"});
  if (const json* n_so = Find(*sizes, "n_so")) config.n_so = GetCount(*n_so, "/sizes/n_so");
  const json* n_ta = Find(*sizes, "n_ta");
  if (!n_ta) ConfigError("/sizes/n_ta", "required field missing");
  if (n_ta->is_array()) {
    for (std::size_t i = 0; i < n_ta->size(); ++i) {
      config.n_ta.push_back(GetCount((*n_ta)[i], "/sizes/n_ta/" + std::to_string(i)));
    }
  } else {
    config.n_ta.push_back(GetCount(*n_ta, "/sizes/n_ta"));
  }
  if (config.n_ta.empty()) ConfigError("/sizes/n_ta", "needs at least one value");
  for (Index n : config.n_ta) {
    if (n < 1) ConfigError("/sizes/n_ta", "sizes must be positive");
  }
  if (std::set<Index>(config.n_ta.begin(), config.n_ta.end()).size() != config.n_ta.size()) {
    ConfigError("/sizes/n_ta", "duplicate size");
  }
  if (const json* v = Find(*sizes, "n_val")) config.n_val = GetCount(*v, "/sizes/n_val");
  if (const json* v = Find(*sizes, "n_test")) config.n_test = GetCount(*v, "/sizes/n_test");
  if (config.is_synthetic() && config.n_so < 1) ConfigError("/sizes/n_so", "must be positive");
  if (config.is_synthetic() && config.n_test < 2) ConfigError("/sizes/n_test", "must be at least 2");
  if (config.kind == ExperimentKind::kSelection && config.n_val < 1) {
    ConfigError("/sizes/n_val", "selection needs a validation set");
  }

  // methods
  const json* methods = Find(doc, "methods");
  if (!methods) ConfigError("/methods", "required field missing");
  CheckKeys(*methods, "/methods", {"source", "auxiliary", "baselines"});
  const json* source = Find(*methods, "source");
  const json* auxiliary = Find(*methods, "auxiliary");
  if (!source) ConfigError("/methods/source", "required field missing");
  if (!auxiliary) ConfigError("/methods/auxiliary", "required field missing");
  config.source_method = ParseSubroutine(*source, "/methods/source");
  config.auxiliary_method = ParseSubroutine(*auxiliary, "/methods/auxiliary");
  if (const json* baselines = Find(*methods, "baselines")) {
    if (!baselines->is_array()) ConfigError("/methods/baselines", "expected an array");
    for (std::size_t i = 0; i < baselines->size(); ++i) {
      const std::string at = "/methods/baselines/" + std::to_string(i);
      if (!(*baselines)[i].is_string()) ConfigError(at, "expected a string");
      const std::string name = (*baselines)[i].get<std::string>();
      if (name != "only_target" && name != "only_source" && name != "combined") {
        ConfigError(at, "unknown baseline '" + name + "' (only_target, only_source, combined)");
      }
      if (std::find(config.baselines.begin(), config.baselines.end(), name) != config.baselines.end()) {
        ConfigError(at, "duplicate baseline '" + name + "'");
      }
      config.baselines.push_back(name);
    }
  }

  if (const json* t = Find(doc, "transformations")) {
    config.transformations = ParseTransformList(*t, "/transformations");
  }

  if (const json* sel = Find(doc, "selection")) {
    CheckKeys(*sel, "/selection", {"quantized_offset", "candidates"});
    if (const json* q = Find(*sel, "quantized_offset")) {
      const std::string at = "/selection/quantized_offset";
      CheckKeys(*q, at, {"L_alpha", "L_a", "K"});
      const double l_alpha = GetNumber(*q, at, "L_alpha");
      const double l_a = GetNumber(*q, at, "L_a");
      const json* k = Find(*q, "K");
      if (!k) ConfigError(at + "/K", "required field missing");
      const auto k_value = static_cast<int>(GetCount(*k, at + "/K"));
      config.quantized_family = AtPath(at, [&] { return QuantizeOffsetFamily(l_alpha, l_a, k_value); });
    }
    if (const json* c = Find(*sel, "candidates")) {
      config.candidates = ParseTransformList(*c, "/selection/candidates");
    }
  }
  if (config.kind == ExperimentKind::kSelection && !config.quantized_family && config.candidates.empty()) {
    ConfigError("/selection", "selection needs quantized_offset or candidates");
  }

  if (const json* rate = Find(doc, "rate_sweep")) {
    CheckKeys(*rate, "/rate_sweep", {"n_mc"});
    if (const json* n_mc = Find(*rate, "n_mc")) config.n_mc = GetCount(*n_mc, "/rate_sweep/n_mc");
    if (config.n_mc < 1) ConfigError("/rate_sweep/n_mc", "must be positive");
  }
  if (config.kind == ExperimentKind::kRateSweep && config.n_ta.size() < 3) {
    ConfigError("/sizes/n_ta", "rate_sweep needs at least three target sizes");
  }

  const json* seeds = Find(doc, "seeds");
  if (!seeds || !seeds->is_array() || seeds->empty()) ConfigError("/seeds", "expected a nonempty array");
  for (std::size_t i = 0; i < seeds->size(); ++i) {
    const json& s = (*seeds)[i];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      ConfigError("/seeds/" + std::to_string(i), "expected a nonnegative integer");
    }
    config.seeds.push_back(s.get<std::uint64_t>());
  }
  config.output_dir = GetString(doc, "", "output_dir", "out");

  if (config.baselines.empty() && config.transformations.empty() &&
      config.kind != ExperimentKind::kSelection) {
    ConfigError("/methods/baselines", "no methods to run: add baselines or transformations");
  }
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HtlError(ErrorCode::kConfig, "config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return ParseConfig(buffer.str(), parent.empty() ? "." : parent.string());
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  const Index max_n_ta = *std::max_element(config.n_ta.begin(), config.n_ta.end());
  std::vector<Index> n_ta_sorted = config.n_ta;
  std::sort(n_ta_sorted.begin(), n_ta_sorted.end());

  // Method roster in report order.
  std::vector<std::string> roster = config.baselines;
  for (const auto& t : config.transformations) roster.push_back("htl:" + t.tf.Name());
  if (config.kind == ExperimentKind::kSelection) roster.push_back("htl_selected");
  if (std::set<std::string>(roster.begin(), roster.end()).size() != roster.size()) {
    throw HtlError(ErrorCode::kConfig, "config /transformations: duplicate transformation");
  }

  std::vector<TransformSpec> candidates;
  if (config.quantized_family) {
    for (const auto& tf : config.quantized_family->members) candidates.push_back(TransformSpec{tf});
  }
  candidates.insert(candidates.end(), config.candidates.begin(), config.candidates.end());

  std::optional<SyntheticSpec> synthetic;
  std::optional<Dataset> source_all;
  std::optional<Dataset> target_all;
  RealFunction truth;
  if (config.is_synthetic()) {
    synthetic = config.Synthetic();
    truth = synthetic->target_fn;
  } else {
    source_all = LoadCsv(config.source_csv, config.label_column, DomainTag::kSource);
    target_all = LoadCsv(config.target_csv, config.label_column, DomainTag::kTarget);
    if (source_all->dim() != target_all->dim()) {
      throw HtlError(ErrorCode::kConfig, "config /data: source and target CSV widths differ");
    }
    if (config.n_so > source_all->size()) {
      throw HtlError(ErrorCode::kConfig, "config /sizes/n_so: exceeds the source CSV row count");
    }
    if (max_n_ta + config.n_val + 2 > target_all->size()) {
      throw HtlError(ErrorCode::kConfig,
                     "config /sizes: target CSV too small for n_ta + n_val + a test set of 2");
    }
  }

  std::vector<Row> rows;
  json selections = json::array();
  // Predictors of the first seed at the smallest n_ta, for the plot series.
  std::map<std::string, PredictorPtr> series_models;

  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    const std::uint64_t seed = config.seeds[s];
    const SeedData data = synthetic ? SyntheticSeedData(config, *synthetic, seed, max_n_ta)
                                    : CsvSeedData(config, *source_all, *target_all, seed, max_n_ta);
    const std::uint64_t cv_seed = DeriveSeed(seed, kCvStream);
    const Learner so_learner = MakeLearner(config.source_method, cv_seed);
    const Learner w_learner = MakeLearner(config.auxiliary_method, cv_seed);

    // The source fit does not depend on G or on the target data.
    PredictorPtr f_so_hat;
    std::string source_error;
    const auto source_model = [&]() -> PredictorPtr {
      if (!f_so_hat && source_error.empty()) {
        try {
          f_so_hat = so_learner(*data.source);
        } catch (const HtlError& e) {
          source_error = std::string("source fit: ") + e.what();
        }
      }
      if (!f_so_hat) throw HtlError(ErrorCode::kConditioning, source_error);
      return f_so_hat;
    };

    for (Index n_ta : n_ta_sorted) {
      const Dataset target = Prefix(*data.target, n_ta);
      for (const std::string& method : roster) {
        Row row;
        row.method = method;
        row.n_ta = n_ta;
        row.seed = seed;
        row.seed_index = s;
        try {
          PredictorPtr model;
          if (method == "only_target") {
            model = w_learner(target);
          } else if (method == "only_source") {
            model = source_model();
          } else if (method == "combined") {
            model = w_learner(Dataset::Concatenate(*data.source, target, DomainTag::kTarget));
          } else if (method == "htl_selected") {
            const PredictorPtr shared = source_model();
            std::vector<TransformationFunction> tfs;
            for (const auto& c : candidates) tfs.push_back(c.tf);
            const auto factory = [&candidates](const TransformationFunction& tf) {
              for (const auto& c : candidates) {
                if (c.tf.Name() == tf.Name()) return c.Estimator();
              }
              return AuxiliaryEstimator::Direct(tf);
            };
            const SelectionResult result = SelectTransformation(
                *data.source, target, *data.validation, tfs, factory,
                [shared](const Dataset&) { return shared; }, w_learner);
            json scores = json::array();
            for (const auto& c : result.per_candidate) {
              scores.push_back({{"index", c.index},
                                {"name", c.name},
                                {"validation_mse", c.validation_mse ? json(*c.validation_mse) : json(nullptr)},
                                {"error", c.error}});
            }
            selections.push_back({{"seed", seed},
                                  {"n_ta", n_ta},
                                  {"n_val", result.n_val},
                                  {"chosen", result.chosen.Name()},
                                  {"chosen_index", result.chosen_index},
                                  {"candidates", scores}});
            row.clipped_rows = result.chosen_predictor->clipped_rows();
            row.guarded_rows = result.chosen_predictor->guarded_rows();
            model = result.chosen_predictor;
          } else {
            const auto it = std::find_if(config.transformations.begin(), config.transformations.end(),
                                         [&](const TransformSpec& t) { return "htl:" + t.tf.Name() == method; });
            const HtlPredictorPtr htl = HtlFitWithSource(source_model(), target, it->Estimator(), w_learner);
            row.clipped_rows = htl->clipped_rows();
            row.guarded_rows = htl->guarded_rows();
            model = htl;
          }
          row.model = model->Describe();
          row.metrics = Evaluate(*model, *data.test);
          if (synthetic) {
            if (config.kind == ExperimentKind::kRateSweep) {
              row.excess_risk = ExcessRiskMc(*model, truth, config.sampler, config.n_mc,
                                             DeriveSeed(seed, kMonteCarloStream));
            } else {
              double sum = 0.0;
              for (Index i = 0; i < data.test->size(); ++i) {
                const Vector x = data.test->row(i);
                const double d = model->Predict(x) - truth(x);
                sum += d * d;
              }
              row.excess_risk = sum / static_cast<double>(data.test->size());
            }
          }
          if (!std::isfinite(row.metrics.mse)) {
            throw HtlError(ErrorCode::kConditioning, "non-finite test MSE");
          }
          row.ok = true;
          if (s == 0 && n_ta == n_ta_sorted.front()) series_models[method] = model;
        } catch (const HtlError& e) {
          row.ok = false;
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }

  // Deterministic (method, n_ta, seed) order.
  const auto roster_index = [&roster](const std::string& m) {
    return std::find(roster.begin(), roster.end(), m) - roster.begin();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    const auto ra = roster_index(a.method);
    const auto rb = roster_index(b.method);
    if (ra != rb) return ra < rb;
    if (a.n_ta != b.n_ta) return a.n_ta < b.n_ta;
    return a.seed_index < b.seed_index;
  });

  ExperimentReport out;
  json row_json = json::array();
  std::ostringstream rows_csv;
  rows_csv << "method,n_ta,seed,status,mse,r_squared,ss_res,ss_tot,n_eval,excess_risk,"
              "clipped_rows,guarded_rows,model,error\n";
  for (const Row& r : rows) {
    out.partial_failure = out.partial_failure || !r.ok;
    json j = {{"method", r.method}, {"n_ta", r.n_ta}, {"seed", r.seed}, {"status", r.ok ? "ok" : "failed"}};
    if (r.ok) {
      j["mse"] = NumberOrNull(r.metrics.mse);
      j["r_squared"] = NumberOrNull(r.metrics.r_squared);
      j["ss_res"] = NumberOrNull(r.metrics.ss_res);
      j["ss_tot"] = NumberOrNull(r.metrics.ss_tot);
      j["n_eval"] = r.metrics.n_eval;
      j["excess_risk"] = NumberOrNull(r.excess_risk);
      j["clipped_rows"] = r.clipped_rows;
      j["guarded_rows"] = r.guarded_rows;
      j["model"] = r.model;
    } else {
      j["error"] = r.error;
    }
    row_json.push_back(j);
    rows_csv << CsvField(r.method) << ',' << r.n_ta << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
      rows_csv << FormatReal(r.metrics.mse) << ',' << FormatReal(r.metrics.r_squared) << ','
               << FormatReal(r.metrics.ss_res) << ',' << FormatReal(r.metrics.ss_tot) << ','
               << r.metrics.n_eval << ',' << FormatReal(r.excess_risk) << ',' << r.clipped_rows << ','
               << r.guarded_rows << ',' << CsvField(r.model) << ",\n";
    } else {
      rows_csv << ",,,,,,,,," << CsvField(r.error) << '\n';
    }
  }

  json aggregates = json::array();
  std::ostringstream table;
  table << "method,n_ta,n_ok,mean_mse,sd_mse,mean_r_squared,sd_r_squared,mean_excess_risk,sd_excess_risk\n";
  std::map<std::string, std::vector<std::pair<double, double>>> rate_points;
  for (const std::string& method : roster) {
    for (Index n_ta : n_ta_sorted) {
      std::vector<double> mse, r2, excess;
      for (const Row& r : rows) {
        if (r.method != method || r.n_ta != n_ta || !r.ok) continue;
        mse.push_back(r.metrics.mse);
        r2.push_back(r.metrics.r_squared);
        excess.push_back(r.excess_risk);
      }
      const MeanSd m = Summarize(mse);
      const MeanSd q = Summarize(r2);
      const MeanSd e = Summarize(excess);
      aggregates.push_back({{"method", method},
                            {"n_ta", n_ta},
                            {"n_ok", mse.size()},
                            {"mean_mse", NumberOrNull(m.mean)},
                            {"sd_mse", NumberOrNull(m.sd)},
                            {"mean_r_squared", NumberOrNull(q.mean)},
                            {"sd_r_squared", NumberOrNull(q.sd)},
                            {"mean_excess_risk", NumberOrNull(e.mean)},
                            {"sd_excess_risk", NumberOrNull(e.sd)}});
      table << CsvField(method) << ',' << n_ta << ',' << mse.size() << ',' << FormatReal(m.mean) << ','
            << FormatReal(m.sd) << ',' << FormatReal(q.mean) << ',' << FormatReal(q.sd) << ','
            << FormatReal(e.mean) << ',' << FormatReal(e.sd) << '\n';
      if (std::isfinite(e.mean) && e.mean > 0.0) {
        rate_points[method].emplace_back(static_cast<double>(n_ta), e.mean);
      }
    }
  }

  json rate_fits = json::array();
  if (config.kind == ExperimentKind::kRateSweep) {
    for (const std::string& method : roster) {
      const auto& points = rate_points[method];
      if (points.size() < 3) continue;
      const RateFit fit = RateSlope(points);
      json pts = json::array();
      for (const auto& [n, risk] : fit.points) pts.push_back({n, risk});
      rate_fits.push_back({{"method", method}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"points", pts}});
    }
  }

  // Plot series: prediction curves for 1-d synthetic runs, the aggregate
  // table otherwise.
  if (synthetic && config.sampler.dim == 1 && config.kind != ExperimentKind::kRateSweep) {
    std::ostringstream series;
    series << "x,truth_source,truth_target";
    for (const auto& m : roster) series << ',' << CsvField(m);
    series << '\n';
    for (const Vector& x : QueryGrid(config.sampler, 0, 200)) {
      series << FormatReal(x(0)) << ',' << FormatReal(synthetic->source_fn(x)) << ','
             << FormatReal(synthetic->target_fn(x));
      for (const auto& m : roster) {
        const auto it = series_models.find(m);
        series << ',' << (it == series_models.end() ? "" : FormatReal(it->second->Predict(x)));
      }
      series << '\n';
    }
    out.series_csv = series.str();
  } else {
    out.series_csv = table.str();
  }

  json config_echo = config.raw;
  config_echo["seeds"] = config.seeds;
  out.report = {{"toolkit_version", kToolkitVersion},
                {"experiment_kind", ExperimentKindName(config.kind)},
                {"config", config_echo},
                {"methods", roster},
                {"rows", row_json},
                {"aggregates", aggregates},
                {"rate_fits", rate_fits},
                {"selections", selections},
                {"partial_failure", out.partial_failure}};
  out.rows_csv = rows_csv.str();
  return out;
}

void ExperimentReport::Write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const auto write = [&dir](const char* name, const std::string& content) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw HtlError(ErrorCode::kIo, "cannot write '" + path + "'");
    out << content;
  };
  write("report.json", report.dump(2) + "\n");
  write("rows.csv", rows_csv);
  write("series.csv", series_csv);
}

std::vector<std::string> WriteSyntheticData(const ExperimentConfig& config, const std::string& dir) {
  if (!config.is_synthetic()) {
    throw HtlError(ErrorCode::kConfig, "config /experiment_kind: synth needs a synthetic data section");
  }
  std::filesystem::create_directories(dir);
  const SyntheticSpec spec = config.Synthetic();
  const std::uint64_t seed = config.seeds.front();
  const Index max_n_ta = *std::max_element(config.n_ta.begin(), config.n_ta.end());
  const SeedData data = SyntheticSeedData(config, spec, seed, max_n_ta);
  std::vector<std::string> paths;
  const auto emit = [&](const char* name, const Dataset& d) {
    const auto path = (std::filesystem::path(dir) / name).string();
    WriteCsv(d, path);
    paths.push_back(path);
  };
  emit("source.csv", *data.source);
  emit("target.csv", *data.target);
  if (data.validation) emit("validation.csv", *data.validation);
  emit("test.csv", *data.test);
  return paths;
}

}  // namespace htl
