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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "htl/dataset.h"
#include "htl/error.h"
#include "htl/evaluation.h"
#include "htl/experiment.h"
#include "htl/kernel_ridge.h"
#include "htl/kernel_smoothing.h"
#include "htl/model_selection.h"
#include "htl/pipeline.h"
#include "htl/random.h"
#include "htl/transform.h"
#include "oracles.h"

#ifndef HTL_SOURCE_DIR
#define HTL_SOURCE_DIR "."
#endif

namespace htl {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string ConfigPath(const std::string& name) { return std::string(HTL_SOURCE_DIR) + "/configs/" + name; }

Dataset RandomData(Rng& rng, Index n, Index d) {
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rng.Uniform();
    y(i) = rng.Uniform(-1.0, 1.0);
  }
  return Dataset(x, y, DomainTag::kTarget);
}

double MeanMse(const json& report, const std::string& method) {
  for (const auto& agg : report["aggregates"]) {
    if (agg["method"] == method) return agg["mean_mse"].get<double>();
  }
  throw HtlError(ErrorCode::kInvalidArgument, "no aggregate for " + method);
}

// Runs a two-method transfer experiment (only_target vs one HTL variant).
Outcome TransferWins(const std::string& config_name, const std::string& htl_method, double max_ratio,
                     double max_seconds) {
  ExperimentConfig config = LoadConfig(ConfigPath(config_name));
  config.baselines = {"only_target"};
  const auto start = Clock::now();
  const ExperimentReport report = RunExperiment(config);
  const double elapsed = Seconds(start);
  const double direct = MeanMse(report.report, "only_target");
  const double htl = MeanMse(report.report, htl_method);
  int wins = 0;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    double a = 0.0, b = 0.0;
    for (const auto& row : report.report["rows"]) {
      if (row["seed"] != config.seeds[s]) continue;
      (row["method"] == "only_target" ? a : b) = row["mse"].get<double>();
    }
    if (b < a) ++wins;
  }
  const double ratio = htl / direct;
  return {!report.partial_failure && ratio < max_ratio && elapsed < max_seconds,
          Fmt("%s mean MSE %.5f vs only_target %.5f, ratio %.3f (< %.1f), per-seed wins %d/%zu, %.1f s (< %.0f s)",
              htl_method.c_str(), htl, direct, ratio, max_ratio, wins, config.seeds.size(), elapsed, max_seconds)};
}

Outcome Criterion1() { return TransferWins("doppler_offset.json", "htl:offset(alpha=1)", 0.8, 60.0); }

Outcome Criterion2() { return TransferWins("doppler_scale.json", "htl:scale(alpha=0)", 0.9, 60.0); }

Outcome Criterion3() {
  const ExperimentConfig config = LoadConfig(ConfigPath("rate_sweep.json"));
  const auto start = Clock::now();
  const ExperimentReport report = RunExperiment(config);
  double direct = NAN, htl = NAN;
  for (const auto& fit : report.report["rate_fits"]) {
    (fit["method"] == "only_target" ? direct : htl) = fit["slope"].get<double>();
  }
  std::ostringstream risks;
  for (const auto& agg : report.report["aggregates"]) {
    risks << (agg["method"] == "only_target" ? " T" : " H") << agg["n_ta"].get<Index>() << "="
          << Fmt("%.2e", agg["mean_excess_risk"].get<double>());
  }
  return {!report.partial_failure && htl <= direct - 0.1,
          Fmt("slope htl %.3f vs only_target %.3f (need htl <= only_target - 0.1), %.1f s;", htl, direct,
              Seconds(start)) +
              risks.str()};
}

Outcome Criterion4() {
  const auto start = Clock::now();
  Rng rng(404);
  int ks_ok = 0, krr_ok = 0;
  double worst_excess = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.Below(90));
    const Index d = 1 + static_cast<Index>(rng.Below(3));
    const Dataset base = RandomData(rng, n, d);
    const SmoothingKernel kernel(static_cast<KernelShape>(rng.Below(4)));
    const double h = rng.Uniform(0.05, 0.5);
    const KsPredictor fitted(base, kernel, h);
    const Learner fit = [&](const Dataset& t) { return std::make_shared<KsPredictor>(t, kernel, h); };
    const Vector delta = Vector::NullaryExpr(n, [&](Index) { return rng.Uniform(-1.0, 1.0); });
    const auto grid = QueryGrid(InputSampler{d, 0.0, 1.0}, rng.Next(), 100);
    const auto r = StabilityProbe(fit, base, delta, [&](const Vector& x) { return fitted.Weights(x); }, grid);
    worst_excess = std::max(worst_excess, -r.min_margin);
    if (r.holds) ++ks_ok;
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.Below(60));
    const Index d = 1 + static_cast<Index>(rng.Below(3));
    const Dataset base = RandomData(rng, n, d);
    const double lambda = rng.Uniform(0.01, 1.0);
    const RkhsKernel kernel = RkhsKernel::Rbf(rng.Uniform(0.1, 1.0));
    const KrrPredictor fitted = KrrFit(base, kernel, lambda);
    const Learner fit = [&](const Dataset& t) { return std::make_shared<KrrPredictor>(KrrFit(t, kernel, lambda)); };
    const Vector delta = Vector::NullaryExpr(n, [&](Index) { return rng.Uniform(-1.0, 1.0); });
    const auto grid = QueryGrid(InputSampler{d, 0.0, 1.0}, rng.Next(), 100);
    const auto r = StabilityProbe(fit, base, delta, KrrStabilityCoeffs(fitted), grid);
    worst_excess = std::max(worst_excess, -r.min_margin);
    if (r.holds) ++krr_ok;
  }
  const double elapsed = Seconds(start);
  return {ks_ok == 100 && krr_ok == 100 && elapsed < 10.0,
          Fmt("KS %d/100, KRR %d/100 within bound, worst |diff| - bound %.2e, %.2f s (< 10 s)", ks_ok, krr_ok,
              worst_excess, elapsed)};
}

Outcome Criterion5() {
  const auto start = Clock::now();
  const RealFunction f_so = [](const Vector& x) { return Doppler(x(0)); };
  struct Case {
    TransformationFunction tf;
    RealFunction f_ta;
  };
  const std::vector<Case> cases = {
      {TransformationFunction::Offset(1.0), [&](const Vector& x) { return f_so(x) + x(0); }},
      {TransformationFunction::Scale(0.0), [&](const Vector& x) { return 5.0 * f_so(x); }},
  };
  Rng rng(505);
  int ok = 0, total = 0;
  double worst = 0.0;
  for (const Case& c : cases) {
    const AuxiliaryEstimator est = AuxiliaryEstimator::Direct(c.tf);
    for (int anchor = 0; anchor < 10; ++anchor) {
      Vector x = Vector::Constant(1, rng.Uniform());
      while (c.tf.family() == TransformFamily::kScale && std::abs(f_so(x)) < 0.1) x(0) = rng.Uniform();
      const double a = f_so(x);
      const double mean_label = c.f_ta(x);
      const int draws = 100000;
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < draws; ++i) {
        const double h = ApplyH(est, a, mean_label + rng.Uniform(-0.5, 0.5));
        sum += h;
        sq += h * h;
      }
      const double mean = sum / draws;
      const double se = std::sqrt((sq / draws - mean * mean) / draws);
      const double z = std::abs(mean - AuxiliaryTruth(c.tf, f_so, c.f_ta, x)) / se;
      worst = std::max(worst, z);
      ++total;
      if (z <= 4.0) ++ok;
    }
  }
  const double elapsed = Seconds(start);
  return {ok == total && elapsed < 5.0,
          Fmt("%d/%d anchors within 4 SE (max %.2f SE), offset and scale, %.2f s (< 5 s)", ok, total, worst, elapsed)};
}

Outcome Criterion6() {
  const ExperimentConfig config = LoadConfig(ConfigPath("selection.json"));
  const double true_alpha = 0.5;
  double nearest = config.quantized_family->members.front().parameter();
  for (const auto& m : config.quantized_family->members) {
    if (std::abs(m.parameter() - true_alpha) < std::abs(nearest - true_alpha)) nearest = m.parameter();
  }
  const ExperimentReport report = RunExperiment(config);
  int nearest_hits = 0, argmin_ok = 0, runs = 0;
  for (const auto& s : report.report["selections"]) {
    ++runs;
    const auto& chosen = s["candidates"][s["chosen_index"].get<std::size_t>()];
    if (config.quantized_family->members[s["chosen_index"].get<std::size_t>()].parameter() == nearest) ++nearest_hits;
    bool dominates = chosen["validation_mse"].is_number();
    for (const auto& c : s["candidates"]) {
      if (c["validation_mse"].is_number() && dominates) {
        dominates = chosen["validation_mse"].get<double>() <= c["validation_mse"].get<double>();
      }
    }
    if (dominates) ++argmin_ok;
  }
  return {runs == 20 && nearest_hits >= 18 && argmin_ok == 20 && config.n_val == 50,
          Fmt("nearest grid alpha %.2f chosen %d/%d (>= 18), argmin dominance %d/%d, n_val %lld, K %d", nearest,
              nearest_hits, runs, argmin_ok, runs, static_cast<long long>(config.n_val), config.quantized_family->k)};
}

Outcome Criterion7() {
  Rng rng(707);
  double ks_worst = 0.0, krr_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.Below(3));
    const Dataset data = RandomData(rng, 5 + static_cast<Index>(rng.Below(60)), d);
    const auto shape = static_cast<KernelShape>(rng.Below(4));
    const double h = rng.Uniform(0.02, 0.6);
    const KsPredictor p(data, SmoothingKernel(shape), h);
    for (int q = 0; q < 10; ++q) {
      const Vector x = Vector::NullaryExpr(d, [&](Index) { return rng.Uniform(-0.2, 1.2); });
      ks_worst = std::max(ks_worst, std::abs(KsPredict(p, x) - oracle::KsPredict(data, shape, h, x)));
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.Below(3));
    const Dataset data = RandomData(rng, 1 + static_cast<Index>(rng.Below(8)), d);
    const double l = rng.Uniform(0.2, 2.0);
    const double lambda = std::pow(10.0, rng.Uniform(-4.0, 0.0));
    const KrrPredictor p = KrrFit(data, RkhsKernel::Rbf(l), lambda);
    for (int q = 0; q < 10; ++q) {
      const Vector x = Vector::NullaryExpr(d, [&](Index) { return rng.Uniform(); });
      krr_worst = std::max(krr_worst, std::abs(KrrPredict(p, x) - oracle::KrrPredict(data, l, lambda, x)));
    }
  }
  return {ks_worst <= 1e-12 && krr_worst <= 1e-9,
          Fmt("KS max deviation %.2e (<= 1e-12), KRR n<=8 max deviation %.2e (<= 1e-9), 100 cases each", ks_worst,
              krr_worst)};
}

Outcome Criterion8() {
  Rng rng(808);
  double reduction_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Dataset source = RandomData(rng, 60, 2);
    source = source.WithTag(DomainTag::kSource);
    const Dataset target = RandomData(rng, 30, 2);
    const SubroutineSpec so = SubroutineSpec::Ks(SmoothingKernel(KernelShape::kGaussian), 0.2);
    const SubroutineSpec w = trial % 2 == 0 ? SubroutineSpec::Ks(SmoothingKernel(), 0.3)
                                            : SubroutineSpec::Krr(RkhsKernel::Rbf(0.5), 0.01);
    const HtlPredictorPtr htl =
        HtlFit(source, target, AuxiliaryEstimator::Direct(TransformationFunction::NonTransfer()), so, w);
    const PredictorPtr direct = FitSubroutine(w, target);
    for (const Vector& x : QueryGrid(InputSampler{2, 0.0, 1.0}, rng.Next(), 50)) {
      reduction_worst = std::max(reduction_worst, std::abs(htl->Predict(x) - direct->Predict(x)));
    }
  }
  double interp_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = RandomData(rng, 5, 1 + static_cast<Index>(rng.Below(3)));
    const KrrPredictor p = KrrFit(data, RkhsKernel::Rbf(0.2), 0.0);
    for (Index i = 0; i < data.size(); ++i) {
      interp_worst = std::max(interp_worst, std::abs(KrrPredict(p, data.row(i)) - data.labels()(i)));
    }
  }
  return {reduction_worst <= 1e-12 && interp_worst <= 1e-6,
          Fmt("non_transfer vs direct max deviation %.2e (<= 1e-12), lambda=0 rbf interpolation of 5 distinct points max error %.2e (<= 1e-6)",
              reduction_worst, interp_worst)};
}

Outcome Criterion9() {
  Rng rng(909);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double beta = rng.Uniform(0.5, 2.0) * (rng.Below(2) ? 1.0 : -1.0);
    const double sigma2 = rng.Uniform(0.0, 0.1);
    const double a = rng.Uniform(0.2, 1.5) * (rng.Below(2) ? 1.0 : -1.0);
    const double y = rng.Uniform(-1.0, 1.0);
    const double got = ApplyH(AuxiliaryEstimator::Calibrated(TransformationFunction::LogLinear(beta), sigma2), a, y);
    const double want = oracle::CalibratedLogLinear(beta, sigma2, a, y);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  const double sigma2 = EstimateSigma2({{1.0, 3.0}, {2.0, 4.0}});
  return {worst <= 1e-12 && sigma2 == 2.0,
          Fmt("calibrated H max deviation %.2e over 1000 inputs (<= 1e-12), sigma2({[1,3],[2,4]}) = %.17g (== 2)", worst,
              sigma2)};
}

Outcome Criterion10() {
  const auto dir = std::filesystem::temp_directory_path() / "htl_acceptance_kin";
  std::filesystem::remove_all(dir);
  WriteSyntheticData(LoadConfig(ConfigPath("kin_synth.json")), (dir / "data").string());

  std::ifstream in(ConfigPath("kin_transfer_ks.json"));
  json doc = json::parse(in);
  doc["data"]["source_csv"] = (dir / "data" / "source.csv").string();
  doc["data"]["target_csv"] = (dir / "data" / "target.csv").string();
  const ExperimentConfig config = ParseConfig(doc.dump(), dir.string());
  const ExperimentReport report = RunExperiment(config);
  report.Write((dir / "out").string());

  const std::vector<std::string> roster = {"only_target", "only_source", "combined", "htl:offset(alpha=1)",
                                           "htl:scale(alpha=0)"};
  std::size_t complete = 0;
  for (const auto& agg : report.report["aggregates"]) {
    if (agg["mean_mse"].is_number() && agg["sd_mse"].is_number() &&
        agg["n_ok"].get<std::size_t>() == config.seeds.size()) {
      ++complete;
    }
  }
  const std::size_t cells = roster.size() * config.n_ta.size();
  const bool roster_ok = report.report["methods"].get<std::vector<std::string>>() == roster;
  std::ostringstream row;
  for (const auto& agg : report.report["aggregates"]) {
    if (agg["n_ta"] == 40) row << Fmt(" %s=%.3f+/-%.3f", agg["method"].get<std::string>().c_str(),
                                      agg["mean_mse"].get<double>(), agg["sd_mse"].get<double>());
  }
  return {!report.partial_failure && roster_ok && complete == cells && config.source_csv.size() > 0 &&
              std::filesystem::exists(dir / "out" / "report.json"),
          Fmt("8-d csv_transfer: %zu/%zu (method, n_ta) cells with mean+/-sd over %zu seeds; n_ta=40:", complete, cells,
              config.seeds.size()) +
              row.str()};
}

}  // namespace
}  // namespace htl

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<htl::Outcome()>>> criteria = {
      {"offset Doppler transfer beats only-target", htl::Criterion1},
      {"scale Doppler transfer beats only-target", htl::Criterion2},
      {"HTL rate slope steeper than only-target", htl::Criterion3},
      {"stability bound never violated", htl::Criterion4},
      {"direct auxiliary estimator unbiased", htl::Criterion5},
      {"transformation selection correctness", htl::Criterion6},
      {"oracle equivalence for KS and KRR", htl::Criterion7},
      {"identity reductions", htl::Criterion8},
      {"calibration formula fidelity", htl::Criterion9},
      {"csv_transfer end-to-end on kin analog", htl::Criterion10},
  };
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion number ...]\n", argv[0]);
      return 2;
    }
    selected[k - 1] = true;
  }
  int failures = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++run;
    htl::Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] criterion %zu: %s | %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", run - failures, run);
  return failures == 0 ? 0 : 1;
}
