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

// Command-line driver for HTL experiments.
//
//   htl synth --config cfg.json --out data/
//   htl run   --config cfg.json [--out dir] [--seeds 1,2,3]
//   htl select --config selection.json
//   htl rate   --config rate.json
//
// Exit status: 0 success, 1 configuration error, 2 partial method failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "htl/error.h"
#include "htl/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

std::vector<std::uint64_t> ParseSeeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string item = list.substr(start, end - start);
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
      if (item.empty() || item.front() == '-') throw std::invalid_argument(item);
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw htl::HtlError(htl::ErrorCode::kConfig, "--seeds: '" + item + "' is not a nonnegative integer");
    }
    seeds.push_back(value);
    start = end + 1;
  }
  return seeds;
}

int Run(const std::string& verb, const std::string& config_path, const std::string& out_flag,
        const std::string& seeds_flag) {
  htl::ExperimentConfig config;
  try {
    config = htl::LoadConfig(config_path);
    if (!seeds_flag.empty()) config.seeds = ParseSeeds(seeds_flag);
    if (verb == "select" && config.kind != htl::ExperimentKind::kSelection) {
      throw htl::HtlError(htl::ErrorCode::kConfig,
                          "config /experiment_kind: 'select' needs experiment_kind \"selection\"");
    }
    if (verb == "rate" && config.kind != htl::ExperimentKind::kRateSweep) {
      throw htl::HtlError(htl::ErrorCode::kConfig,
                          "config /experiment_kind: 'rate' needs experiment_kind \"rate_sweep\"");
    }
  } catch (const htl::HtlError& e) {
    std::cerr << "htl: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::string out_dir = out_flag.empty() ? config.output_dir : out_flag;

  try {
    if (verb == "synth") {
      for (const auto& path : htl::WriteSyntheticData(config, out_dir)) std::cout << path << "\n";
      return kExitOk;
    }
    const htl::ExperimentReport report = htl::RunExperiment(config);
    report.Write(out_dir);
    for (const auto& agg : report.report["aggregates"]) {
      const auto& mean = agg["mean_mse"];
      const auto& sd = agg["sd_mse"];
      std::printf("%-28s n_ta=%-6lld mse=%s +/- %s\n", agg["method"].get<std::string>().c_str(),
                  static_cast<long long>(agg["n_ta"].get<std::int64_t>()),
                  mean.is_null() ? "nan" : std::to_string(mean.get<double>()).c_str(),
                  sd.is_null() ? "nan" : std::to_string(sd.get<double>()).c_str());
    }
    for (const auto& fit : report.report["rate_fits"]) {
      std::printf("rate %-23s slope=%.4f\n", fit["method"].get<std::string>().c_str(),
                  fit["slope"].get<double>());
    }
    std::cout << "report written to " << out_dir << "\n";
    if (report.partial_failure) {
      std::cerr << "htl: one or more method runs failed; see rows.csv\n";
      return kExitPartial;
    }
    return kExitOk;
  } catch (const htl::HtlError& e) {
    std::cerr << "htl: " << e.what() << "\n";
    return e.code() == htl::ErrorCode::kConfig ? kExitConfig : kExitPartial;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypothesis transfer learning experiments", "htl"};
  app.set_version_flag("--version", std::string(htl::kToolkitVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  const auto add_verb = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seeds", seeds, "Comma-separated seeds (overrides seeds)");
    return sub;
  };
  add_verb("synth", "Write the synthetic source/target/validation/test CSVs of the first seed");
  add_verb("run", "Run the full experiment");
  add_verb("select", "Run a transformation selection experiment");
  add_verb("rate", "Run a rate sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return Run(app.get_subcommands().front()->get_name(), config_path, out_dir, seeds);
}
