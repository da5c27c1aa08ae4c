#pragma once

// End-to-end synthetic run: sample -> table -> labels -> features -> train
// -> route -> evaluate, all against in-process mocks.

#include <filesystem>
#include <string>
#include <vector>

#include "divcov/core/serialize.hpp"
#include "divcov/harness/config.hpp"
#include "divcov/harness/experiment.hpp"
#include "mocks.hpp"

namespace divcov::testing {

struct SyntheticOptions {
  World world;
  int budget = 20;
  int seeds = 5;
  int threads = 2;
  std::uint64_t seed = 7;
  std::vector<std::string> methods{"top_overall", "top_two",    "random",
                                   "frequency",   "oracle",     "oracle_top_two",
                                   "router:knn",  "router:mway", "router:binary"};
  // When set, the config points its chat and embedding endpoints here.
  std::string base_url;
};

Json synthetic_config(const SyntheticOptions& options);

// Writes queries.ndjson and config.json into dir; returns the config path.
std::filesystem::path write_synthetic_inputs(const std::filesystem::path& dir,
                                             const SyntheticOptions& options);

struct PipelineRun {
  harness::ExperimentConfig config;
  harness::RunPaths paths;
  harness::ExperimentReport report;
  int chat_calls = 0;
};

PipelineRun run_synthetic_pipeline(const std::filesystem::path& dir,
                                   const SyntheticOptions& options);

std::string read_file(const std::filesystem::path& path);

// Per-seed Cov of a method on a split (one value for deterministic methods).
std::vector<double> run_scores(const harness::ExperimentReport& report, const std::string& method,
                               const std::string& split);
double mean_cov(const harness::ExperimentReport& report, const std::string& method,
                const std::string& split);

}  // namespace divcov::testing
