#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/ensemble/merge.hpp"
#include "divcov/harness/config.hpp"
#include "divcov/harness/split.hpp"
#include "divcov/harness/stats.hpp"
#include "divcov/harness/store.hpp"
#include "divcov/router/router.hpp"

namespace divcov::harness {

// Run-directory layout.
struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path split() const { return dir / "split.json"; }
  std::filesystem::path scores() const { return dir / "scores.ndjson"; }
  std::filesystem::path ood_scores() const { return dir / "scores.ood.ndjson"; }
  std::filesystem::path labels() const { return dir / "labels.ndjson"; }
  std::filesystem::path timing_log() const { return dir / "timing.ndjson"; }
  std::filesystem::path route_timing() const { return dir / "route_timing.ndjson"; }
  std::filesystem::path features(const std::string& encoder_id) const;
  std::filesystem::path router(router::RouterKind kind) const;
  std::filesystem::path router_seed(router::RouterKind kind, int seed_index) const;
  std::filesystem::path grid_report(router::RouterKind kind) const;
  std::filesystem::path plan(const std::string& name) const;
};

std::vector<Query> load_queries(const std::filesystem::path& path);
std::unordered_map<std::string, Query> index_queries(const std::vector<Query>& queries);

// The run's split: read from split.json when present, else derived from the
// config and written.
Split load_or_make_split(const ExperimentConfig& config, const RunPaths& paths,
                         const std::vector<Query>& queries);

// Encoder ids the configured router kind consumes (one for knn and mway, one
// per pool model for binary with specific encodings).
std::vector<std::string> encoder_ids_for(const ExperimentConfig& config, router::RouterKind kind);

// Loads every feature file the configured routers need and checks coverage
// of the given queries. Agnostic features are encoded through the embedding
// endpoint and written when encode_missing is set and the file is absent.
// Training spec for one router kind under the config's encoder and loss.
router::RouterTrainSpec router_train_spec(const ExperimentConfig& config, router::RouterKind kind);

router::FeatureBank load_features(const ExperimentConfig& config, const RunPaths& paths,
                                  const std::vector<Query>& queries, bool encode_missing);

struct ReportRow {
  std::string method;
  std::string split;  // "val", "test", "ood"
  int runs = 1;
  ensemble::MeanMetrics mean;
  std::optional<double> cov_std;
  std::optional<SignificanceResult> significance;
};

struct ExperimentReport {
  std::string config_hash;
  std::vector<ReportRow> rows;
  std::vector<std::string> notes;
  std::map<std::string, std::string> artifacts;  // name -> sha256
};

// Fits baselines on train, trains routers for every configured seed, and
// evaluates all methods on val, test, and the OOD set when configured.
// Every needed artifact is checked before any evaluation starts.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunPaths& paths);

std::string report_json(const ExperimentReport& report);
std::string report_csv(const ExperimentReport& report);
std::string report_text(const ExperimentReport& report);
void write_report(const RunPaths& paths, const ExperimentReport& report);

struct ScalingPoint {
  int size = 0;
  double val_cov = 0.0;
  double test_cov = 0.0;
  std::vector<std::string> train_ids;
};

// Trains one router per size on nested prefixes of a seeded permutation of
// the training queries and reports val/test routing div-cov.
std::vector<ScalingPoint> scaling_study(const ScoreTable& train, const ScoreTable& val,
                                        const ScoreTable& test, const router::FeatureBank& bank,
                                        const router::RouterTrainSpec& spec,
                                        const router::GridSpec& grid,
                                        const router::TrainConfig& base,
                                        const std::vector<int>& sizes, std::uint64_t seed);

std::string scaling_csv(const std::vector<ScalingPoint>& points);

// Per-model position profile over stored sets, as CSV rows
// model,space,position,mean,variance.
std::string position_profile_csv(const std::vector<Query>& queries, const ModelPool& pool,
                                 const ensemble::AnswerBank& bank,
                                 const metrics::MetricSuite& suite);

}  // namespace divcov::harness
