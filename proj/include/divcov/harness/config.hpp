#pragma once

// Experiment configuration, read from one JSON document. Unknown keys are
// rejected. Relative paths resolve against the config file's directory.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "divcov/core/serialize.hpp"
#include "divcov/core/types.hpp"
#include "divcov/ensemble/strategies.hpp"
#include "divcov/metrics/metrics.hpp"
#include "divcov/net/http_json.hpp"
#include "divcov/router/labels.hpp"
#include "divcov/router/mlp.hpp"
#include "divcov/router/router.hpp"
#include "divcov/sampling/prompts.hpp"

namespace divcov::harness {

struct ChatEndpointConfig {
  net::EndpointConfig http;
  int max_inflight = 64;
};

struct OpenScoringConfig {
  // Quality: "reward" (endpoint) or "constant".
  std::string quality = "constant";
  std::optional<net::EndpointConfig> reward_endpoint;
  bool reward_batch = false;
  std::vector<double> thresholds;  // nine cut points
  double q_max = 10.0;
  // Equivalence: "remote", "cosine", "normalized" or "exact".
  std::string equivalence = "normalized";
  std::optional<net::EndpointConfig> equivalence_endpoint;
  bool equivalence_batch = false;
  std::optional<net::EndpointConfig> embedding_endpoint;
  std::string embedding_model;
};

struct EncoderConfig {
  std::string kind = "agnostic";  // "agnostic" or "specific"
  std::string model;              // embedding model for agnostic features
  std::optional<net::EndpointConfig> endpoint;
  std::filesystem::path dir;      // specific: directory of features.specific:<m>.ndjson
  std::string mway_model;         // specific + mway: the pool model whose states are used
};

struct RouterConfig {
  std::vector<router::RouterKind> kinds{router::RouterKind::kKnn,
                                        router::RouterKind::kMwayMlp,
                                        router::RouterKind::kBinaryMlps};
  EncoderConfig encoder;
  router::GridSpec grid;
  router::TrainConfig train;
  router::BinarySoftLoss binary_soft_loss = router::BinarySoftLoss::kBce;
  double soft_threshold = 0.9;
  int top_k = 1;
};

struct EnsembleConfig {
  ensemble::StrategyKind kind = ensemble::StrategyKind::kTopOverall;
  int k = 2;
  std::vector<std::string> models;  // fixed: pool model names
  std::vector<double> ratios;       // fixed: one per model
  std::uint64_t seed = 0;
  int draws = 5;
  std::vector<double> ratio_grid = ensemble::default_ratio_grid();
};

struct ExperimentSection {
  int seeds = 5;
  std::vector<std::string> methods{"top_overall", "top_two", "random", "frequency",
                                   "oracle", "router:knn", "router:mway", "router:binary"};
  std::string baseline = "top_overall";
  std::string significance = "t";  // "t" or "permutation"
  double alpha = 0.05;
};

struct ExperimentConfig {
  std::filesystem::path config_dir;
  std::filesystem::path queries;
  std::optional<std::filesystem::path> ood_queries;
  ModelPool pool;
  PromptKind prompt_kind = PromptKind::kGAll;
  int budget = 50;
  sampling::ItemNoun item_noun;
  DecodingConfig decoding;
  std::optional<ChatEndpointConfig> endpoint;
  double tau = equiv::kDefaultTau;
  OpenScoringConfig open_scoring;
  std::vector<double> split_fractions{0.7, 0.1, 0.2};
  std::uint64_t split_seed = 0;
  RouterConfig router;
  EnsembleConfig ensemble;
  ExperimentSection experiment;
  std::vector<int> scaling_sizes;
  int threads = 0;

  // sha256 of the canonical JSON document.
  std::string hash;
  // Hash of the settings that determine sampled answers.
  std::string sampling_hash;
};

ExperimentConfig parse_config(const Json& doc, std::filesystem::path config_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Overrides every seed in the config (decoding, split, ensemble, training).
void apply_seed(ExperimentConfig& config, std::uint64_t seed);

int pool_index_of(const ModelPool& pool, const std::string& name);

// Builds the per-space quality/equivalence providers from the config.
metrics::MetricSuite make_metric_suite(const ExperimentConfig& config);

}  // namespace divcov::harness
