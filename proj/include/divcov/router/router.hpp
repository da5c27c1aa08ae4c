#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/net/http_json.hpp"
#include "divcov/router/features.hpp"
#include "divcov/router/labels.hpp"
#include "divcov/router/mlp.hpp"

namespace divcov::router {

// Feature sets keyed by encoder id.
using FeatureBank = std::map<std::string, FeatureSet>;

enum class RouterKind { kKnn, kMwayMlp, kBinaryMlps };

std::string_view to_token(RouterKind kind);  // "knn", "mway", "binary"
RouterKind router_kind_from_token(std::string_view token);

// Binary-head loss under soft labels: cross-entropy to the soft target, or a
// 0/1 target from thresholding it.
enum class BinarySoftLoss { kBce, kThreshold };

std::string_view to_token(BinarySoftLoss loss);  // "bce", "threshold"
BinarySoftLoss binary_soft_loss_from_token(std::string_view token);

struct KnnModel {
  int k = 1;
  int pool_size = 0;
  std::vector<std::vector<double>> points;
  std::vector<int> labels;  // oracle pool index per point

  bool operator==(const KnnModel&) const = default;
};

KnnModel fit_knn(const std::vector<RoutingExample>& examples, const FeatureSet& features,
                 int k, int pool_size);

// Vote counts per pool model among the K nearest points (Euclidean;
// distance ties go to the earlier training point).
std::vector<double> knn_votes(const KnnModel& model, std::span<const double> x);

// Majority label; vote ties go to the lowest pool index.
int knn_predict(const KnnModel& model, std::span<const double> x);

// Ordered model list: the top_k highest scores, ties to the lower index.
std::vector<int> route(std::span<const double> scores, int top_k);

struct Router {
  RouterKind kind = RouterKind::kMwayMlp;
  int pool_size = 0;
  LabelMode label_mode = LabelMode::kOneHot;
  TrainConfig config;
  // One encoder for knn and mway; one per pool model for binary heads.
  std::vector<std::string> encoder_ids;
  KnnModel knn;
  std::vector<MlpParams> heads;  // one softmax head, or one sigmoid head per model

  // Score per pool model for one query.
  std::vector<double> scores(const std::string& query_id, const FeatureBank& bank) const;
  std::vector<int> route(const std::string& query_id, const FeatureBank& bank,
                         int top_k) const;

  bool operator==(const Router&) const = default;
};

struct RouterTrainSpec {
  RouterKind kind = RouterKind::kMwayMlp;
  LabelMode label_mode = LabelMode::kOneHot;
  BinarySoftLoss binary_soft_loss = BinarySoftLoss::kBce;
  double soft_threshold = 0.9;
  int knn_k = 1;
  std::vector<std::string> encoder_ids;
};

struct TrainedRouter {
  Router router;
  std::vector<TrainResult> runs;  // one per head (empty for knn)
};

// Fits a router on the training table. val_table, when given, supplies the
// per-epoch validation loss.
TrainedRouter train_router(const ScoreTable& train_table, const ScoreTable* val_table,
                           const FeatureBank& bank, const RouterTrainSpec& spec,
                           const TrainConfig& config);

// Mean val div-cov of the first routed model per query.
double routing_div_cov(const Router& router, const ScoreTable& val_table,
                       const FeatureBank& bank);

struct GridSpec {
  std::vector<LabelMode> label_modes{LabelMode::kOneHot, LabelMode::kSoft};
  std::vector<double> weight_decays{0.0, 1e-4, 1e-2};
  std::vector<int> hidden_dims{64, 256, 1024};
  std::vector<int> knn_ks{1, 5};

  void validate(RouterKind kind) const;
};

struct GridPoint {
  LabelMode label_mode = LabelMode::kOneHot;
  double weight_decay = 0.0;
  int hidden_dim = 0;
  int knn_k = 0;
  std::optional<double> val_div_cov;
  std::optional<double> final_val_loss;
  std::string error;  // non-empty when the point failed
};

struct GridResult {
  Router best;
  std::size_t best_index = 0;
  std::vector<GridPoint> report;
};

// Trains one router per grid point (seed = base seed + grid index) and keeps
// the highest validation routing div-cov; ties keep the earlier point.
GridResult grid_search(const ScoreTable& train_table, const ScoreTable& val_table,
                       const FeatureBank& bank, RouterTrainSpec spec, const GridSpec& grid,
                       const TrainConfig& base);

// Checkpoint JSON with a sha256 over the canonical body.
std::string router_checkpoint_name(RouterKind kind);
std::string serialize_router(const Router& router);
Router parse_router(std::string_view content);
void save_router(const std::filesystem::path& path, const Router& router);
Router load_router(const std::filesystem::path& path);

// External M-way scorer: POST /v1/route {query} -> {probabilities:[...]}.
class HttpMwayScorer {
 public:
  HttpMwayScorer(net::EndpointConfig endpoint, int pool_size);
  std::vector<double> scores(const Query& query) const;

 private:
  net::HttpJsonClient client_;
  int pool_size_;
};

}  // namespace divcov::router
