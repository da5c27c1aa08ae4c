#include "divcov/router/router.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "divcov/core/error.hpp"
#include "divcov/core/hash.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/simd/kernels.hpp"

namespace divcov::router {

std::string_view to_token(RouterKind kind) {
  switch (kind) {
    case RouterKind::kKnn: return "knn";
    case RouterKind::kMwayMlp: return "mway";
    case RouterKind::kBinaryMlps: return "binary";
  }
  return "?";
}

RouterKind router_kind_from_token(std::string_view token) {
  if (token == "knn") return RouterKind::kKnn;
  if (token == "mway") return RouterKind::kMwayMlp;
  if (token == "binary") return RouterKind::kBinaryMlps;
  throw ContractError("unknown router kind: " + std::string(token));
}

std::string_view to_token(BinarySoftLoss loss) {
  return loss == BinarySoftLoss::kBce ? "bce" : "threshold";
}

BinarySoftLoss binary_soft_loss_from_token(std::string_view token) {
  if (token == "bce") return BinarySoftLoss::kBce;
  if (token == "threshold") return BinarySoftLoss::kThreshold;
  throw ContractError("unknown binary soft loss: " + std::string(token));
}

KnnModel fit_knn(const std::vector<RoutingExample>& examples, const FeatureSet& features,
                 int k, int pool_size) {
  if (examples.empty()) throw ContractError("KNN needs at least one training example");
  if (k < 1 || k > static_cast<int>(examples.size())) {
    throw ContractError("KNN needs 1 <= K <= number of training examples");
  }
  KnnModel model;
  model.k = k;
  model.pool_size = pool_size;
  for (const RoutingExample& ex : examples) {
    if (ex.oracle_index < 0 || ex.oracle_index >= pool_size) {
      throw ContractError("oracle index out of range for query " + ex.query_id);
    }
    model.points.push_back(features.at(ex.query_id));
    model.labels.push_back(ex.oracle_index);
  }
  return model;
}

std::vector<double> knn_votes(const KnnModel& model, std::span<const double> x) {
  if (model.points.empty()) throw ContractError("KNN model has no training points");
  const int k = std::min<int>(model.k, static_cast<int>(model.points.size()));
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(model.points.size());
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    if (model.points[i].size() != x.size()) {
      throw ContractError("KNN query dim does not match training features");
    }
    dist.emplace_back(simd::squared_distance(model.points[i], x), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<double> votes(model.pool_size, 0.0);
  for (int i = 0; i < k; ++i) votes[model.labels[dist[i].second]] += 1.0;
  return votes;
}

int knn_predict(const KnnModel& model, std::span<const double> x) {
  return static_cast<int>(argmax_lowest(knn_votes(model, x)));
}

std::vector<int> route(std::span<const double> scores, int top_k) {
  if (top_k < 1 || top_k > static_cast<int>(scores.size())) {
    throw ContractError("top_k " + std::to_string(top_k) + " must be in [1, " +
                        std::to_string(scores.size()) + "]");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(top_k);
  return order;
}

namespace {

const FeatureSet& feature_set(const FeatureBank& bank, const std::string& encoder_id) {
  auto it = bank.find(encoder_id);
  if (it == bank.end()) throw IncompleteError("no features for encoder " + encoder_id);
  return it->second;
}

std::vector<std::string> head_encoders(const RouterTrainSpec& spec, int pool_size) {
  if (spec.encoder_ids.empty()) throw ContractError("router needs an encoder id");
  if (spec.kind != RouterKind::kBinaryMlps) {
    if (spec.encoder_ids.size() != 1) {
      throw ContractError("knn and mway routers take exactly one encoder");
    }
    return spec.encoder_ids;
  }
  if (spec.encoder_ids.size() == 1) {
    return std::vector<std::string>(pool_size, spec.encoder_ids.front());
  }
  if (static_cast<int>(spec.encoder_ids.size()) != pool_size) {
    throw ContractError("binary router needs one encoder or one per pool model");
  }
  return spec.encoder_ids;
}

std::vector<double> target_for(const RoutingExample& ex, const RouterTrainSpec& spec,
                               int head) {
  if (spec.kind == RouterKind::kMwayMlp) {
    std::vector<double> t = ex.soft_labels;
    const double sum = std::accumulate(t.begin(), t.end(), 0.0);
    for (double& v : t) v /= sum;
    return t;
  }
  const double y = ex.soft_labels[head];
  if (spec.label_mode == LabelMode::kSoft &&
      spec.binary_soft_loss == BinarySoftLoss::kThreshold) {
    return {y >= spec.soft_threshold ? 1.0 : 0.0};
  }
  return {y};
}

Batch make_batch(const std::vector<RoutingExample>& examples, const FeatureSet& features,
                 const RouterTrainSpec& spec, int head) {
  Batch b;
  for (const RoutingExample& ex : examples) {
    b.inputs.emplace_back(features.at(ex.query_id));
    b.targets.push_back(target_for(ex, spec, head));
  }
  return b;
}

std::uint64_t head_seed(std::uint64_t seed, int head) {
  return seed + 1000003ULL * static_cast<std::uint64_t>(head);
}

}  // namespace

std::vector<double> Router::scores(const std::string& query_id, const FeatureBank& bank) const {
  switch (kind) {
    case RouterKind::kKnn:
      return knn_votes(knn, feature_set(bank, encoder_ids.at(0)).at(query_id));
    case RouterKind::kMwayMlp:
      return mlp_forward(heads.at(0), feature_set(bank, encoder_ids.at(0)).at(query_id));
    case RouterKind::kBinaryMlps: {
      std::vector<double> out;
      for (std::size_t i = 0; i < heads.size(); ++i) {
        out.push_back(mlp_forward(heads[i], feature_set(bank, encoder_ids.at(i)).at(query_id))[0]);
      }
      return out;
    }
  }
  return {};
}

std::vector<int> Router::route(const std::string& query_id, const FeatureBank& bank,
                               int top_k) const {
  const auto s = scores(query_id, bank);
  return router::route(s, top_k);
}

TrainedRouter train_router(const ScoreTable& train_table, const ScoreTable* val_table,
                           const FeatureBank& bank, const RouterTrainSpec& spec,
                           const TrainConfig& config) {
  config.validate();
  const int pool_size = static_cast<int>(train_table.pool().size());
  if (pool_size < 1) throw ContractError("empty model pool");
  if (val_table && val_table->pool() != train_table.pool()) {
    throw ContractError("train and val tables use different pools");
  }
  const auto examples = build_labels(train_table, spec.label_mode);
  std::vector<RoutingExample> val_examples;
  if (val_table) val_examples = build_labels(*val_table, spec.label_mode);

  TrainedRouter out;
  Router& r = out.router;
  r.kind = spec.kind;
  r.pool_size = pool_size;
  r.label_mode = spec.label_mode;
  r.config = config;
  r.encoder_ids = head_encoders(spec, pool_size);

  if (spec.kind == RouterKind::kKnn) {
    r.knn = fit_knn(examples, feature_set(bank, r.encoder_ids[0]), spec.knn_k, pool_size);
    return out;
  }
  const int heads = spec.kind == RouterKind::kMwayMlp ? 1 : pool_size;
  for (int h = 0; h < heads; ++h) {
    const FeatureSet& features = feature_set(bank, r.encoder_ids[h]);
    const Batch train = make_batch(examples, features, spec, h);
    Batch val;
    if (!val_examples.empty()) val = make_batch(val_examples, features, spec, h);
    TrainConfig head_config = config;
    head_config.seed = head_seed(config.seed, h);
    TrainResult run =
        spec.kind == RouterKind::kMwayMlp
            ? mlp_train(train, val_examples.empty() ? nullptr : &val, pool_size,
                        HeadKind::kSoftmax, head_config)
            : mlp_train(train, val_examples.empty() ? nullptr : &val, 1, HeadKind::kSigmoid,
                        head_config);
    r.heads.push_back(run.params);
    out.runs.push_back(std::move(run));
  }
  return out;
}

double routing_div_cov(const Router& router, const ScoreTable& val_table,
                       const FeatureBank& bank) {
  if (val_table.query_ids().empty()) throw ContractError("empty validation table");
  double total = 0.0;
  for (const std::string& q : val_table.query_ids()) {
    total += val_table.at(q, router.route(q, bank, 1).front()).div_cov;
  }
  return total / static_cast<double>(val_table.query_ids().size());
}

void GridSpec::validate(RouterKind kind) const {
  if (kind == RouterKind::kKnn) {
    if (knn_ks.empty()) throw ContractError("empty KNN grid");
    return;
  }
  if (label_modes.empty() || weight_decays.empty() || hidden_dims.empty()) {
    throw ContractError("grid axes must be non-empty");
  }
}

GridResult grid_search(const ScoreTable& train_table, const ScoreTable& val_table,
                       const FeatureBank& bank, RouterTrainSpec spec, const GridSpec& grid,
                       const TrainConfig& base) {
  grid.validate(spec.kind);
  for (const std::string& q : val_table.query_ids()) {
    if (train_table.contains_query(q)) {
      throw ContractError("query " + q + " is in both train and val");
    }
  }
  std::vector<GridPoint> points;
  if (spec.kind == RouterKind::kKnn) {
    for (int k : grid.knn_ks) {
      GridPoint p;
      p.knn_k = k;
      points.push_back(p);
    }
  } else {
    for (LabelMode mode : grid.label_modes) {
      for (double wd : grid.weight_decays) {
        for (int h : grid.hidden_dims) {
          GridPoint p;
          p.label_mode = mode;
          p.weight_decay = wd;
          p.hidden_dim = h;
          points.push_back(p);
        }
      }
    }
  }

  GridResult result;
  std::optional<double> best;
  std::exception_ptr first_failure;
  for (std::size_t i = 0; i < points.size(); ++i) {
    GridPoint& p = points[i];
    RouterTrainSpec point_spec = spec;
    TrainConfig config = base;
    config.seed = base.seed + i;
    if (spec.kind == RouterKind::kKnn) {
      point_spec.knn_k = p.knn_k;
    } else {
      point_spec.label_mode = p.label_mode;
      config.weight_decay = p.weight_decay;
      config.hidden_dim = p.hidden_dim;
    }
    try {
      TrainedRouter trained = train_router(train_table, &val_table, bank, point_spec, config);
      p.val_div_cov = routing_div_cov(trained.router, val_table, bank);
      if (!trained.runs.empty() && trained.runs.front().log.back().val_loss) {
        double sum = 0.0;
        for (const auto& run : trained.runs) sum += *run.log.back().val_loss;
        p.final_val_loss = sum / static_cast<double>(trained.runs.size());
      }
      if (!best || *p.val_div_cov > *best) {
        best = p.val_div_cov;
        result.best = std::move(trained.router);
        result.best_index = i;
      }
    } catch (const Error& e) {
      p.error = e.what();
      if (!first_failure) first_failure = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(first_failure);
  result.report = std::move(points);
  return result;
}

std::string router_checkpoint_name(RouterKind kind) {
  return "router." + std::string(to_token(kind)) + ".json";
}

namespace {

Json router_body(const Router& r) {
  Json config = {{"learning_rate", r.config.learning_rate},
                 {"beta1", r.config.beta1},
                 {"beta2", r.config.beta2},
                 {"epsilon", r.config.epsilon},
                 {"epochs", r.config.epochs},
                 {"batch_size", r.config.batch_size},
                 {"weight_decay", r.config.weight_decay},
                 {"hidden_dim", r.config.hidden_dim},
                 {"seed", r.config.seed}};
  Json heads = Json::array();
  for (const MlpParams& p : r.heads) {
    heads.push_back({{"d_in", p.d_in},
                     {"hidden", p.hidden},
                     {"d_out", p.d_out},
                     {"head", to_token(p.head)},
                     {"theta", p.theta}});
  }
  Json body = {{"kind", to_token(r.kind)},
               {"pool_size", r.pool_size},
               {"label_mode", to_token(r.label_mode)},
               {"config", config},
               {"encoder_ids", r.encoder_ids},
               {"heads", heads}};
  if (r.kind == RouterKind::kKnn) {
    body["knn"] = {{"k", r.knn.k}, {"labels", r.knn.labels}, {"points", r.knn.points}};
  }
  return body;
}

}  // namespace

std::string serialize_router(const Router& router) {
  Json body = router_body(router);
  const std::string digest = sha256_hex(body.dump());
  body["sha256"] = digest;
  return body.dump() + "\n";
}

Router parse_router(std::string_view content) {
  Json doc = parse_json(content);
  if (!doc.is_object() || !doc.contains("sha256") || !doc["sha256"].is_string()) {
    throw ContractError("router checkpoint without sha256");
  }
  const std::string stored = doc["sha256"].get<std::string>();
  doc.erase("sha256");
  if (sha256_hex(doc.dump()) != stored) {
    throw ContractError("router checkpoint hash mismatch");
  }
  FieldReader r(doc, "");
  Router out;
  out.kind = router_kind_from_token(r.string("kind"));
  out.pool_size = static_cast<int>(r.integer("pool_size"));
  out.label_mode = label_mode_from_token(r.string("label_mode"));
  {
    FieldReader c(r.require("config"), r.child_path("config"));
    out.config.learning_rate = c.number("learning_rate");
    out.config.beta1 = c.number("beta1");
    out.config.beta2 = c.number("beta2");
    out.config.epsilon = c.number("epsilon");
    out.config.epochs = static_cast<int>(c.integer("epochs"));
    out.config.batch_size = static_cast<int>(c.integer("batch_size"));
    out.config.weight_decay = c.number("weight_decay");
    out.config.hidden_dim = static_cast<int>(c.integer("hidden_dim"));
    const Json& seed = c.require("seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw_field_error("seed must be an integer", c.child_path("seed"));
    }
    out.config.seed = seed.get<std::uint64_t>();
    c.finish();
  }
  try {
    out.encoder_ids = r.require("encoder_ids").get<std::vector<std::string>>();
    for (const Json& h : r.require("heads")) {
      FieldReader hr(h, "heads[]");
      MlpParams p;
      p.d_in = static_cast<int>(hr.integer("d_in"));
      p.hidden = static_cast<int>(hr.integer("hidden"));
      p.d_out = static_cast<int>(hr.integer("d_out"));
      p.head = head_kind_from_token(hr.string("head"));
      p.theta = hr.require("theta").get<std::vector<double>>();
      hr.finish();
      p.validate();
      out.heads.push_back(std::move(p));
    }
    if (const Json* knn = r.optional("knn")) {
      FieldReader kr(*knn, "knn");
      out.knn.k = static_cast<int>(kr.integer("k"));
      out.knn.labels = kr.require("labels").get<std::vector<int>>();
      out.knn.points = kr.require("points").get<std::vector<std::vector<double>>>();
      kr.finish();
      out.knn.pool_size = out.pool_size;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed router checkpoint: ") + e.what());
  }
  r.finish();
  return out;
}

void save_router(const std::filesystem::path& path, const Router& router) {
  write_text_atomic(path, serialize_router(router));
}

Router load_router(const std::filesystem::path& path) {
  std::string content;
  for (const std::string& line : read_lines(path)) content += line + "\n";
  return parse_router(content);
}

HttpMwayScorer::HttpMwayScorer(net::EndpointConfig endpoint, int pool_size)
    : client_(std::move(endpoint)), pool_size_(pool_size) {}

std::vector<double> HttpMwayScorer::scores(const Query& query) const {
  const Json reply = client_.post("/v1/route", {{"query", query.text}});
  if (!reply.contains("probabilities") || !reply["probabilities"].is_array()) {
    throw ProtocolError("route reply without probabilities for query " + query.id);
  }
  std::vector<double> out;
  for (const Json& v : reply["probabilities"]) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ProtocolError("non-numeric route probability for query " + query.id);
    }
    out.push_back(v.get<double>());
  }
  if (static_cast<int>(out.size()) != pool_size_) {
    throw ProtocolError("route reply has " + std::to_string(out.size()) +
                        " probabilities, pool has " + std::to_string(pool_size_));
  }
  return out;
}

}  // namespace divcov::router
