#include "divcov/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "divcov/core/error.hpp"
#include "divcov/core/hash.hpp"
#include "divcov/equiv/embedder.hpp"
#include "divcov/equiv/provider.hpp"
#include "divcov/metrics/quality.hpp"

namespace divcov::harness {

namespace {

using Reader = FieldReader;

std::vector<double> number_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw_field_error("expected an array", path);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(json_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> int_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw_field_error("expected an array", path);
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<int>(json_integer(v[i], path + "[" + std::to_string(i) + "]")));
  }
  return out;
}

std::vector<std::string> string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw_field_error("expected an array", path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(json_string(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::uint64_t seed_value(Reader& r, std::string_view key, std::uint64_t fallback) {
  const Json* v = r.optional(key);
  if (!v) return fallback;
  const std::int64_t s = json_integer(*v, r.child_path(key));
  if (s < 0) throw_field_error("seed must be >= 0", r.child_path(key));
  return static_cast<std::uint64_t>(s);
}

net::EndpointConfig endpoint_config(const Json& v, const std::string& path,
                                    int* max_inflight = nullptr) {
  Reader r(v, path);
  net::EndpointConfig e;
  e.base_url = r.string("base_url");
  if (r.optional("api_key_env")) e.api_key_env = r.string("api_key_env");
  if (r.optional("timeout_ms")) e.timeout_ms = static_cast<int>(r.integer("timeout_ms"));
  if (r.optional("retries")) e.retries = static_cast<int>(r.integer("retries"));
  if (max_inflight && r.optional("max_inflight")) {
    *max_inflight = static_cast<int>(r.integer("max_inflight"));
  }
  r.finish();
  if (e.timeout_ms < 1) throw_field_error("timeout_ms must be >= 1", path);
  if (e.retries < 0) throw_field_error("retries must be >= 0", path);
  return e;
}

std::optional<net::EndpointConfig> optional_endpoint(Reader& r, std::string_view key) {
  if (const Json* v = r.optional(key)) return endpoint_config(*v, r.child_path(key));
  return std::nullopt;
}

void parse_open_scoring(const Json& v, const std::string& path, OpenScoringConfig& o) {
  Reader r(v, path);
  if (r.optional("quality")) o.quality = r.string("quality");
  o.reward_endpoint = optional_endpoint(r, "reward_endpoint");
  if (r.optional("reward_batch")) o.reward_batch = r.boolean("reward_batch");
  if (const Json* t = r.optional("thresholds")) o.thresholds = number_list(*t, r.child_path("thresholds"));
  if (r.optional("q_max")) o.q_max = r.number("q_max");
  if (r.optional("equivalence")) o.equivalence = r.string("equivalence");
  o.equivalence_endpoint = optional_endpoint(r, "equivalence_endpoint");
  if (r.optional("equivalence_batch")) o.equivalence_batch = r.boolean("equivalence_batch");
  o.embedding_endpoint = optional_endpoint(r, "embedding_endpoint");
  if (r.optional("embedding_model")) o.embedding_model = r.string("embedding_model");
  r.finish();

  if (o.quality != "reward" && o.quality != "constant") {
    throw_field_error("quality must be reward or constant", path + ".quality");
  }
  if (o.quality == "reward") {
    if (!o.reward_endpoint) throw_field_error("reward quality needs reward_endpoint", path);
    if (o.thresholds.size() != static_cast<std::size_t>(metrics::kRewardThresholdCount)) {
      throw_field_error("thresholds must hold 9 cut points", path + ".thresholds");
    }
  }
  if (o.equivalence == "remote" && !o.equivalence_endpoint) {
    throw_field_error("remote equivalence needs equivalence_endpoint", path);
  }
  if (o.equivalence == "cosine" && (!o.embedding_endpoint || o.embedding_model.empty())) {
    throw_field_error("cosine equivalence needs embedding_endpoint and embedding_model", path);
  }
  if (o.equivalence != "remote" && o.equivalence != "cosine" &&
      o.equivalence != "normalized" && o.equivalence != "exact") {
    throw_field_error("unknown equivalence", path + ".equivalence");
  }
}

void parse_router(const Json& v, const std::string& path, RouterConfig& rc) {
  Reader r(v, path);
  if (const Json* kinds = r.optional("kinds")) {
    rc.kinds.clear();
    for (const auto& k : string_list(*kinds, r.child_path("kinds"))) {
      rc.kinds.push_back(router::router_kind_from_token(k));
    }
  }
  if (const Json* e = r.optional("encoder")) {
    Reader er(*e, r.child_path("encoder"));
    if (er.optional("kind")) rc.encoder.kind = er.string("kind");
    if (er.optional("model")) rc.encoder.model = er.string("model");
    rc.encoder.endpoint = optional_endpoint(er, "endpoint");
    if (er.optional("dir")) rc.encoder.dir = er.string("dir");
    if (er.optional("mway_model")) rc.encoder.mway_model = er.string("mway_model");
    er.finish();
    if (rc.encoder.kind != "agnostic" && rc.encoder.kind != "specific") {
      throw_field_error("encoder kind must be agnostic or specific", er.child_path("kind"));
    }
    if (rc.encoder.kind == "agnostic" && rc.encoder.model.empty()) {
      throw_field_error("agnostic encoder needs a model", er.path());
    }
  }
  if (const Json* g = r.optional("grid")) {
    Reader gr(*g, r.child_path("grid"));
    if (const Json* m = gr.optional("label_modes")) {
      rc.grid.label_modes.clear();
      for (const auto& s : string_list(*m, gr.child_path("label_modes"))) {
        rc.grid.label_modes.push_back(router::label_mode_from_token(s));
      }
    }
    if (const Json* w = gr.optional("weight_decays")) {
      rc.grid.weight_decays = number_list(*w, gr.child_path("weight_decays"));
    }
    if (const Json* h = gr.optional("hidden_dims")) {
      rc.grid.hidden_dims = int_list(*h, gr.child_path("hidden_dims"));
    }
    if (const Json* k = gr.optional("knn_ks")) rc.grid.knn_ks = int_list(*k, gr.child_path("knn_ks"));
    gr.finish();
  }
  if (const Json* t = r.optional("train")) {
    Reader tr(*t, r.child_path("train"));
    if (tr.optional("learning_rate")) rc.train.learning_rate = tr.number("learning_rate");
    if (tr.optional("beta1")) rc.train.beta1 = tr.number("beta1");
    if (tr.optional("beta2")) rc.train.beta2 = tr.number("beta2");
    if (tr.optional("epsilon")) rc.train.epsilon = tr.number("epsilon");
    if (tr.optional("epochs")) rc.train.epochs = static_cast<int>(tr.integer("epochs"));
    if (tr.optional("batch_size")) rc.train.batch_size = static_cast<int>(tr.integer("batch_size"));
    rc.train.seed = seed_value(tr, "seed", rc.train.seed);
    tr.finish();
  }
  if (r.optional("binary_soft_loss")) {
    rc.binary_soft_loss = router::binary_soft_loss_from_token(r.string("binary_soft_loss"));
  }
  if (r.optional("soft_threshold")) rc.soft_threshold = r.number("soft_threshold");
  if (r.optional("top_k")) rc.top_k = static_cast<int>(r.integer("top_k"));
  r.finish();
  if (rc.top_k != 1 && rc.top_k != 2) throw_field_error("top_k must be 1 or 2", path + ".top_k");
  try {
    rc.train.validate();
    for (auto kind : rc.kinds) rc.grid.validate(kind);
  } catch (const ContractError& e) {
    throw_field_error(e.what(), path);
  }
}

void parse_ensemble(const Json& v, const std::string& path, EnsembleConfig& ec) {
  Reader r(v, path);
  if (r.optional("kind")) ec.kind = ensemble::strategy_kind_from_token(r.string("kind"));
  if (r.optional("k")) ec.k = static_cast<int>(r.integer("k"));
  if (const Json* m = r.optional("models")) ec.models = string_list(*m, r.child_path("models"));
  if (const Json* x = r.optional("ratios")) ec.ratios = number_list(*x, r.child_path("ratios"));
  ec.seed = seed_value(r, "seed", ec.seed);
  if (r.optional("draws")) ec.draws = static_cast<int>(r.integer("draws"));
  if (const Json* g = r.optional("ratio_grid")) {
    ec.ratio_grid = number_list(*g, r.child_path("ratio_grid"));
  }
  r.finish();
  if (ec.draws < 1) throw_field_error("draws must be >= 1", path + ".draws");
  if (ec.kind == ensemble::StrategyKind::kFixedModels &&
      (ec.models.empty() || ec.models.size() != ec.ratios.size())) {
    throw_field_error("fixed ensemble needs models and matching ratios", path);
  }
}

void parse_experiment(const Json& v, const std::string& path, ExperimentSection& ex) {
  Reader r(v, path);
  if (r.optional("seeds")) ex.seeds = static_cast<int>(r.integer("seeds"));
  if (const Json* m = r.optional("methods")) ex.methods = string_list(*m, r.child_path("methods"));
  if (r.optional("baseline")) ex.baseline = r.string("baseline");
  if (r.optional("significance")) ex.significance = r.string("significance");
  if (r.optional("alpha")) ex.alpha = r.number("alpha");
  r.finish();
  if (ex.seeds < 2) throw_field_error("seeds must be >= 2", path + ".seeds");
  if (ex.significance != "t" && ex.significance != "permutation") {
    throw_field_error("significance must be t or permutation", path + ".significance");
  }
  if (!(ex.alpha > 0.0 && ex.alpha < 1.0)) throw_field_error("alpha must be in (0,1)", path);
}

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : dir / path;
}

}  // namespace

ExperimentConfig parse_config(const Json& doc, std::filesystem::path config_dir) {
  if (!doc.is_object()) throw_field_error("config must be a JSON object", "");
  ExperimentConfig c;
  c.config_dir = std::move(config_dir);
  Reader r(doc, "");
  c.queries = resolve(c.config_dir, r.string("queries"));
  if (r.optional("ood_queries")) c.ood_queries = resolve(c.config_dir, r.string("ood_queries"));
  try {
    c.pool = make_pool(string_list(r.require("pool"), r.child_path("pool")));
    validate_pool(c.pool);
  } catch (const ContractError& e) {
    throw_field_error(e.what(), "pool");
  }
  if (r.optional("prompt_kind")) c.prompt_kind = prompt_kind_from_token(r.string("prompt_kind"));
  if (r.optional("budget")) c.budget = static_cast<int>(r.integer("budget"));
  if (c.budget < 1) throw_field_error("budget must be >= 1", "budget");
  if (const Json* n = r.optional("item_noun")) {
    Reader nr(*n, r.child_path("item_noun"));
    c.item_noun.singular = nr.string("singular");
    c.item_noun.plural = nr.string("plural");
    nr.finish();
  }
  if (const Json* d = r.optional("decoding")) {
    Reader dr(*d, r.child_path("decoding"));
    if (dr.optional("temperature")) c.decoding.temperature = dr.number("temperature");
    if (dr.optional("top_p")) c.decoding.top_p = dr.number("top_p");
    if (dr.optional("max_tokens")) c.decoding.max_tokens = static_cast<int>(dr.integer("max_tokens"));
    if (dr.optional("seed")) c.decoding.seed = dr.integer("seed");
    dr.finish();
  }
  c.decoding.target_n = c.budget;
  try {
    c.decoding.validate();
  } catch (const ContractError& e) {
    throw_field_error(e.what(), "decoding");
  }
  if (const Json* e = r.optional("endpoint")) {
    ChatEndpointConfig ce;
    ce.http = endpoint_config(*e, r.child_path("endpoint"), &ce.max_inflight);
    if (ce.max_inflight < 1) throw_field_error("max_inflight must be >= 1", "endpoint");
    c.endpoint = ce;
  }
  if (r.optional("tau")) c.tau = r.number("tau");
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) throw_field_error("tau must be in [0,1]", "tau");
  if (const Json* o = r.optional("open_scoring")) {
    parse_open_scoring(*o, r.child_path("open_scoring"), c.open_scoring);
  }
  if (const Json* s = r.optional("split")) {
    Reader sr(*s, r.child_path("split"));
    if (const Json* f = sr.optional("fractions")) {
      c.split_fractions = number_list(*f, sr.child_path("fractions"));
    }
    c.split_seed = seed_value(sr, "seed", c.split_seed);
    sr.finish();
  }
  if (const Json* rt = r.optional("router")) parse_router(*rt, r.child_path("router"), c.router);
  if (!c.router.encoder.dir.empty()) {
    c.router.encoder.dir = resolve(c.config_dir, c.router.encoder.dir.string());
  }
  if (c.router.encoder.kind == "specific" && !c.router.encoder.dir.empty()) {
    c.router.encoder.dir = resolve(c.config_dir, c.router.encoder.dir.string());
  }
  if (const Json* e = r.optional("ensemble")) parse_ensemble(*e, r.child_path("ensemble"), c.ensemble);
  if (const Json* e = r.optional("experiment")) {
    parse_experiment(*e, r.child_path("experiment"), c.experiment);
  }
  if (const Json* s = r.optional("scaling")) {
    Reader sr(*s, r.child_path("scaling"));
    if (const Json* sizes = sr.optional("sizes")) c.scaling_sizes = int_list(*sizes, sr.child_path("sizes"));
    sr.finish();
  }
  if (r.optional("threads")) c.threads = static_cast<int>(r.integer("threads"));
  r.finish();

  c.hash = sha256_hex(doc.dump());
  const Json sampling = {{"prompt_kind", to_token(c.prompt_kind)},
                         {"budget", c.budget},
                         {"item_noun", {c.item_noun.singular, c.item_noun.plural}},
                         {"temperature", c.decoding.temperature},
                         {"top_p", c.decoding.top_p},
                         {"max_tokens", c.decoding.max_tokens},
                         {"seed", c.decoding.seed}};
  c.sampling_hash = sha256_hex(sampling.dump()).substr(0, 16);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const Json doc = parse_json(buf.str());
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(doc, dir);
}

void apply_seed(ExperimentConfig& c, std::uint64_t seed) {
  c.decoding.seed = static_cast<std::int64_t>(seed);
  c.split_seed = seed;
  c.ensemble.seed = seed;
  c.router.train.seed = seed;
  c.hash = sha256_hex(c.hash + ":seed:" + std::to_string(seed));
  c.sampling_hash = sha256_hex(c.sampling_hash + ":seed:" + std::to_string(seed)).substr(0, 16);
}

int pool_index_of(const ModelPool& pool, const std::string& name) {
  for (const ModelId& m : pool) {
    if (m.name == name) return m.pool_index;
  }
  throw ContractError("model not in pool: " + name);
}

metrics::MetricSuite make_metric_suite(const ExperimentConfig& c) {
  const OpenScoringConfig& o = c.open_scoring;
  std::shared_ptr<const metrics::QualityProvider> quality;
  if (o.quality == "reward") {
    auto source = std::make_shared<metrics::HttpRewardSource>(*o.reward_endpoint, o.reward_batch);
    quality = std::make_shared<metrics::RewardEndpointQuality>(source, o.thresholds, o.q_max);
  } else {
    quality = std::make_shared<metrics::ConstantQuality>(o.q_max);
  }
  std::shared_ptr<const equiv::EquivalenceProvider> eq;
  if (o.equivalence == "remote") {
    eq = std::make_shared<equiv::RemoteClassifier>(*o.equivalence_endpoint, o.equivalence_batch);
  } else if (o.equivalence == "cosine") {
    auto embedder = std::make_shared<equiv::CachingEmbedder>(
        std::make_shared<equiv::HttpEmbedder>(*o.embedding_endpoint, o.embedding_model));
    eq = std::make_shared<equiv::CosineThreshold>(embedder);
  } else if (o.equivalence == "exact") {
    eq = std::make_shared<equiv::ExactMatch>();
  } else {
    eq = std::make_shared<equiv::NormalizedMatch>();
  }
  return metrics::MetricSuite::with_open(quality, eq, c.tau);
}

}  // namespace divcov::harness
