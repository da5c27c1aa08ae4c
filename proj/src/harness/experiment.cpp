#include "divcov/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "divcov/core/error.hpp"
#include "divcov/core/hash.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/equiv/embedder.hpp"

namespace divcov::harness {

std::filesystem::path RunPaths::features(const std::string& encoder_id) const {
  return dir / router::feature_file_name(encoder_id);
}

std::filesystem::path RunPaths::router(router::RouterKind kind) const {
  return dir / router::router_checkpoint_name(kind);
}

std::filesystem::path RunPaths::router_seed(router::RouterKind kind, int seed_index) const {
  return dir / "routers" /
         ("router." + std::string(to_token(kind)) + ".seed" + std::to_string(seed_index) + ".json");
}

std::filesystem::path RunPaths::grid_report(router::RouterKind kind) const {
  return dir / ("grid." + std::string(to_token(kind)) + ".csv");
}

std::filesystem::path RunPaths::plan(const std::string& name) const {
  std::string safe = name;
  std::replace(safe.begin(), safe.end(), ':', '_');
  return dir / ("plan." + safe + ".ndjson");
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  return read_ndjson<Query>(path);
}

std::unordered_map<std::string, Query> index_queries(const std::vector<Query>& queries) {
  std::unordered_map<std::string, Query> out;
  for (const Query& q : queries) {
    if (!out.emplace(q.id, q).second) throw ContractError("duplicate query id " + q.id);
  }
  return out;
}

Split load_or_make_split(const ExperimentConfig& config, const RunPaths& paths,
                         const std::vector<Query>& queries) {
  std::vector<std::string> ids;
  for (const Query& q : queries) ids.push_back(q.id);
  if (std::filesystem::exists(paths.split())) {
    Split split = read_split(paths.split());
    std::set<std::string> known(ids.begin(), ids.end());
    for (Part p : {Part::kTrain, Part::kVal, Part::kTest}) {
      for (const std::string& q : split.part(p)) {
        if (!known.count(q)) throw ContractError("split names unknown query " + q);
      }
    }
    return split;
  }
  Split split = split_dataset(ids, config.split_fractions, config.split_seed);
  write_split(paths.split(), split);
  return split;
}

std::vector<std::string> encoder_ids_for(const ExperimentConfig& config, router::RouterKind kind) {
  const EncoderConfig& e = config.router.encoder;
  if (e.kind == "agnostic") return {router::agnostic_encoder_id(e.model)};
  if (kind == router::RouterKind::kBinaryMlps) {
    std::vector<std::string> ids;
    for (const ModelId& m : config.pool) ids.push_back(router::specific_encoder_id(m.name));
    return ids;
  }
  const std::string model = e.mway_model.empty() ? config.pool.front().name : e.mway_model;
  pool_index_of(config.pool, model);
  return {router::specific_encoder_id(model)};
}

router::FeatureBank load_features(const ExperimentConfig& config, const RunPaths& paths,
                                  const std::vector<Query>& queries, bool encode_missing) {
  std::vector<std::string> ids;
  for (const Query& q : queries) ids.push_back(q.id);
  std::set<std::string> needed;
  for (auto kind : config.router.kinds) {
    for (const auto& id : encoder_ids_for(config, kind)) needed.insert(id);
  }
  router::FeatureBank bank;
  for (const std::string& id : needed) {
    if (config.router.encoder.kind == "agnostic") {
      const auto file = paths.features(id);
      if (std::filesystem::exists(file)) {
        bank.emplace(id, router::read_features(file, id));
      } else if (encode_missing && config.router.encoder.endpoint) {
        auto embedder = std::make_shared<equiv::HttpEmbedder>(*config.router.encoder.endpoint,
                                                              config.router.encoder.model);
        router::AgnosticEncoder encoder(embedder);
        router::FeatureSet set = encoder.encode_all(queries, std::max(1, config.threads));
        router::write_features(file, set);
        bank.emplace(id, std::move(set));
      } else {
        throw IncompleteError("missing feature file " + file.string());
      }
    } else {
      const std::string model = id.substr(std::string("specific:").size());
      const auto file = config.router.encoder.dir / router::feature_file_name(id);
      if (!std::filesystem::exists(file)) {
        throw IncompleteError("missing feature file " + file.string());
      }
      bank.emplace(id, router::load_specific_features(
                           file, config.pool[pool_index_of(config.pool, model)], ids));
    }
    bank.at(id).require(ids);
  }
  return bank;
}

router::RouterTrainSpec router_train_spec(const ExperimentConfig& config, router::RouterKind kind) {
  router::RouterTrainSpec spec;
  spec.kind = kind;
  spec.binary_soft_loss = config.router.binary_soft_loss;
  spec.soft_threshold = config.router.soft_threshold;
  spec.encoder_ids = encoder_ids_for(config, kind);
  return spec;
}

namespace {

constexpr double kDominanceSlack = 1e-12;

enum class MethodKind {
  kTopOverall,
  kTopK,
  kRandom,
  kFrequency,
  kOracle,
  kOracleTopTwo,
  kOracleRatio,
  kFixed,
  kRouter,
};

struct Method {
  std::string name;
  MethodKind kind = MethodKind::kTopOverall;
  int k = 1;
  router::RouterKind router_kind = router::RouterKind::kMwayMlp;
};

Method parse_method(const std::string& name, const ExperimentConfig& config) {
  Method m;
  m.name = name;
  if (name == "top_overall") {
    m.kind = MethodKind::kTopOverall;
  } else if (name == "top_two") {
    m.kind = MethodKind::kTopK;
    m.k = 2;
  } else if (name.rfind("top_k:", 0) == 0) {
    m.kind = MethodKind::kTopK;
    try {
      m.k = std::stoi(name.substr(6));
    } catch (const std::exception&) {
      throw ContractError("bad method " + name);
    }
    if (m.k < 1 || m.k > static_cast<int>(config.pool.size())) {
      throw ContractError("method " + name + " needs 1 <= k <= pool size");
    }
  } else if (name == "random") {
    m.kind = MethodKind::kRandom;
  } else if (name == "frequency") {
    m.kind = MethodKind::kFrequency;
  } else if (name == "oracle") {
    m.kind = MethodKind::kOracle;
  } else if (name == "oracle_top_two") {
    m.kind = MethodKind::kOracleTopTwo;
  } else if (name == "oracle_ratio") {
    m.kind = MethodKind::kOracleRatio;
    if (config.pool.size() < 2) throw ContractError("oracle_ratio needs two models");
  } else if (name == "fixed") {
    m.kind = MethodKind::kFixed;
    if (config.ensemble.models.empty()) throw ContractError("fixed method needs ensemble.models");
  } else if (name.rfind("router:", 0) == 0) {
    m.kind = MethodKind::kRouter;
    m.router_kind = router::router_kind_from_token(name.substr(7));
    if (std::find(config.router.kinds.begin(), config.router.kinds.end(), m.router_kind) ==
        config.router.kinds.end()) {
      throw ContractError("method " + name + " is not among router.kinds");
    }
  } else {
    throw ContractError("unknown method " + name);
  }
  return m;
}

bool needs_answers(const Method& m, const ExperimentConfig& config) {
  switch (m.kind) {
    case MethodKind::kTopK: return m.k > 1;
    case MethodKind::kOracleTopTwo:
    case MethodKind::kOracleRatio: return true;
    case MethodKind::kFixed: return config.ensemble.models.size() > 1;
    case MethodKind::kRouter: return config.router.top_k > 1;
    default: return false;
  }
}

// One plan per query, each at most one model with the full budget.
bool single_model(const Method& m, const ExperimentConfig& config) {
  switch (m.kind) {
    case MethodKind::kTopOverall:
    case MethodKind::kRandom:
    case MethodKind::kFrequency:
    case MethodKind::kOracle: return true;
    case MethodKind::kTopK: return m.k == 1;
    case MethodKind::kFixed: return config.ensemble.models.size() == 1;
    case MethodKind::kRouter: return config.router.top_k == 1;
    default: return false;
  }
}

// At most two models per query, split half/half.
bool half_split(const Method& m, const ExperimentConfig& config) {
  if (single_model(m, config)) return true;
  switch (m.kind) {
    case MethodKind::kTopK: return m.k == 2;
    case MethodKind::kRouter: return config.router.top_k == 2;
    case MethodKind::kOracleTopTwo: return true;
    default: return false;
  }
}

struct EvalSet {
  std::string name;
  const ScoreTable* table;
};

std::string file_sha(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IncompleteError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

EnsemblePlan routed_plan(const router::Router& r, const std::vector<std::string>& ids,
                         const ModelPool& pool, int budget, int top_k,
                         const router::FeatureBank& bank, std::vector<double>* route_ms) {
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : ids) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<int> models = r.route(q, bank, top_k);
    if (route_ms) {
      route_ms->push_back(std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count());
    }
    if (models.size() == 1) {
      plan.rows.push_back(PlanRow{q, {Allocation{pool[models[0]], budget}}});
    } else {
      const std::vector<double> half(models.size(), 1.0 / static_cast<double>(models.size()));
      plan.rows.push_back(ensemble::make_row(q, pool, models, half, budget));
    }
  }
  return plan;
}

ensemble::MeanMetrics average(const std::vector<ensemble::MeanMetrics>& runs) {
  ensemble::MeanMetrics m;
  for (const auto& r : runs) {
    m.div_cov += r.div_cov;
    m.n_unique += r.n_unique;
    m.qual += r.qual;
    m.unq_qual += r.unq_qual;
  }
  const auto n = static_cast<double>(runs.size());
  m.div_cov /= n;
  m.n_unique /= n;
  m.qual /= n;
  m.unq_qual /= n;
  return m;
}

std::string grid_csv(const router::GridResult& g) {
  std::string out = "index,label_mode,weight_decay,hidden_dim,knn_k,val_div_cov,val_loss,selected,error\n";
  char buf[512];
  for (std::size_t i = 0; i < g.report.size(); ++i) {
    const auto& p = g.report[i];
    std::snprintf(buf, sizeof(buf), "%zu,%s,%.6g,%d,%d,%s,%s,%d,", i,
                  std::string(router::to_token(p.label_mode)).c_str(), p.weight_decay,
                  p.hidden_dim, p.knn_k,
                  p.val_div_cov ? std::to_string(*p.val_div_cov).c_str() : "",
                  p.final_val_loss ? std::to_string(*p.final_val_loss).c_str() : "",
                  i == g.best_index ? 1 : 0);
    std::string err = p.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += buf + err + "\n";
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const RunPaths& paths) {
  // Validate everything up front.
  std::vector<Method> methods;
  for (const std::string& name : config.experiment.methods) {
    methods.push_back(parse_method(name, config));
  }
  const Method baseline = parse_method(config.experiment.baseline, config);
  if (baseline.kind == MethodKind::kRandom || baseline.kind == MethodKind::kFrequency ||
      baseline.kind == MethodKind::kRouter) {
    throw ContractError("baseline must be a deterministic method");
  }
  const SignificanceTest sig_test = significance_test_from_token(config.experiment.significance);

  std::vector<Query> queries = load_queries(config.queries);
  const Split split = load_or_make_split(config, paths, queries);
  std::vector<Query> ood_queries;
  if (config.ood_queries) ood_queries = load_queries(*config.ood_queries);
  std::vector<Query> all_queries = queries;
  all_queries.insert(all_queries.end(), ood_queries.begin(), ood_queries.end());
  const auto qmap = index_queries(all_queries);

  const ScoreFile scores = read_score_table(paths.scores());
  const ScoreTable& table = scores.table;
  if (table.pool() != config.pool) throw ContractError("scores.ndjson pool differs from config");
  if (table.budget() != config.budget) throw ContractError("scores.ndjson budget differs from config");
  for (Part p : {Part::kTrain, Part::kVal, Part::kTest}) {
    for (const std::string& q : split.part(p)) {
      if (!table.contains_query(q)) throw IncompleteError("no score rows for query " + q);
    }
  }
  if (split.train.empty() || split.test.empty()) throw ContractError("train and test must be non-empty");
  const ScoreTable train = table.subset(split.train);
  const ScoreTable val = table.subset(split.val);
  const ScoreTable test = table.subset(split.test);
  std::optional<ScoreTable> ood;
  if (config.ood_queries) {
    ScoreFile f = read_score_table(paths.ood_scores());
    if (f.table.pool() != config.pool) throw ContractError("OOD scores pool differs from config");
    std::vector<std::string> ids;
    for (const Query& q : ood_queries) ids.push_back(q.id);
    ood = f.table.subset(ids);
  }

  std::vector<EvalSet> eval_sets;
  if (!split.val.empty()) eval_sets.push_back({"val", &val});
  eval_sets.push_back({"test", &test});
  if (ood) eval_sets.push_back({"ood", &*ood});

  ExperimentReport report;
  report.config_hash = config.hash;
  report.artifacts["scores.ndjson"] = file_sha(paths.scores());
  report.artifacts["split.json"] = file_sha(paths.split());
  if (ood) report.artifacts["scores.ood.ndjson"] = file_sha(paths.ood_scores());

  bool want_answers = false;
  bool want_routers = false;
  for (const Method& m : methods) {
    want_answers = want_answers || needs_answers(m, config);
    want_routers = want_routers || m.kind == MethodKind::kRouter;
  }
  std::optional<AnswerStore> store;
  ensemble::InMemoryAnswerBank empty_bank;
  if (want_answers) {
    store.emplace(paths.dir, config.sampling_hash, config.pool);
    for (const EvalSet& es : eval_sets) {
      for (const std::string& q : es.table->query_ids()) {
        for (const ModelId& m : config.pool) {
          if (!store->has(q, m.pool_index)) {
            throw IncompleteError("no stored answers for query " + q + " / model " + m.name);
          }
        }
      }
    }
    std::string digest;
    for (const EvalSet& es : eval_sets) {
      for (const std::string& q : es.table->query_ids()) {
        for (const ModelId& m : config.pool) {
          digest += q + "\t" + m.name + "\t" + store->sha(q, m.pool_index).value_or("") + "\n";
        }
      }
    }
    report.artifacts["answers"] = sha256_hex(digest);
  }
  const ensemble::AnswerBank& bank = store ? static_cast<const ensemble::AnswerBank&>(*store)
                                           : empty_bank;
  router::FeatureBank features;
  if (want_routers) {
    if (split.val.empty()) throw ContractError("router training needs a validation split");
    features = load_features(config, paths, all_queries, false);
    for (const auto& [id, set] : features) {
      const auto file = config.router.encoder.kind == "agnostic"
                            ? paths.features(id)
                            : config.router.encoder.dir / router::feature_file_name(id);
      report.artifacts[file.filename().string()] = file_sha(file);
    }
  }
  const metrics::MetricSuite suite = make_metric_suite(config);

  // Baselines see the training rows only.
  const std::set<std::string> train_ids(split.train.begin(), split.train.end());
  train.set_access_observer([&](const std::string& q) {
    if (!train_ids.count(q)) throw ContractError("baseline fit read non-training query " + q);
  });
  const std::vector<int> ranked = ensemble::fit_top_overall(train);
  const std::vector<double> frequency = ensemble::fit_frequency(train);
  train.set_access_observer(nullptr);

  // Routers: one grid search per seed.
  std::map<router::RouterKind, std::vector<router::Router>> routers;
  for (const Method& m : methods) {
    if (m.kind != MethodKind::kRouter || routers.count(m.router_kind)) continue;
    auto& list = routers[m.router_kind];
    for (int s = 0; s < config.experiment.seeds; ++s) {
      router::TrainConfig base = config.router.train;
      base.seed = config.router.train.seed + 10007ULL * static_cast<std::uint64_t>(s);
      router::GridResult g = router::grid_search(train, val, features,
                                                 router_train_spec(config, m.router_kind),
                                                 config.router.grid, base);
      router::save_router(paths.router_seed(m.router_kind, s), g.best);
      if (s == 0) {
        router::save_router(paths.router(m.router_kind), g.best);
        write_text_atomic(paths.grid_report(m.router_kind), grid_csv(g));
      }
      report.artifacts[paths.router_seed(m.router_kind, s).filename().string()] =
          file_sha(paths.router_seed(m.router_kind, s));
      list.push_back(std::move(g.best));
    }
  }

  const int budget = config.budget;
  const ModelPool& pool = config.pool;
  std::vector<double> route_ms;

  auto evaluate = [&](const EnsemblePlan& plan, const ScoreTable& t) {
    ensemble::EvaluateOptions opts;
    opts.table = &t;
    opts.threads = config.threads;
    return ensemble::evaluate_plan(plan, bank, qmap, suite, opts).mean;
  };

  // Runs of one method on one evaluation set.
  auto run_method = [&](const Method& m, const EvalSet& es) {
    const auto& ids = es.table->query_ids();
    std::vector<ensemble::MeanMetrics> runs;
    switch (m.kind) {
      case MethodKind::kTopOverall:
        runs.push_back(evaluate(ensemble::top_k_plan(ids, pool, ranked, 1, budget), *es.table));
        break;
      case MethodKind::kTopK:
        runs.push_back(evaluate(ensemble::top_k_plan(ids, pool, ranked, m.k, budget), *es.table));
        break;
      case MethodKind::kRandom:
      case MethodKind::kFrequency:
        for (int d = 0; d < config.ensemble.draws; ++d) {
          Rng rng(config.ensemble.seed + static_cast<std::uint64_t>(d));
          const EnsemblePlan plan =
              m.kind == MethodKind::kRandom
                  ? ensemble::random_plan(ids, pool, budget, rng)
                  : ensemble::frequency_plan(ids, pool, frequency, budget, rng);
          runs.push_back(evaluate(plan, *es.table));
        }
        break;
      case MethodKind::kOracle:
        runs.push_back(evaluate(ensemble::oracle_per_query(*es.table), *es.table));
        break;
      case MethodKind::kOracleTopTwo:
        runs.push_back(evaluate(
            ensemble::oracle_top_two_per_query(ids, pool, budget,
                                               ensemble::merged_div_cov_scorer(bank, qmap, suite)),
            *es.table));
        break;
      case MethodKind::kOracleRatio:
        runs.push_back(evaluate(
            ensemble::oracle_ratio_plan(ids, pool, ranked[0], ranked[1], config.ensemble.ratio_grid,
                                        budget, ensemble::merged_div_cov_scorer(bank, qmap, suite)),
            *es.table));
        break;
      case MethodKind::kFixed: {
        std::vector<int> models;
        for (const auto& name : config.ensemble.models) models.push_back(pool_index_of(pool, name));
        runs.push_back(evaluate(
            ensemble::fixed_plan(ids, pool, models, config.ensemble.ratios, budget), *es.table));
        break;
      }
      case MethodKind::kRouter: {
        const auto& list = routers.at(m.router_kind);
        for (std::size_t s = 0; s < list.size(); ++s) {
          const bool timed = es.name == "test" && s == 0;
          runs.push_back(evaluate(routed_plan(list[s], ids, pool, budget, config.router.top_k,
                                              features, timed ? &route_ms : nullptr),
                                  *es.table));
        }
        break;
      }
    }
    return runs;
  };

  for (const EvalSet& es : eval_sets) {
    const double baseline_cov = average(run_method(baseline, es)).div_cov;
    std::optional<double> oracle_cov;
    std::optional<double> oracle_two_cov;
    const std::size_t first_row = report.rows.size();
    for (const Method& m : methods) {
      const auto runs = run_method(m, es);
      ReportRow row;
      row.method = m.name;
      row.split = es.name;
      row.runs = static_cast<int>(runs.size());
      row.mean = average(runs);
      if (runs.size() > 1) {
        std::vector<double> covs;
        for (const auto& r : runs) covs.push_back(r.div_cov);
        row.cov_std = sample_stddev(covs);
        if (m.name != baseline.name) {
          SignificanceResult sig = significance_test(covs, baseline_cov, config.experiment.alpha, sig_test);
          sig.method = m.name;
          sig.baseline = baseline.name;
          row.significance = std::move(sig);
        }
      }
      if (m.kind == MethodKind::kOracle) oracle_cov = row.mean.div_cov;
      if (m.kind == MethodKind::kOracleTopTwo) oracle_two_cov = row.mean.div_cov;
      report.rows.push_back(std::move(row));
    }
    if (!oracle_cov) oracle_cov = average(run_method(parse_method("oracle", config), es)).div_cov;
    for (std::size_t i = first_row; i < report.rows.size(); ++i) {
      const ReportRow& row = report.rows[i];
      const Method m = parse_method(row.method, config);
      if (single_model(m, config) && row.mean.div_cov > *oracle_cov + kDominanceSlack) {
        throw ContractError("oracle dominance violated by " + row.method + " on " + es.name);
      }
      if (oracle_two_cov && half_split(m, config) &&
          row.mean.div_cov > *oracle_two_cov + kDominanceSlack) {
        throw ContractError("oracle_top_two dominance violated by " + row.method + " on " +
                            es.name);
      }
    }
  }

  if (!route_ms.empty()) {
    std::string log;
    for (std::size_t i = 0; i < route_ms.size() && i < split.test.size(); ++i) {
      log += Json{{"phase", "route"}, {"query_id", split.test[i]}, {"model", ""},
                  {"ms", route_ms[i]}}.dump() + "\n";
    }
    write_text_atomic(paths.route_timing(), log);
  }

  report.notes.push_back("baseline: " + baseline.name);
  report.notes.push_back("significance: " + config.experiment.significance + " test over " +
                         std::to_string(config.experiment.seeds) +
                         " router seeds, alpha " + std::to_string(config.experiment.alpha));
  report.notes.push_back("random and frequency: mean over " +
                         std::to_string(config.ensemble.draws) + " seeded draws");
  report.notes.push_back("router top_k: " + std::to_string(config.router.top_k));
  return report;
}

std::string report_json(const ExperimentReport& report) {
  Json rows = Json::array();
  for (const ReportRow& r : report.rows) {
    Json row = {{"method", r.method},
                {"split", r.split},
                {"runs", r.runs},
                {"n_unique", r.mean.n_unique},
                {"qual", r.mean.qual},
                {"unq_qual", r.mean.unq_qual},
                {"cov", r.mean.div_cov}};
    if (r.cov_std) row["cov_std"] = *r.cov_std;
    if (r.significance) {
      const auto& s = *r.significance;
      Json stat = std::isfinite(s.statistic) ? Json(s.statistic)
                                             : Json(s.statistic > 0 ? "inf" : "-inf");
      row["significance"] = {{"baseline", s.baseline},
                             {"baseline_score", s.baseline_score},
                             {"seed_scores", s.seed_scores},
                             {"statistic", stat},
                             {"p_value", s.p_value},
                             {"verdict", to_token(s.verdict)}};
    }
    rows.push_back(std::move(row));
  }
  const Json doc = {{"config_hash", report.config_hash},
                    {"rows", rows},
                    {"notes", report.notes},
                    {"artifacts", report.artifacts}};
  return doc.dump(2) + "\n";
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "method,split,runs,n_unique,qual,unq_qual,cov,cov_std,p_value,verdict\n";
  char buf[512];
  for (const ReportRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.6f,%.6f,%.6f,%.6f,", r.method.c_str(),
                  r.split.c_str(), r.runs, r.mean.n_unique, r.mean.qual, r.mean.unq_qual,
                  r.mean.div_cov);
    out += buf;
    if (r.cov_std) {
      std::snprintf(buf, sizeof(buf), "%.6f", *r.cov_std);
      out += buf;
    }
    out += ',';
    if (r.significance) {
      std::snprintf(buf, sizeof(buf), "%.6g,%s", r.significance->p_value,
                    std::string(to_token(r.significance->verdict)).c_str());
      out += buf;
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

std::string report_text(const ExperimentReport& report) {
  std::string out = "config " + report.config_hash.substr(0, 12) + "\n";
  std::string current;
  char buf[512];
  for (const ReportRow& r : report.rows) {
    if (r.split != current) {
      current = r.split;
      std::snprintf(buf, sizeof(buf), "\n[%s]\n%-22s %8s %8s %9s %9s %4s\n", current.c_str(),
                    "Method", "#Unq", "Qual", "UnqQual", "Cov", "");
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-22s %8.2f %8.2f %9.2f %8.2f%% %4s\n", r.method.c_str(),
                  r.mean.n_unique, r.mean.qual, r.mean.unq_qual, 100.0 * r.mean.div_cov,
                  r.significance ? std::string(to_token(r.significance->verdict)).c_str() : "");
    out += buf;
  }
  out += "\n";
  for (const std::string& n : report.notes) out += "note: " + n + "\n";
  return out;
}

void write_report(const RunPaths& paths, const ExperimentReport& report) {
  write_text_atomic(paths.dir / "report.json", report_json(report));
  write_text_atomic(paths.dir / "report.csv", report_csv(report));
  write_text_atomic(paths.dir / "report.txt", report_text(report));
}

std::vector<ScalingPoint> scaling_study(const ScoreTable& train, const ScoreTable& val,
                                        const ScoreTable& test, const router::FeatureBank& bank,
                                        const router::RouterTrainSpec& spec,
                                        const router::GridSpec& grid,
                                        const router::TrainConfig& base,
                                        const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.empty()) throw ContractError("scaling needs at least one size");
  std::vector<std::string> order = train.query_ids();
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<ScalingPoint> out;
  for (int size : sizes) {
    if (size < 1 || size > static_cast<int>(order.size())) {
      throw ContractError("scaling size " + std::to_string(size) + " exceeds " +
                          std::to_string(order.size()) + " training queries");
    }
    ScalingPoint p;
    p.size = size;
    p.train_ids.assign(order.begin(), order.begin() + size);
    const ScoreTable sub = train.subset(p.train_ids);
    const router::GridResult g = router::grid_search(sub, val, bank, spec, grid, base);
    p.val_cov = router::routing_div_cov(g.best, val, bank);
    p.test_cov = router::routing_div_cov(g.best, test, bank);
    out.push_back(std::move(p));
  }
  return out;
}

std::string scaling_csv(const std::vector<ScalingPoint>& points) {
  std::string out = "size,val_cov,test_cov\n";
  char buf[128];
  for (const ScalingPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", p.size, p.val_cov, p.test_cov);
    out += buf;
  }
  return out;
}

std::string position_profile_csv(const std::vector<Query>& queries, const ModelPool& pool,
                                 const ensemble::AnswerBank& bank,
                                 const metrics::MetricSuite& suite) {
  std::string out = "model,space,position,mean,variance\n";
  char buf[256];
  const auto qmap = index_queries(queries);
  for (const ModelId& m : pool) {
    for (AnswerSpace space : {AnswerSpace::kFixedSet, AnswerSpace::kOpenEnded}) {
      const metrics::QualityProvider* provider =
          space == AnswerSpace::kFixedSet ? suite.fixed_quality.get() : suite.open_quality.get();
      if (!provider) continue;
      std::vector<AnswerSet> sets;
      for (const Query& q : queries) {
        if (q.space != space) continue;
        try {
          sets.push_back(bank.get(q.id, m.pool_index));
        } catch (const IncompleteError&) {
        }
      }
      if (sets.empty()) continue;
      const auto profile = metrics::position_quality_profile(sets, qmap, *provider);
      for (std::size_t p = 0; p < profile.size(); ++p) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,", m.name.c_str(),
                      std::string(to_token(space)).c_str(), p, profile[p].mean);
        out += buf;
        if (profile[p].variance) {
          std::snprintf(buf, sizeof(buf), "%.6f", *profile[p].variance);
          out += buf;
        }
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace divcov::harness
