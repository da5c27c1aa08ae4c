// divcov: command-line front end for the experiment pipeline.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "divcov/core/error.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/core/validate.hpp"
#include "divcov/ensemble/merge.hpp"
#include "divcov/ensemble/strategies.hpp"
#include "divcov/harness/config.hpp"
#include "divcov/harness/experiment.hpp"
#include "divcov/harness/split.hpp"
#include "divcov/harness/stats.hpp"
#include "divcov/harness/store.hpp"
#include "divcov/harness/table.hpp"
#include "divcov/harness/timing.hpp"
#include "divcov/router/labels.hpp"
#include "divcov/router/router.hpp"
#include "divcov/sampling/endpoint.hpp"

namespace {

using namespace divcov;
using namespace divcov::harness;

struct Globals {
  std::string config;
  std::string run_dir = "run";
  std::optional<std::uint64_t> seed;
  bool dry_run = false;
};

struct Context {
  ExperimentConfig config;
  RunPaths paths;
  int threads = 1;
};

Context open_context(const Globals& g) {
  if (g.config.empty()) throw ContractError("--config is required");
  Context ctx;
  ctx.config = load_config(g.config);
  if (g.seed) apply_seed(ctx.config, *g.seed);
  ctx.paths.dir = g.run_dir;
  ctx.threads = ctx.config.threads > 0
                    ? ctx.config.threads
                    : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  if (!g.dry_run) std::filesystem::create_directories(ctx.paths.dir);
  return ctx;
}

std::vector<std::string> ids_of(const std::vector<Query>& queries) {
  std::vector<std::string> ids;
  for (const Query& q : queries) ids.push_back(q.id);
  return ids;
}

std::vector<Query> ood_queries(const ExperimentConfig& config) {
  return config.ood_queries ? load_queries(*config.ood_queries) : std::vector<Query>{};
}

const std::vector<std::string>& split_part(const Split& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  throw ContractError("unknown split part " + name);
}

// Query ids for an evaluation target: a split part or "ood".
std::vector<std::string> target_ids(const Context& ctx, const std::string& name) {
  if (name == "ood") {
    if (!ctx.config.ood_queries) throw ContractError("config has no ood_queries");
    return ids_of(ood_queries(ctx.config));
  }
  if (!std::filesystem::exists(ctx.paths.split())) {
    throw IncompleteError("missing " + ctx.paths.split().string() + " (run split first)");
  }
  return split_part(read_split(ctx.paths.split()), name);
}

ScoreTable target_table(const Context& ctx, const std::string& name) {
  const auto& path = name == "ood" ? ctx.paths.ood_scores() : ctx.paths.scores();
  return read_score_table(path).table.subset(target_ids(ctx, name));
}

int worst_code(const std::vector<CellFailure>& failures) {
  int code = 0;
  for (const auto& f : failures) code = std::max(code, f.exit_code);
  return code == 0 ? static_cast<int>(ExitCode::kContract) : code;
}

void print_failures(const std::vector<CellFailure>& failures) {
  for (const auto& f : failures) {
    std::cerr << "cell " << f.query_id << " / " << f.model << ": " << f.message << "\n";
  }
}

TableBuildOptions table_options(const Context& ctx, const sampling::ChatEndpoint* endpoint,
                                TimingLog* timing) {
  TableBuildOptions opts;
  opts.endpoint = endpoint;
  opts.threads = ctx.threads;
  opts.timing = timing;
  opts.collect.noun = ctx.config.item_noun;
  if (ctx.config.endpoint) opts.collect.max_inflight = ctx.config.endpoint->max_inflight;
  return opts;
}

std::optional<sampling::OpenAIChatEndpoint> make_endpoint(const ExperimentConfig& config) {
  if (!config.endpoint) return std::nullopt;
  return sampling::OpenAIChatEndpoint(config.endpoint->http);
}

// Counts cells with no stored answers.
int count_missing(const std::vector<Query>& queries, const ModelPool& pool,
                  const AnswerStore& store) {
  int missing = 0;
  for (const Query& q : queries) {
    for (const ModelId& m : pool) missing += store.has(q.id, m.pool_index) ? 0 : 1;
  }
  return missing;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g) {
  Context ctx = open_context(Globals{g.config, g.run_dir, g.seed, true});
  int bad = 0;
  auto check = [&](const std::filesystem::path& file) {
    const auto queries = load_queries(file);
    const ValidationReport report = validate_dataset(queries);
    for (const auto& v : report.violations) {
      std::cout << file.string() << ": " << v.query_id << ": " << v.message << "\n";
    }
    bad += static_cast<int>(report.violations.size());
    std::cout << file.string() << ": " << queries.size() << " queries, "
              << report.violations.size() << " violations\n";
  };
  check(ctx.config.queries);
  if (ctx.config.ood_queries) check(*ctx.config.ood_queries);
  std::cout << "config " << ctx.config.hash << "\n";
  return bad == 0 ? 0 : static_cast<int>(ExitCode::kContract);
}

int cmd_sample(const Globals& g) {
  Context ctx = open_context(g);
  std::vector<Query> queries = load_queries(ctx.config.queries);
  const auto ood = ood_queries(ctx.config);
  queries.insert(queries.end(), ood.begin(), ood.end());
  if (g.dry_run) {
    const auto file = ctx.paths.dir / "answers" / ctx.config.sampling_hash / "answers.ndjson";
    int missing = static_cast<int>(queries.size() * ctx.config.pool.size());
    if (std::filesystem::exists(file)) {
      AnswerStore store(ctx.paths.dir, ctx.config.sampling_hash, ctx.config.pool);
      missing = count_missing(queries, ctx.config.pool, store);
    }
    std::cout << "would sample " << missing << " answer sets of " << ctx.config.budget
              << " into " << file.string() << "\n";
    return 0;
  }
  auto endpoint = make_endpoint(ctx.config);
  if (!endpoint) throw ContractError("sample needs an endpoint in the config");
  AnswerStore store(ctx.paths.dir, ctx.config.sampling_hash, ctx.config.pool);
  TimingLog timing(ctx.paths.timing_log());
  const TableBuildResult r =
      sample_missing(queries, ctx.config.pool, ctx.config.prompt_kind, ctx.config.decoding, store,
                     table_options(ctx, &*endpoint, &timing));
  std::cout << "sampled " << r.sampled << " answer sets, " << r.failures.size() << " failed\n";
  print_failures(r.failures);
  return r.failures.empty() ? 0 : worst_code(r.failures);
}

int cmd_table(const Globals& g) {
  Context ctx = open_context(g);
  const metrics::MetricSuite suite = make_metric_suite(ctx.config);
  auto endpoint = g.dry_run ? std::nullopt : make_endpoint(ctx.config);
  std::optional<AnswerStore> store;
  if (!g.dry_run) store.emplace(ctx.paths.dir, ctx.config.sampling_hash, ctx.config.pool);
  std::optional<TimingLog> timing;
  if (!g.dry_run) timing.emplace(ctx.paths.timing_log());

  std::vector<std::pair<std::vector<Query>, std::filesystem::path>> jobs;
  jobs.emplace_back(load_queries(ctx.config.queries), ctx.paths.scores());
  if (ctx.config.ood_queries) jobs.emplace_back(ood_queries(ctx.config), ctx.paths.ood_scores());

  std::vector<CellFailure> failures;
  for (auto& [queries, path] : jobs) {
    if (g.dry_run) {
      std::cout << "would fill " << queries.size() * ctx.config.pool.size() << " cells into "
                << path.string() << "\n";
      continue;
    }
    std::vector<ScoreRow> previous;
    if (std::filesystem::exists(path)) previous = read_score_table(path, false).rows;
    TableBuildOptions opts = table_options(ctx, endpoint ? &*endpoint : nullptr, &*timing);
    opts.previous = &previous;
    const TableBuildResult r = build_score_table(queries, ctx.config.pool, ctx.config.prompt_kind,
                                                 ctx.config.decoding, *store, suite, opts);
    write_score_table(path, r.table, r.rows);
    std::cout << path.string() << ": " << r.rows.size() << " rows (" << r.sampled << " sampled, "
              << r.scored << " scored, " << r.reused << " reused, " << r.failures.size()
              << " failed)\n";
    failures.insert(failures.end(), r.failures.begin(), r.failures.end());
  }
  print_failures(failures);
  return failures.empty() ? 0 : worst_code(failures);
}

int cmd_split(const Globals& g) {
  Context ctx = open_context(g);
  const auto queries = load_queries(ctx.config.queries);
  Split split;
  if (g.dry_run) {
    split = std::filesystem::exists(ctx.paths.split())
                ? read_split(ctx.paths.split())
                : split_dataset(ids_of(queries), ctx.config.split_fractions, ctx.config.split_seed);
  } else {
    split = load_or_make_split(ctx.config, ctx.paths, queries);
  }
  std::cout << "train " << split.train.size() << ", val " << split.val.size() << ", test "
            << split.test.size() << "\n";
  return 0;
}

int cmd_labels(const Globals& g, const std::string& mode) {
  Context ctx = open_context(g);
  const ScoreTable train = target_table(ctx, "train");
  const auto labels = router::build_labels(train, router::label_mode_from_token(mode));
  if (!g.dry_run) write_ndjson(ctx.paths.labels(), labels);
  std::vector<int> counts(ctx.config.pool.size(), 0);
  for (const auto& l : labels) ++counts[l.oracle_index];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::cout << ctx.config.pool[i].name << " " << counts[i] << "\n";
  }
  return 0;
}

std::vector<router::RouterKind> kinds_from(const Context& ctx, const std::string& kind) {
  if (kind.empty()) return ctx.config.router.kinds;
  return {router::router_kind_from_token(kind)};
}

int cmd_train_router(const Globals& g, const std::string& kind) {
  Context ctx = open_context(g);
  const auto kinds = kinds_from(ctx, kind);
  const Split split = read_split(ctx.paths.split());
  const ScoreFile scores = read_score_table(ctx.paths.scores());
  const ScoreTable train = scores.table.subset(split.train);
  const ScoreTable val = scores.table.subset(split.val);
  std::vector<Query> queries = load_queries(ctx.config.queries);
  const auto ood = ood_queries(ctx.config);
  queries.insert(queries.end(), ood.begin(), ood.end());
  const router::FeatureBank bank = load_features(ctx.config, ctx.paths, queries, !g.dry_run);
  for (router::RouterKind k : kinds) {
    ctx.config.router.grid.validate(k);
    if (g.dry_run) {
      std::cout << "would train " << to_token(k) << " on " << train.query_ids().size()
                << " queries\n";
      continue;
    }
    const router::GridResult r = router::grid_search(
        train, val, bank, router_train_spec(ctx.config, k), ctx.config.router.grid,
        ctx.config.router.train);
    router::save_router(ctx.paths.router(k), r.best);
    const auto& best = r.report[r.best_index];
    std::printf("%s: grid point %zu of %zu, val cov %.4f -> %s\n",
                std::string(to_token(k)).c_str(), r.best_index, r.report.size(),
                best.val_div_cov.value_or(0.0), ctx.paths.router(k).string().c_str());
  }
  return 0;
}

int cmd_route(const Globals& g, const std::string& kind, const std::string& target,
              std::optional<int> top_k) {
  Context ctx = open_context(g);
  const auto kinds = kinds_from(ctx, kind);
  if (kinds.size() != 1) throw ContractError("route needs --kind");
  const router::Router r = router::load_router(ctx.paths.router(kinds[0]));
  const auto ids = target_ids(ctx, target);
  std::vector<Query> queries = load_queries(target == "ood" ? *ctx.config.ood_queries
                                                            : ctx.config.queries);
  const router::FeatureBank bank = load_features(ctx.config, ctx.paths, queries, false);
  const int k = top_k.value_or(ctx.config.router.top_k);
  EnsemblePlan plan;
  plan.budget = ctx.config.budget;
  std::string timing_lines;
  for (const std::string& q : ids) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<int> models = r.route(q, bank, k);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    timing_lines += Json{{"phase", "route"}, {"query_id", q}, {"model", ""}, {"ms", ms}}.dump() +
                    "\n";
    const std::vector<double> ratios(models.size(), 1.0 / static_cast<double>(models.size()));
    plan.rows.push_back(ensemble::make_row(q, ctx.config.pool, models, ratios, plan.budget));
  }
  const std::string name = "router:" + std::string(to_token(kinds[0]));
  if (!g.dry_run) {
    write_plan(ctx.paths.plan(name), plan);
    write_text_atomic(ctx.paths.route_timing(), timing_lines);
  }
  std::cout << "routed " << plan.rows.size() << " queries -> " << ctx.paths.plan(name).string()
            << "\n";
  return 0;
}

int cmd_ensemble(const Globals& g, std::string strategy, const std::string& target) {
  Context ctx = open_context(g);
  const ExperimentConfig& c = ctx.config;
  if (strategy.empty()) strategy = std::string(ensemble::to_token(c.ensemble.kind));
  const ensemble::StrategyKind kind = ensemble::strategy_kind_from_token(strategy);
  const auto ids = target_ids(ctx, target);
  const ScoreTable eval = target_table(ctx, target);
  auto train = [&] { return target_table(ctx, "train"); };
  const ModelPool& pool = c.pool;
  EnsemblePlan plan;
  switch (kind) {
    case ensemble::StrategyKind::kTopOverall:
      plan = ensemble::top_k_plan(ids, pool, ensemble::fit_top_overall(train()), 1, c.budget);
      break;
    case ensemble::StrategyKind::kTopKOverall:
      plan = ensemble::top_k_plan(ids, pool, ensemble::fit_top_overall(train()), c.ensemble.k,
                                  c.budget);
      break;
    case ensemble::StrategyKind::kRandomPerQuery: {
      Rng rng(c.ensemble.seed);
      plan = ensemble::random_plan(ids, pool, c.budget, rng);
      break;
    }
    case ensemble::StrategyKind::kFrequency: {
      Rng rng(c.ensemble.seed);
      plan = ensemble::frequency_plan(ids, pool, ensemble::fit_frequency(train()), c.budget, rng);
      break;
    }
    case ensemble::StrategyKind::kOraclePerQuery:
      plan = ensemble::oracle_per_query(eval);
      break;
    case ensemble::StrategyKind::kOracleTopTwoPerQuery: {
      AnswerStore store(ctx.paths.dir, c.sampling_hash, pool);
      std::vector<Query> queries = load_queries(target == "ood" ? *c.ood_queries : c.queries);
      const auto qmap = index_queries(queries);
      const metrics::MetricSuite suite = make_metric_suite(c);
      plan = ensemble::oracle_top_two_per_query(
          ids, pool, c.budget, ensemble::merged_div_cov_scorer(store, qmap, suite));
      break;
    }
    case ensemble::StrategyKind::kFixedModels: {
      std::vector<int> models;
      for (const auto& name : c.ensemble.models) models.push_back(pool_index_of(pool, name));
      plan = ensemble::fixed_plan(ids, pool, models, c.ensemble.ratios, c.budget);
      break;
    }
    case ensemble::StrategyKind::kRouterPlan:
      throw ContractError("use the route subcommand for router plans");
  }
  if (!g.dry_run) write_plan(ctx.paths.plan(strategy), plan);
  std::cout << strategy << ": " << plan.rows.size() << " rows -> "
            << ctx.paths.plan(strategy).string() << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& plan_arg, const std::string& target) {
  Context ctx = open_context(g);
  std::filesystem::path plan_path = plan_arg;
  if (!std::filesystem::exists(plan_path)) plan_path = ctx.paths.plan(plan_arg);
  const EnsemblePlan plan = read_plan(plan_path);
  const ScoreTable table = read_score_table(target == "ood" ? ctx.paths.ood_scores()
                                                           : ctx.paths.scores())
                               .table;
  std::vector<Query> queries = load_queries(target == "ood" ? *ctx.config.ood_queries
                                                            : ctx.config.queries);
  const auto qmap = index_queries(queries);
  const metrics::MetricSuite suite = make_metric_suite(ctx.config);
  AnswerStore store(ctx.paths.dir, ctx.config.sampling_hash, ctx.config.pool);
  ensemble::EvaluateOptions opts;
  opts.table = &table;
  opts.threads = ctx.threads;
  const ensemble::PlanEvaluation e = ensemble::evaluate_plan(plan, store, qmap, suite, opts);
  const Json out = {{"plan", plan_path.filename().string()},
                    {"queries", e.query_ids.size()},
                    {"n_unique", e.mean.n_unique},
                    {"qual", e.mean.qual},
                    {"unq_qual", e.mean.unq_qual},
                    {"cov", e.mean.div_cov}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_significance(const std::vector<double>& scores, double baseline, double alpha,
                     const std::string& test) {
  const SignificanceResult r =
      significance_test(scores, baseline, alpha, significance_test_from_token(test));
  const Json out = {{"mean", mean(scores)},
                    {"baseline", baseline},
                    {"statistic", std::isfinite(r.statistic) ? Json(r.statistic)
                                                             : Json(r.statistic > 0 ? "inf" : "-inf")},
                    {"p_value", r.p_value},
                    {"verdict", to_token(r.verdict)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_scaling(const Globals& g, const std::string& kind, std::vector<int> sizes) {
  Context ctx = open_context(g);
  const auto kinds = kinds_from(ctx, kind);
  if (sizes.empty()) sizes = ctx.config.scaling_sizes;
  if (sizes.empty()) throw ContractError("no scaling sizes in config or flags");
  const Split split = read_split(ctx.paths.split());
  const ScoreFile scores = read_score_table(ctx.paths.scores());
  std::vector<Query> queries = load_queries(ctx.config.queries);
  const router::FeatureBank bank = load_features(ctx.config, ctx.paths, queries, false);
  for (router::RouterKind k : kinds) {
    if (g.dry_run) {
      std::cout << "would train " << to_token(k) << " at " << sizes.size() << " sizes\n";
      continue;
    }
    const auto points = scaling_study(scores.table.subset(split.train),
                                      scores.table.subset(split.val),
                                      scores.table.subset(split.test), bank,
                                      router_train_spec(ctx.config, k), ctx.config.router.grid,
                                      ctx.config.router.train, sizes, ctx.config.split_seed);
    const auto file = ctx.paths.dir / ("scaling." + std::string(to_token(k)) + ".csv");
    write_text_atomic(file, scaling_csv(points));
    std::cout << scaling_csv(points);
  }
  return 0;
}

int cmd_timing(const Globals& g) {
  Context ctx = open_context(g);
  std::vector<TimingEntry> entries;
  for (const auto& file : {ctx.paths.timing_log(), ctx.paths.route_timing()}) {
    if (!std::filesystem::exists(file)) continue;
    const auto part = read_timing(file);
    entries.insert(entries.end(), part.begin(), part.end());
  }
  if (entries.empty()) throw IncompleteError("no timing entries in " + ctx.paths.dir.string());
  std::map<std::string, EnsemblePlan> plans;
  for (const auto& e : std::filesystem::directory_iterator(ctx.paths.dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("plan.", 0) != 0 || e.path().extension() != ".ndjson") continue;
    plans[name.substr(5, name.size() - 5 - 7)] = read_plan(e.path());
  }
  const std::string json = timing_json(timing_report(entries, ctx.config.pool, plans));
  if (!g.dry_run) write_text_atomic(ctx.paths.dir / "timing.json", json);
  std::cout << json;
  return 0;
}

int cmd_report(const Globals& g) {
  Context ctx = open_context(g);
  if (g.dry_run) {
    read_score_table(ctx.paths.scores());
    std::cout << "would evaluate " << ctx.config.experiment.methods.size() << " methods over "
              << ctx.config.experiment.seeds << " seeds\n";
    return 0;
  }
  const ExperimentReport report = run_experiment(ctx.config, ctx.paths);
  write_report(ctx.paths, report);
  AnswerStore store(ctx.paths.dir, ctx.config.sampling_hash, ctx.config.pool);
  if (store.size() > 0) {
    std::vector<Query> queries = load_queries(ctx.config.queries);
    write_text_atomic(ctx.paths.dir / "position_profile.csv",
                      position_profile_csv(queries, ctx.config.pool, store,
                                           make_metric_suite(ctx.config)));
  }
  std::cout << report_text(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity-coverage routing and ensembling experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--run-dir", g.run_dir, "Run directory for artifacts")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override every seed in the config");
  app.add_flag("--dry-run", g.dry_run, "Check inputs and print the plan; no calls, no writes");

  auto* validate = app.add_subcommand("validate", "Check the config and query files");
  auto* sample = app.add_subcommand("sample", "Sample missing answer sets from the endpoint");
  auto* table = app.add_subcommand("table", "Build score tables (scores.ndjson)");
  auto* split = app.add_subcommand("split", "Create or show the train/val/test split");

  std::string label_mode = "one_hot";
  auto* labels = app.add_subcommand("labels", "Write routing labels for the training split");
  labels->add_option("--mode", label_mode, "one_hot or soft")->capture_default_str();

  std::string kind;
  auto* train = app.add_subcommand("train-router", "Grid-search and save routers");
  train->add_option("--kind", kind, "knn, mway or binary (default: all configured)");

  std::string target = "test";
  std::optional<int> top_k;
  auto* route = app.add_subcommand("route", "Route queries with a saved router");
  route->add_option("--kind", kind, "knn, mway or binary")->required();
  route->add_option("--split", target, "train, val, test or ood")->capture_default_str();
  route->add_option("--top-k", top_k, "Models per query (1 or 2)");

  std::string strategy;
  auto* ens = app.add_subcommand("ensemble", "Build a baseline ensemble plan");
  ens->add_option("--strategy", strategy, "Strategy (default: config ensemble.kind)");
  ens->add_option("--split", target, "train, val, test or ood")->capture_default_str();

  std::string plan;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a plan file or named plan");
  evaluate->add_option("--plan", plan, "Plan path or name (e.g. top_overall)")->required();
  evaluate->add_option("--split", target, "test or ood")->capture_default_str();

  std::vector<double> scores;
  double baseline = 0.0;
  double alpha = 0.05;
  std::string test = "t";
  auto* sig = app.add_subcommand("significance", "Test seed scores against a baseline");
  sig->add_option("--scores", scores, "Per-seed scores")->required()->expected(2, 1000);
  sig->add_option("--baseline", baseline, "Baseline score")->required();
  sig->add_option("--alpha", alpha)->capture_default_str();
  sig->add_option("--test", test, "t or permutation")->capture_default_str();

  std::vector<int> sizes;
  auto* scaling = app.add_subcommand("scaling", "Router training-size study");
  scaling->add_option("--kind", kind, "knn, mway or binary (default: all configured)");
  scaling->add_option("--sizes", sizes, "Training sizes (default: config scaling.sizes)");

  auto* timing = app.add_subcommand("timing", "Summarize per-phase timing");
  auto* report = app.add_subcommand("report", "Run the full experiment and write reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kContract);
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*validate) return cmd_validate(g);
    if (*sample) return cmd_sample(g);
    if (*table) return cmd_table(g);
    if (*split) return cmd_split(g);
    if (*labels) return cmd_labels(g, label_mode);
    if (*train) return cmd_train_router(g, kind);
    if (*route) return cmd_route(g, kind, target, top_k);
    if (*ens) return cmd_ensemble(g, strategy, target);
    if (*evaluate) return cmd_evaluate(g, plan, target);
    if (*sig) return cmd_significance(scores, baseline, alpha, test);
    if (*scaling) return cmd_scaling(g, kind, sizes);
    if (*timing) return cmd_timing(g);
    if (*report) return cmd_report(g);
  } catch (const divcov::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kContract);
  }
  return static_cast<int>(ExitCode::kContract);
}
