#include "pipeline.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "divcov/harness/split.hpp"
#include "divcov/harness/store.hpp"
#include "divcov/harness/table.hpp"
#include "divcov/router/features.hpp"
#include "divcov/router/labels.hpp"

namespace divcov::testing {

Json synthetic_config(const SyntheticOptions& o) {
  Json c = {
      {"queries", "queries.ndjson"},
      {"pool", o.world.model_names()},
      {"prompt_kind", "gall"},
      {"budget", o.budget},
      {"decoding", {{"temperature", 1.0}, {"top_p", 1.0}, {"max_tokens", 512}, {"seed", o.seed}}},
      {"split", {{"fractions", {0.7, 0.1, 0.2}}, {"seed", o.seed + 4}}},
      {"router",
       {{"kinds", {"knn", "mway", "binary"}},
        {"encoder", {{"kind", "agnostic"}, {"model", "mock-embed"}}},
        {"grid",
         {{"label_modes", {"one_hot", "soft"}},
          {"weight_decays", {0.0}},
          {"hidden_dims", {16}},
          {"knn_ks", {1, 5}}}},
        {"train", {{"learning_rate", 0.01}, {"epochs", 120}, {"batch_size", 16}, {"seed", o.seed + 1}}},
        {"top_k", 1}}},
      {"ensemble", {{"seed", o.seed + 2}, {"draws", 5}}},
      {"experiment", {{"seeds", o.seeds}, {"methods", o.methods}, {"baseline", "top_overall"}}},
      {"scaling", {{"sizes", {10, 20, 40}}}},
      {"threads", o.threads}};
  if (!o.base_url.empty()) {
    c["endpoint"] = {{"base_url", o.base_url}, {"api_key_env", "DIVCOV_TEST_KEY"},
                     {"timeout_ms", 5000}, {"retries", 0}, {"max_inflight", 8}};
    c["router"]["encoder"]["endpoint"] = {{"base_url", o.base_url}, {"timeout_ms", 5000}};
  }
  return c;
}

std::filesystem::path write_synthetic_inputs(const std::filesystem::path& dir,
                                             const SyntheticOptions& options) {
  std::filesystem::create_directories(dir);
  write_ndjson(dir / "queries.ndjson", options.world.queries());
  const auto config = dir / "config.json";
  write_text_atomic(config, synthetic_config(options).dump(2) + "\n");
  return config;
}

PipelineRun run_synthetic_pipeline(const std::filesystem::path& dir,
                                   const SyntheticOptions& options) {
  using namespace harness;
  PipelineRun run;
  run.config = load_config(write_synthetic_inputs(dir, options));
  run.paths.dir = dir / "run";
  std::filesystem::create_directories(run.paths.dir);
  const ExperimentConfig& c = run.config;

  const std::vector<Query> queries = load_queries(c.queries);
  const Split split = load_or_make_split(c, run.paths, queries);

  AnswerStore store(run.paths.dir, c.sampling_hash, c.pool);
  const metrics::MetricSuite suite = make_metric_suite(c);
  WorldChat chat(options.world);
  TableBuildOptions opts;
  opts.endpoint = &chat;
  opts.threads = c.threads;
  opts.collect.max_inflight = 8;
  const TableBuildResult table =
      build_score_table(queries, c.pool, c.prompt_kind, c.decoding, store, suite, opts);
  if (!table.failures.empty()) {
    throw std::runtime_error("synthetic table failed: " + table.failures.front().message);
  }
  write_score_table(run.paths.scores(), table.table, table.rows);
  write_ndjson(run.paths.labels(),
               router::build_labels(table.table.subset(split.train), router::LabelMode::kOneHot));

  router::AgnosticEncoder encoder(std::make_shared<WorldEmbedder>(options.world));
  const router::FeatureSet features = encoder.encode_all(queries, c.threads);
  router::write_features(run.paths.features(features.encoder_id()), features);

  run.report = run_experiment(c, run.paths);
  write_report(run.paths, run.report);
  run.chat_calls = chat.calls();
  return run;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> run_scores(const harness::ExperimentReport& report, const std::string& method,
                               const std::string& split) {
  for (const auto& row : report.rows) {
    if (row.method != method || row.split != split) continue;
    if (row.significance) return row.significance->seed_scores;
    return {row.mean.div_cov};
  }
  throw std::runtime_error("no report row " + method + "/" + split);
}

double mean_cov(const harness::ExperimentReport& report, const std::string& method,
                const std::string& split) {
  for (const auto& row : report.rows) {
    if (row.method == method && row.split == split) return row.mean.div_cov;
  }
  throw std::runtime_error("no report row " + method + "/" + split);
}

}  // namespace divcov::testing
