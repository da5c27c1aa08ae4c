#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "divcov/core/error.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/harness/config.hpp"
#include "divcov/harness/experiment.hpp"
#include "divcov/harness/split.hpp"
#include "divcov/harness/stats.hpp"
#include "divcov/harness/store.hpp"
#include "divcov/harness/table.hpp"
#include "divcov/harness/timing.hpp"
#include "divcov/router/labels.hpp"
#include "mocks.hpp"
#include "pipeline.hpp"

namespace divcov::harness {
namespace {

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
  return out;
}

TEST(Split, SizesAndDisjointness) {
  const std::vector<double> f{0.7, 0.1, 0.2};
  const Split s10 = split_dataset(ids(10), f, 1);
  EXPECT_EQ(s10.train.size(), 7u);
  EXPECT_EQ(s10.val.size(), 1u);
  EXPECT_EQ(s10.test.size(), 2u);
  const Split s = split_dataset(ids(1000), f, 1);
  EXPECT_EQ(s.train.size(), 700u);
  EXPECT_EQ(s.val.size(), 100u);
  EXPECT_EQ(s.test.size(), 200u);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 1000u);
  EXPECT_EQ(split_dataset(ids(1000), f, 1), s);
  EXPECT_NE(split_dataset(ids(1000), f, 2), s);
  EXPECT_THROW(split_dataset(ids(2), f, 1), ContractError);
  EXPECT_THROW(split_dataset(ids(10), {0.5, 0.1, 0.2}, 1), ContractError);
}

TEST(Split, FileRoundTrip) {
  testing::TempDir dir;
  const Split s = split_dataset(ids(30), {0.7, 0.1, 0.2}, 5);
  write_split(dir.path() / "split.json", s);
  EXPECT_EQ(read_split(dir.path() / "split.json"), s);
}

TEST(Stats, StudentT) {
  const std::vector<double> seeds{26.1, 26.2, 26.3, 26.4, 26.5};
  const auto r = significance_test(seeds, 23.8);
  EXPECT_EQ(r.verdict, Verdict::kSignificant);
  EXPECT_LT(r.p_value, 1e-5);
  EXPECT_NEAR(r.statistic, (26.3 - 23.8) / (sample_stddev(seeds) / std::sqrt(5.0)), 1e-9);
  const auto below = significance_test(seeds, 28.0);
  EXPECT_EQ(below.verdict, Verdict::kNotSignificant);
  const std::vector<double> flat{23.8, 23.8, 23.8};
  EXPECT_EQ(significance_test(flat, 23.8).verdict, Verdict::kNotSignificant);
  EXPECT_EQ(significance_test(flat, 23.8).p_value, 1.0);
  const std::vector<double> one{24.0};
  EXPECT_THROW(significance_test(one, 23.8), ContractError);
}

TEST(Stats, KnownPValue) {
  // t = 2 with 3 degrees of freedom: two-sided p = 0.1393...
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const double sd = sample_stddev(xs);
  const double base = 2.5 - 2.0 * sd / 2.0;
  const auto r = significance_test(xs, base);
  EXPECT_NEAR(r.statistic, 2.0, 1e-12);
  EXPECT_NEAR(r.p_value, 0.139326, 1e-5);
  EXPECT_EQ(r.verdict, Verdict::kNotSignificant);
}

TEST(Stats, Permutation) {
  const std::vector<double> seeds{26.1, 26.2, 26.3, 26.4, 26.5};
  const auto r = significance_test(seeds, 23.8, 0.05, SignificanceTest::kPermutation);
  EXPECT_DOUBLE_EQ(r.p_value, 2.0 / 32.0);
  EXPECT_EQ(r.verdict, Verdict::kNotSignificant);
  std::vector<double> many(8);
  for (int i = 0; i < 8; ++i) many[i] = 30.0 + i;
  EXPECT_EQ(significance_test(many, 23.8, 0.05, SignificanceTest::kPermutation).verdict,
            Verdict::kSignificant);
}

TEST(Stats, Percentile) {
  EXPECT_EQ(percentile({5, 1, 3, 2, 4}, 0.95), 5);
  EXPECT_EQ(percentile({5, 1, 3, 2, 4}, 0.2), 1);
  EXPECT_EQ(percentile({5, 1, 3, 2, 4}, 0.5), 3);
}

TEST(Config, ParsesAndRejects) {
  testing::SyntheticOptions o;
  Json doc = testing::synthetic_config(o);
  const ExperimentConfig c = parse_config(doc, "/tmp/cfg");
  EXPECT_EQ(c.queries, std::filesystem::path("/tmp/cfg/queries.ndjson"));
  EXPECT_EQ(c.pool.size(), 4u);
  EXPECT_EQ(c.budget, 20);
  EXPECT_EQ(c.decoding.target_n, 20);
  EXPECT_EQ(c.hash.size(), 64u);
  EXPECT_EQ(parse_config(doc, "/tmp/other").hash, c.hash);

  Json extra = doc;
  extra["bogus"] = 1;
  EXPECT_THROW(parse_config(extra, "/tmp"), ParseError);
  Json nested = doc;
  nested["router"]["train"]["lr"] = 0.1;
  EXPECT_THROW(parse_config(nested, "/tmp"), ParseError);
  Json bad_budget = doc;
  bad_budget["budget"] = 0;
  EXPECT_THROW(parse_config(bad_budget, "/tmp"), Error);
  Json bad_pool = doc;
  bad_pool["pool"] = Json::array({"a", "a"});
  EXPECT_THROW(parse_config(bad_pool, "/tmp"), Error);
}

TEST(Config, SamplingHashIgnoresTraining) {
  Json doc = testing::synthetic_config({});
  Json changed = doc;
  changed["router"]["train"]["epochs"] = 3;
  EXPECT_EQ(parse_config(doc, "/tmp").sampling_hash, parse_config(changed, "/tmp").sampling_hash);
  EXPECT_NE(parse_config(doc, "/tmp").hash, parse_config(changed, "/tmp").hash);
  changed["decoding"]["temperature"] = 0.5;
  EXPECT_NE(parse_config(doc, "/tmp").sampling_hash, parse_config(changed, "/tmp").sampling_hash);
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ContractError);
}

const std::vector<std::string> kDays = {"Monday", "Tuesday", "Wednesday", "Thursday",
                                        "Friday", "Saturday", "Sunday"};

std::string chat_script(const sampling::ChatRequest& r, int) {
  if (r.model == "full") {
    return "{Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday, Monday, Tuesday, "
           "Friday}";
  }
  return "{Monday, Friday, Sunday, Monday, Monday, Monday, Monday, Monday, Monday, Monday}";
}

TEST(Table, BuildsAndReuses) {
  testing::TempDir dir;
  const std::vector<Query> queries{
      Query{"d1", "Output all days of the week.", AnswerSpace::kFixedSet, kDays, "days"},
      Query{"d2", "Name all days of the week.", AnswerSpace::kFixedSet, kDays, "days"}};
  const ModelPool pool = make_pool({"full", "three"});
  DecodingConfig dec;
  dec.target_n = 10;
  const ExperimentConfig cfg = parse_config(testing::synthetic_config({}), dir.path());
  const metrics::MetricSuite suite = make_metric_suite(cfg);
  testing::ScriptedChat chat(chat_script);
  TableBuildOptions opts;
  opts.endpoint = &chat;
  AnswerStore store(dir.path(), "h", pool);
  const TableBuildResult r =
      build_score_table(queries, pool, PromptKind::kGAll, dec, store, suite, opts);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.sampled, 4);
  EXPECT_DOUBLE_EQ(r.table.at("d1", 0).div_cov, 1.0);
  EXPECT_DOUBLE_EQ(r.table.at("d1", 1).div_cov, 3.0 / 7.0);
  EXPECT_EQ(r.table.at("d2", 1).n_unique, 3);
  const int calls = chat.calls();

  AnswerStore reopened(dir.path(), "h", pool);
  EXPECT_EQ(reopened.size(), 4u);
  opts.previous = &r.rows;
  const TableBuildResult again =
      build_score_table(queries, pool, PromptKind::kGAll, dec, reopened, suite, opts);
  EXPECT_EQ(chat.calls(), calls);
  EXPECT_EQ(again.reused, 4);
  EXPECT_EQ(again.table, r.table);
}

TEST(Table, FailuresAreReported) {
  testing::TempDir dir;
  const std::vector<Query> queries{
      Query{"d1", "Output all days of the week.", AnswerSpace::kFixedSet, kDays, "days"}};
  const ModelPool pool = make_pool({"full", "broken"});
  DecodingConfig dec;
  dec.target_n = 10;
  const metrics::MetricSuite suite =
      make_metric_suite(parse_config(testing::synthetic_config({}), dir.path()));
  testing::ScriptedChat chat([](const sampling::ChatRequest& r, int call) -> std::string {
    if (r.model == "broken") throw TransportError("connection refused");
    return chat_script(r, call);
  });
  TableBuildOptions opts;
  opts.endpoint = &chat;
  AnswerStore store(dir.path(), "h", pool);
  const TableBuildResult r =
      build_score_table(queries, pool, PromptKind::kGAll, dec, store, suite, opts);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].model, "broken");
  EXPECT_EQ(r.failures[0].exit_code, 3);
  EXPECT_FALSE(r.table.complete());
}

TEST(Store, TornLineIgnored) {
  testing::TempDir dir;
  const ModelPool pool = make_pool({"a"});
  {
    AnswerStore store(dir.path(), "h", pool);
    store.put(make_answer_set("q", pool[0], PromptKind::kGAll, {"x", "y"}));
  }
  AnswerStore probe(dir.path(), "h", pool);
  {
    std::ofstream out(probe.file(), std::ios::app);
    out << "{\"query_id\":\"q2\",\"mod";
  }
  AnswerStore store(dir.path(), "h", pool);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.get("q", 0).texts(), (std::vector<std::string>{"x", "y"}));
  EXPECT_THROW(store.get("q2", 0), IncompleteError);
}

TEST(Timing, MethodCosts) {
  const ModelPool pool = make_pool({"a", "b"});
  const std::vector<TimingEntry> entries{
      {"sample", "q1", "a", 100}, {"sample", "q1", "b", 300}, {"score", "q1", "a", 10},
      {"sample", "q2", "a", 200}, {"sample", "q2", "b", 200}, {"route", "q1", "", 5}};
  EnsemblePlan plan;
  plan.budget = 10;
  plan.rows = {PlanRow{"q1", {Allocation{pool[0], 10}}}, PlanRow{"q2", {Allocation{pool[1], 10}}}};
  const TimingReport r = timing_report(entries, pool, {{"router", plan}});
  std::map<std::string, double> phase, method;
  for (const auto& p : r.phases) phase[p.phase] = p.mean_s;
  for (const auto& m : r.methods) method[m.method] = m.mean_s;
  EXPECT_DOUBLE_EQ(phase["sample"], 0.4);
  EXPECT_DOUBLE_EQ(method["oracle"], 0.405);
  EXPECT_DOUBLE_EQ(method["router"], 0.1575);
  EXPECT_NE(timing_json(r).find("\"router\""), std::string::npos);
}

TEST(Timing, LogRoundTrip) {
  testing::TempDir dir;
  TimingLog log(dir.path() / "timing.ndjson");
  log.record({"sample", "q", "a", 12.5});
  log.record({"score", "q", "a", 1.0});
  const auto back = read_timing(dir.path() / "timing.ndjson");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].phase, "sample");
  EXPECT_EQ(back[0].ms, 12.5);
}

testing::SyntheticOptions small_run() {
  testing::SyntheticOptions o;
  o.world.n_queries = 60;
  o.seeds = 2;
  o.methods = {"top_overall", "top_two", "oracle", "router:knn"};
  return o;
}

TEST(Experiment, BaselineRowMatchesColumnMean) {
  testing::TempDir dir;
  const auto run = testing::run_synthetic_pipeline(dir.path(), small_run());
  const ScoreFile scores = read_score_table(run.paths.scores());
  const Split split = read_split(run.paths.split());
  const ScoreTable train = scores.table.subset(split.train);
  const ScoreTable test = scores.table.subset(split.test);
  const int best = ensemble::fit_top_overall(train)[0];
  EXPECT_DOUBLE_EQ(testing::mean_cov(run.report, "top_overall", "test"),
                   ensemble::column_means(test)[best]);
  EXPECT_GE(testing::mean_cov(run.report, "oracle", "test"),
            testing::mean_cov(run.report, "router:knn", "test") - 1e-12);
  EXPECT_EQ(testing::run_scores(run.report, "router:knn", "test").size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(run.paths.router(router::RouterKind::kKnn)));
  EXPECT_TRUE(std::filesystem::exists(run.paths.router_seed(router::RouterKind::kKnn, 1)));

  // Same inputs, same report bytes.
  const ExperimentReport again = run_experiment(run.config, run.paths);
  EXPECT_EQ(report_json(again), report_json(run.report));
  EXPECT_EQ(report_csv(again), report_csv(run.report));
}

TEST(Experiment, MissingArtifactsAreIncomplete) {
  testing::TempDir dir;
  const auto run = testing::run_synthetic_pipeline(dir.path(), small_run());
  const auto features = run.paths.features(run.config.router.encoder.kind == "agnostic"
                                               ? router::agnostic_encoder_id("mock-embed")
                                               : "");
  ASSERT_TRUE(std::filesystem::exists(features));
  std::filesystem::remove(features);
  EXPECT_THROW(run_experiment(run.config, run.paths), IncompleteError);
  std::filesystem::remove(run.paths.scores());
  EXPECT_THROW(run_experiment(run.config, run.paths), IncompleteError);
}

TEST(Experiment, UnknownMethodIsContractError) {
  testing::TempDir dir;
  auto o = small_run();
  o.methods = {"top_overall", "router:knn"};
  auto run = testing::run_synthetic_pipeline(dir.path(), o);
  run.config.experiment.methods.push_back("bogus");
  EXPECT_THROW(run_experiment(run.config, run.paths), ContractError);
  run.config.experiment.methods = {"top_overall", "router:nope"};
  EXPECT_THROW(run_experiment(run.config, run.paths), ContractError);
}

TEST(Scaling, NestedPrefixes) {
  testing::TempDir dir;
  auto o = small_run();
  o.methods = {"top_overall"};
  const auto run = testing::run_synthetic_pipeline(dir.path(), o);
  const ScoreFile scores = read_score_table(run.paths.scores());
  const Split split = read_split(run.paths.split());
  const auto bank = load_features(run.config, run.paths, load_queries(run.config.queries), false);
  router::RouterTrainSpec spec = router_train_spec(run.config, router::RouterKind::kKnn);
  router::GridSpec grid;
  grid.knn_ks = {1};
  const auto points =
      scaling_study(scores.table.subset(split.train), scores.table.subset(split.val),
                    scores.table.subset(split.test), bank, spec, grid, run.config.router.train,
                    {5, 10, 20}, 3);
  ASSERT_EQ(points.size(), 3u);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& prev = points[i - 1].train_ids;
    const auto& cur = points[i].train_ids;
    ASSERT_EQ(cur.size(), static_cast<std::size_t>(points[i].size));
    EXPECT_TRUE(std::equal(prev.begin(), prev.end(), cur.begin()));
  }
  EXPECT_NE(scaling_csv(points).find("size"), std::string::npos);
  EXPECT_THROW(scaling_study(scores.table.subset(split.train), scores.table.subset(split.val),
                             scores.table.subset(split.test), bank, spec, grid,
                             run.config.router.train, {1000}, 3),
               ContractError);
}

}  // namespace
}  // namespace divcov::harness
