// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/ensemble/merge.hpp"
#include "divcov/ensemble/strategies.hpp"
#include "divcov/equiv/extract.hpp"
#include "divcov/harness/stats.hpp"
#include "divcov/metrics/metrics.hpp"
#include "divcov/router/mlp.hpp"
#include "divcov/router/router.hpp"
#include "divcov/sampling/parse.hpp"
#include "mocks.hpp"
#include "pipeline.hpp"

namespace {

using namespace divcov;
using divcov::testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- 1: div_cov == coverage_rate on fixed-set instances --------------------

Outcome metric_identity() {
  Rng rng(101);
  metrics::FixedSetMatch quality;
  equiv::NormalizedMatch match;
  const char* decorations[] = {"", " ", ".", "  ", "!"};
  int checked = 0;
  for (int t = 0; t < 1500; ++t) {
    const int gold_n = 1 + static_cast<int>(uniform_index(rng, 10));
    Query q;
    q.id = "q" + std::to_string(t);
    q.text = "List them.";
    q.space = AnswerSpace::kFixedSet;
    std::vector<std::string> gold;
    for (int g = 0; g < gold_n; ++g) gold.push_back("Gold " + std::to_string(g));
    q.gold_answers = gold;
    const int budget = gold_n + static_cast<int>(uniform_index(rng, 61 - gold_n));
    std::vector<std::string> answers;
    for (int i = 0; i < budget; ++i) {
      std::string a;
      if (uniform01(rng) < 0.7) {
        a = gold[uniform_index(rng, gold_n)];
        if (uniform01(rng) < 0.5) std::transform(a.begin(), a.end(), a.begin(), ::toupper);
      } else {
        a = "other " + std::to_string(uniform_index(rng, 20));
      }
      answers.push_back(a + decorations[uniform_index(rng, 5)]);
    }
    const double dc = metrics::div_cov(q, answers, quality, match, equiv::kDefaultTau);
    const double cr = metrics::coverage_rate(q, answers);
    if (dc != cr) {
      return {false, "instance " + std::to_string(t) + ": div_cov " + std::to_string(dc) +
                         " vs coverage " + std::to_string(cr)};
    }
    ++checked;
  }
  return {true, std::to_string(checked) + " instances equal"};
}

// --- 2: extract_unique vs straight-line greedy ------------------------------

struct Greedy {
  std::vector<std::size_t> kept;
  std::vector<std::pair<std::size_t, std::size_t>> dropped;
};

Greedy straight_line(const std::vector<std::vector<double>>& sim, double tau) {
  Greedy g;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    bool drop = false;
    for (std::size_t k : g.kept) {
      if (sim[i][k] > tau) {
        g.dropped.push_back({i, k});
        drop = true;
        break;
      }
    }
    if (!drop) g.kept.push_back(i);
  }
  return g;
}

Outcome extraction_fidelity() {
  Rng rng(202);
  const double taus[] = {0.3, 0.5, 0.7};
  int checked = 0;
  for (int t = 0; t < 600; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 8);
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double v = uniform01(rng);
        if (uniform01(rng) < 0.2) v = taus[uniform_index(rng, 3)];
        sim[i][j] = sim[j][i] = v;
      }
    }
    const double tau = taus[t % 3];
    divcov::testing::MatrixEquivalence provider(sim);
    const auto labels = provider.labels();
    const equiv::UniqueSubset got = equiv::extract_unique(labels, provider, tau);
    const Greedy want = straight_line(sim, tau);
    bool same = got.kept == want.kept && got.dropped.size() == want.dropped.size();
    for (std::size_t i = 0; same && i < want.dropped.size(); ++i) {
      same = got.dropped[i].position == want.dropped[i].first &&
             got.dropped[i].matched == want.dropped[i].second;
    }
    if (!same) return {false, "matrix " + std::to_string(t) + " differs"};
    ++checked;
  }
  return {true, std::to_string(checked) + " matrices match"};
}

// --- 3: oracle dominance and exhaustive top-two -----------------------------

double plan_mean(const EnsemblePlan& plan, const ScoreTable& table) {
  double sum = 0.0;
  for (const PlanRow& row : plan.rows) sum += table.at(row.query_id, row.sources[0].model.pool_index).div_cov;
  return sum / static_cast<double>(plan.rows.size());
}

// Coverage of the first `count` answers of each source, computed directly.
double merged_coverage(const Query& q, const std::vector<std::pair<const AnswerSet*, int>>& parts) {
  std::set<std::string> hit;
  const std::set<std::string> gold(q.gold_answers->begin(), q.gold_answers->end());
  int total = 0;
  for (const auto& [set, count] : parts) {
    for (int i = 0; i < count; ++i) {
      ++total;
      if (gold.count(set->answers[i].text)) hit.insert(set->answers[i].text);
    }
  }
  return static_cast<double>(hit.size()) /
         static_cast<double>(std::min<std::size_t>(total, gold.size()));
}

Outcome oracle_dominance() {
  Rng rng(303);
  for (int t = 0; t < 300; ++t) {
    const int n_models = 2 + static_cast<int>(uniform_index(rng, 6));
    const int n_queries = 1 + static_cast<int>(uniform_index(rng, 40));
    std::vector<std::string> ids;
    for (int i = 0; i < n_queries; ++i) ids.push_back("q" + std::to_string(i));
    std::vector<std::string> names;
    for (int m = 0; m < n_models; ++m) names.push_back("m" + std::to_string(m));
    ScoreTable table(ids, make_pool(names), 10, PromptKind::kGAll);
    for (const auto& id : ids) {
      for (int m = 0; m < n_models; ++m) {
        MetricRecord r;
        r.div_cov = static_cast<double>(uniform_index(rng, 11)) / 10.0;
        table.set(id, m, r);
      }
    }
    const double oracle = plan_mean(ensemble::oracle_per_query(table), table);
    const auto ranked = ensemble::fit_top_overall(table);
    const double top = plan_mean(ensemble::top_k_plan(ids, table.pool(), ranked, 1, 10), table);
    const auto means = ensemble::column_means(table);
    const double lowest = *std::min_element(means.begin(), means.end());
    if (!(oracle >= top && top >= lowest)) {
      return {false, "table " + std::to_string(t) + " violates oracle >= top >= min"};
    }
  }

  // Top-two against exhaustive enumeration with stored answer sets.
  metrics::MetricSuite suite;
  suite.fixed_quality = std::make_shared<metrics::FixedSetMatch>();
  suite.fixed_equiv = std::make_shared<equiv::NormalizedMatch>();
  suite.tau = equiv::kDefaultTau;
  for (int t = 0; t < 60; ++t) {
    const int n_models = 1 + static_cast<int>(uniform_index(rng, 5));
    const int budget = 2 + static_cast<int>(uniform_index(rng, 15));
    std::vector<std::string> names;
    for (int m = 0; m < n_models; ++m) names.push_back("m" + std::to_string(m));
    const ModelPool pool = make_pool(names);
    ensemble::InMemoryAnswerBank bank;
    std::unordered_map<std::string, Query> qmap;
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) {
      Query q;
      q.id = "q" + std::to_string(i);
      q.text = "x";
      q.space = AnswerSpace::kFixedSet;
      std::vector<std::string> gold;
      for (int g = 0; g < 6; ++g) gold.push_back("g" + std::to_string(g));
      q.gold_answers = gold;
      qmap[q.id] = q;
      ids.push_back(q.id);
      for (const ModelId& m : pool) {
        std::vector<std::string> texts;
        const int span = 1 + static_cast<int>(uniform_index(rng, 8));
        for (int a = 0; a < budget; ++a) texts.push_back("g" + std::to_string(uniform_index(rng, span)));
        bank.put(make_answer_set(q.id, m, PromptKind::kGAll, texts));
      }
    }
    const EnsemblePlan plan = ensemble::oracle_top_two_per_query(
        ids, pool, budget, ensemble::merged_div_cov_scorer(bank, qmap, suite));
    for (const auto& id : ids) {
      const Query& q = qmap.at(id);
      double best = -1.0;
      for (int i = 0; i < n_models; ++i) {
        best = std::max(best, merged_coverage(q, {{&bank.get(id, i), budget}}));
        for (int j = i + 1; j < n_models; ++j) {
          best = std::max(best, merged_coverage(q, {{&bank.get(id, i), (budget + 1) / 2},
                                                    {&bank.get(id, j), budget / 2}}));
        }
      }
      std::vector<std::pair<const AnswerSet*, int>> parts;
      for (const Allocation& a : plan.row(id).sources) parts.push_back({&bank.get(id, a.model.pool_index), a.count});
      if (merged_coverage(q, parts) != best) {
        return {false, "top-two instance " + std::to_string(t) + " query " + id + " not optimal"};
      }
    }
  }
  return {true, "300 tables dominate; 60 top-two instances match enumeration"};
}

// --- 4: budget arithmetic ---------------------------------------------------

Outcome budget_arithmetic() {
  const std::vector<double> half{0.5, 0.5};
  const std::vector<double> tenforty{0.2, 0.8};
  if (ensemble::allocate_budget(half, 50) != std::vector<int>{25, 25}) return {false, "0.5/0.5"};
  if (ensemble::allocate_budget(tenforty, 50) != std::vector<int>{10, 40}) return {false, "0.2/0.8"};
  Rng rng(404);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = 1 + uniform_index(rng, 8);
    std::vector<double> w(k);
    double sum = 0.0;
    for (double& x : w) sum += (x = uniform01(rng) < 0.15 ? 0.0 : uniform01(rng));
    if (sum == 0.0) {
      w[0] = 1.0;
      sum = 1.0;
    }
    for (double& x : w) x /= sum;
    const int nonzero = static_cast<int>(std::count_if(w.begin(), w.end(), [](double x) { return x > 0; }));
    const int budget = nonzero + static_cast<int>(uniform_index(rng, 100));
    const auto counts = ensemble::allocate_budget(w, budget);
    int total = 0;
    for (int c : counts) total += c;
    if (total != budget) return {false, "vector " + std::to_string(t) + " sums to " + std::to_string(total)};
  }
  return {true, "(25,25), (10,40), 10000 sums exact"};
}

// --- 5: MLP gradients and 3-cluster training --------------------------------

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

Dataset clusters(int n, std::uint64_t seed) {
  const double centers[3][2] = {{0.0, 2.0}, {-1.8, -1.0}, {1.8, -1.0}};
  Rng rng(seed);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    d.x.push_back({centers[c][0] + 0.5 * standard_normal(rng), centers[c][1] + 0.5 * standard_normal(rng)});
    d.y.push_back(c);
  }
  return d;
}

router::Batch to_batch(const Dataset& d) {
  router::Batch b;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    b.inputs.push_back(d.x[i]);
    std::vector<double> t(3, 0.0);
    t[d.y[i]] = 1.0;
    b.targets.push_back(t);
  }
  return b;
}

Outcome mlp_correctness() {
  Rng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d_in = 1 + static_cast<int>(uniform_index(rng, 4));
    const int hidden = 1 + static_cast<int>(uniform_index(rng, 6));
    const auto head = t % 2 == 0 ? router::HeadKind::kSoftmax : router::HeadKind::kSigmoid;
    const int d_out = head == router::HeadKind::kSoftmax ? 2 + static_cast<int>(uniform_index(rng, 3)) : 1;
    router::MlpParams p = router::init_mlp(d_in, hidden, d_out, head, 1000 + t);
    std::vector<std::vector<double>> xs(4, std::vector<double>(d_in));
    router::Batch b;
    for (auto& x : xs) {
      for (double& v : x) v = standard_normal(rng);
      b.inputs.push_back(x);
      std::vector<double> target(d_out);
      double s = 0.0;
      for (double& v : target) s += (v = uniform01(rng));
      if (head == router::HeadKind::kSoftmax) {
        for (double& v : target) v /= s;
      }
      b.targets.push_back(target);
    }
    std::vector<double> grad;
    router::mlp_loss(p, b, &grad);
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
      const double h = 1e-5;
      const double keep = p.theta[i];
      p.theta[i] = keep + h;
      const double up = router::mlp_loss(p, b, nullptr);
      p.theta[i] = keep - h;
      const double down = router::mlp_loss(p, b, nullptr);
      p.theta[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max(std::abs(fd), std::abs(grad[i]));
      if (scale < 1e-7) continue;  // both effectively zero (dead unit)
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
  }
  if (worst > 1e-4) return {false, "max relative gradient error " + std::to_string(worst)};

  int passed = 0;
  std::string accs;
  for (int s = 0; s < 5; ++s) {
    const Dataset train = clusters(300, 600 + s);
    const Dataset val = clusters(150, 700 + s);
    router::TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 500;
    cfg.batch_size = 32;
    cfg.hidden_dim = 16;
    cfg.seed = static_cast<std::uint64_t>(s);
    const router::Batch tb = to_batch(train);
    const router::Batch vb = to_batch(val);
    const auto result = router::mlp_train(tb, &vb, 3, router::HeadKind::kSoftmax, cfg);
    int correct = 0;
    for (std::size_t i = 0; i < val.x.size(); ++i) {
      const auto probs = router::mlp_forward(result.params, val.x[i]);
      correct += static_cast<int>(argmax_lowest(probs)) == val.y[i] ? 1 : 0;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(val.x.size());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%.3f", s ? "," : "", acc);
    accs += buf;
    passed += acc >= 0.95 ? 1 : 0;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "grad rel err %.2e; val acc [%s]", worst, accs.c_str());
  return {passed == 5, buf};
}

// --- 6 and 9: synthetic end-to-end ------------------------------------------

Outcome end_to_end(const divcov::testing::PipelineRun& run) {
  const auto oracle = divcov::testing::mean_cov(run.report, "oracle", "test");
  const auto random = divcov::testing::mean_cov(run.report, "random", "test");
  std::string detail;
  bool ok = true;
  char buf[160];
  for (const char* kind : {"router:knn", "router:mway", "router:binary"}) {
    const auto seeds = divcov::testing::run_scores(run.report, kind, "test");
    int good = 0;
    for (double s : seeds) good += (s >= oracle - 0.03 && s > random) ? 1 : 0;
    ok = ok && good == static_cast<int>(seeds.size()) && seeds.size() == 5;
    std::snprintf(buf, sizeof(buf), "%s%s %d/%zu", detail.empty() ? "" : ", ", kind, good, seeds.size());
    detail += buf;
  }
  std::snprintf(buf, sizeof(buf), " (oracle %.3f, random %.3f)", oracle, random);
  return {ok, detail + buf};
}

Outcome determinism(const std::filesystem::path& first, const std::filesystem::path& second) {
  namespace fs = std::filesystem;
  const fs::path a = first / "run";
  const fs::path b = second / "run";
  std::vector<fs::path> files{"report.json", "report.csv", "report.txt", "scores.ndjson", "split.json",
                              "router.knn.json", "router.mway.json", "router.binary.json"};
  for (const auto& e : fs::directory_iterator(a / "routers")) files.push_back(fs::path("routers") / e.path().filename());
  for (const auto& f : files) {
    if (divcov::testing::read_file(a / f) != divcov::testing::read_file(b / f)) {
      return {false, f.string() + " differs"};
    }
  }
  return {true, std::to_string(files.size()) + " artifacts byte-identical"};
}

// --- 7: binary heads carrying the true scores -------------------------------

Outcome plumbing() {
  Rng rng(707);
  for (int t = 0; t < 50; ++t) {
    const int n_models = 1 + static_cast<int>(uniform_index(rng, 6));
    const int n_queries = 1 + static_cast<int>(uniform_index(rng, 30));
    std::vector<std::string> ids, names;
    for (int i = 0; i < n_queries; ++i) ids.push_back("q" + std::to_string(i));
    for (int m = 0; m < n_models; ++m) names.push_back("m" + std::to_string(m));
    ScoreTable table(ids, make_pool(names), 20, PromptKind::kGAll);
    router::FeatureSet features("truth");
    for (const auto& id : ids) {
      std::vector<double> x;
      for (int m = 0; m < n_models; ++m) {
        MetricRecord r;
        r.div_cov = static_cast<double>(uniform_index(rng, 21)) / 20.0;
        table.set(id, m, r);
        x.push_back(r.div_cov);
      }
      x.push_back(1.0);
      features.add(router::FeatureVector{id, x});
    }
    router::Router r;
    r.kind = router::RouterKind::kBinaryMlps;
    r.pool_size = n_models;
    const int d = n_models + 1;
    for (int h = 0; h < n_models; ++h) {
      r.encoder_ids.push_back("truth");
      router::MlpParams p;
      p.d_in = d;
      p.hidden = d;
      p.d_out = 1;
      p.head = router::HeadKind::kSigmoid;
      p.theta.assign(router::MlpParams::param_count(d, d, 1), 0.0);
      for (int i = 0; i < d; ++i) p.theta[p.w1_offset() + i * d + i] = 1.0;
      p.theta[p.w2_offset() + h] = 1.0;
      r.heads.push_back(p);
    }
    router::FeatureBank bank;
    bank.emplace("truth", features);
    const EnsemblePlan oracle = ensemble::oracle_per_query(table);
    for (const auto& id : ids) {
      if (r.route(id, bank, 1).at(0) != oracle.row(id).sources.at(0).model.pool_index) {
        return {false, "table " + std::to_string(t) + " query " + id + " routes differently"};
      }
    }
  }
  return {true, "50 tables route identically to the oracle"};
}

// --- 8: significance calibration --------------------------------------------

Outcome calibration() {
  Rng rng(808);
  int stars = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> scores(5);
    for (double& s : scores) s = 0.238 + 0.01 * standard_normal(rng);
    const auto r = harness::significance_test(scores, 0.238, 0.05, harness::SignificanceTest::kStudentT);
    stars += r.verdict == harness::Verdict::kSignificant ? 1 : 0;
  }
  const std::vector<double> paper{0.261, 0.263, 0.264, 0.262, 0.265};
  const auto r = harness::significance_test(paper, 0.238, 0.05, harness::SignificanceTest::kStudentT);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "null ** rate %.3f; tight case p=%.2e verdict %s", stars / 1000.0,
                r.p_value, std::string(to_token(r.verdict)).c_str());
  return {stars <= 100 && r.verdict == harness::Verdict::kSignificant, buf};
}

// --- 10: parser corpus ------------------------------------------------------

Outcome parser_robustness() {
  int items = 0;
  for (const auto& c : divcov::testing::parser_corpus()) {
    const auto got = sampling::parse_answers(c.raw, c.format, c.verbalized);
    if (got != c.expected) return {false, "case '" + c.name + "' mismatch"};
    for (const auto& a : got) {
      if (a.empty()) return {false, "case '" + c.name + "' produced an empty answer"};
    }
    items += static_cast<int>(got.size());
  }
  return {true, std::to_string(items) + " items recovered, none empty"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && secs > limit_s) {
      o.pass = false;
      o.detail += " (over time limit)";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  TempDir first("divcov-accept-a");
  TempDir second("divcov-accept-b");
  divcov::testing::SyntheticOptions options;
  std::optional<divcov::testing::PipelineRun> run;

  report(1, "metric identity", 5, metric_identity);
  report(2, "extraction fidelity", 5, extraction_fidelity);
  report(3, "oracle dominance", 30, oracle_dominance);
  report(4, "budget arithmetic", 2, budget_arithmetic);
  report(5, "mlp correctness", 60, mlp_correctness);
  report(6, "end-to-end routing", 180, [&] {
    run = divcov::testing::run_synthetic_pipeline(first.path(), options);
    return end_to_end(*run);
  });
  report(7, "oracle plumbing", 2, plumbing);
  report(8, "significance calibration", 10, calibration);
  report(9, "determinism", 0, [&] {
    if (!run) return Outcome{false, "criterion 6 did not complete"};
    divcov::testing::run_synthetic_pipeline(second.path(), options);
    return determinism(first.path(), second.path());
  });
  report(10, "parser robustness", 0, parser_robustness);
  return failures == 0 ? 0 : 1;
}
