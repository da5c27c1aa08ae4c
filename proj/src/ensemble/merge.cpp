#include "divcov/ensemble/merge.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "divcov/core/error.hpp"

namespace divcov::ensemble {

void InMemoryAnswerBank::put(AnswerSet set) {
  auto key = std::make_pair(set.query_id, set.model.pool_index);
  sets_.insert_or_assign(std::move(key), std::move(set));
}

bool InMemoryAnswerBank::has(const std::string& query_id, int pool_index) const {
  return sets_.count({query_id, pool_index}) > 0;
}

const AnswerSet& InMemoryAnswerBank::get(const std::string& query_id, int pool_index) const {
  auto it = sets_.find({query_id, pool_index});
  if (it == sets_.end()) {
    throw IncompleteError("no answer set for query " + query_id + " / model " +
                          std::to_string(pool_index));
  }
  return it->second;
}

MergedSet merge_answer_sets(const PlanRow& row, const AnswerBank& bank) {
  if (row.sources.empty()) throw ContractError("plan row without sources: " + row.query_id);
  MergedSet merged;
  merged.query_id = row.query_id;
  merged.sources = row.sources;
  for (const Allocation& a : row.sources) {
    if (a.count < 1) throw ContractError("allocation count must be >= 1");
    const AnswerSet& set = bank.get(row.query_id, a.model.pool_index);
    if (static_cast<int>(set.answers.size()) < a.count) {
      throw ContractError("model " + a.model.name + " has " +
                          std::to_string(set.answers.size()) + " answers for query " +
                          row.query_id + ", plan needs " + std::to_string(a.count));
    }
    std::vector<const Answer*> ordered;
    for (const Answer& ans : set.answers) ordered.push_back(&ans);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Answer* x, const Answer* y) { return x->position < y->position; });
    for (int i = 0; i < a.count; ++i) merged.answers.push_back(ordered[i]->text);
  }
  merged.budget = static_cast<int>(merged.answers.size());
  return merged;
}

MeanMetrics mean_of(const std::vector<MetricRecord>& records) {
  MeanMetrics m;
  if (records.empty()) return m;
  for (const MetricRecord& r : records) {
    m.div_cov += r.div_cov;
    m.n_unique += r.n_unique;
    m.qual += r.qual;
    m.unq_qual += r.unq_qual;
  }
  const auto n = static_cast<double>(records.size());
  m.div_cov /= n;
  m.n_unique /= n;
  m.qual /= n;
  m.unq_qual /= n;
  return m;
}

namespace {

const Query& find_query(const std::unordered_map<std::string, Query>& queries,
                        const std::string& id) {
  auto it = queries.find(id);
  if (it == queries.end()) throw IncompleteError("unknown query " + id);
  return it->second;
}

}  // namespace

PlanEvaluation evaluate_plan(const EnsemblePlan& plan, const AnswerBank& bank,
                             const std::unordered_map<std::string, Query>& queries,
                             const metrics::MetricSuite& suite,
                             const EvaluateOptions& options) {
  plan.validate();
  PlanEvaluation out;
  const std::size_t n = plan.rows.size();
  out.records.resize(n);
  for (const PlanRow& row : plan.rows) out.query_ids.push_back(row.query_id);

  auto evaluate_row = [&](std::size_t i) {
    const PlanRow& row = plan.rows[i];
    if (options.table && row.sources.size() == 1 &&
        row.sources[0].count == options.table->budget() &&
        options.table->has(row.query_id, row.sources[0].model.pool_index)) {
      out.records[i] = options.table->at(row.query_id, row.sources[0].model.pool_index);
      return;
    }
    const MergedSet merged = merge_answer_sets(row, bank);
    out.records[i] = suite.evaluate(find_query(queries, row.query_id), merged.answers).record;
  };

  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) evaluate_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            evaluate_row(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  out.mean = mean_of(out.records);
  return out;
}

RowScorer merged_div_cov_scorer(const AnswerBank& bank,
                                const std::unordered_map<std::string, Query>& queries,
                                const metrics::MetricSuite& suite) {
  return [&bank, &queries, &suite](const PlanRow& row) {
    const MergedSet merged = merge_answer_sets(row, bank);
    return suite.evaluate(find_query(queries, row.query_id), merged.answers).record.div_cov;
  };
}

}  // namespace divcov::ensemble
