#include "divcov/harness/timing.hpp"


#include "divcov/core/serialize.hpp"
#include "divcov/harness/stats.hpp"

namespace divcov::harness {

namespace {

std::pair<double, double> mean_p95(const std::vector<double>& ms) {
  std::vector<double> s;
  for (double x : ms) s.push_back(x / 1000.0);
  return {mean(s), percentile(s, 0.95)};
}

}  // namespace

TimingReport timing_report(const std::vector<TimingEntry>& entries, const ModelPool& pool,
                           const std::map<std::string, EnsemblePlan>& plans) {
  // phase -> query -> model -> ms
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> by;
  for (const TimingEntry& e : entries) by[e.phase][e.query_id][e.model] += e.ms;

  TimingReport report;
  for (const auto& [phase, queries] : by) {
    std::vector<double> per_query;
    for (const auto& [q, models] : queries) {
      double total = 0.0;
      for (const auto& [m, ms] : models) total += ms;
      per_query.push_back(total);
    }
    const auto [m, p95] = mean_p95(per_query);
    report.phases.push_back(PhaseStats{phase, per_query.size(), m, p95});
  }

  auto cell = [&](const std::string& phase, const std::string& q, const std::string& model) {
    auto p = by.find(phase);
    if (p == by.end()) return 0.0;
    auto qi = p->second.find(q);
    if (qi == p->second.end()) return 0.0;
    if (model.empty()) {
      double total = 0.0;
      for (const auto& [m, ms] : qi->second) total += ms;
      return total;
    }
    auto mi = qi->second.find(model);
    return mi == qi->second.end() ? 0.0 : mi->second;
  };

  auto sample_it = by.find("sample");
  if (sample_it != by.end()) {
    std::vector<double> per_query;
    for (const auto& [q, models] : sample_it->second) {
      double total = 0.0;
      for (const ModelId& m : pool) total += cell("sample", q, m.name) + cell("score", q, m.name);
      per_query.push_back(total);
    }
    const auto [m, p95] = mean_p95(per_query);
    report.methods.push_back(MethodCost{"oracle", per_query.size(), m, p95});
  }
  for (const auto& [name, plan] : plans) {
    std::vector<double> per_query;
    for (const PlanRow& row : plan.rows) {
      double total = cell("route", row.query_id, "");
      for (const Allocation& a : row.sources) {
        total += cell("sample", row.query_id, a.model.name) +
                 cell("score", row.query_id, a.model.name);
      }
      per_query.push_back(total);
    }
    const auto [m, p95] = mean_p95(per_query);
    report.methods.push_back(MethodCost{name, per_query.size(), m, p95});
  }
  return report;
}

std::string timing_json(const TimingReport& report) {
  Json phases = Json::array();
  for (const PhaseStats& p : report.phases) {
    phases.push_back({{"phase", p.phase}, {"queries", p.queries}, {"mean_s", p.mean_s},
                      {"p95_s", p.p95_s}});
  }
  Json methods = Json::array();
  for (const MethodCost& m : report.methods) {
    methods.push_back({{"method", m.method}, {"queries", m.queries}, {"mean_s", m.mean_s},
                       {"p95_s", m.p95_s}});
  }
  return Json{{"phases", phases}, {"methods", methods}}.dump(2) + "\n";
}

}  // namespace divcov::harness
