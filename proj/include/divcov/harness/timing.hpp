#pragma once

#include <map>
#include <string>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/harness/store.hpp"

namespace divcov::harness {

struct PhaseStats {
  std::string phase;
  std::size_t queries = 0;
  double mean_s = 0.0;  // seconds per query
  double p95_s = 0.0;
};

struct MethodCost {
  std::string method;
  std::size_t queries = 0;
  double mean_s = 0.0;
  double p95_s = 0.0;
};

struct TimingReport {
  std::vector<PhaseStats> phases;  // per-query totals over all models
  std::vector<MethodCost> methods;
};

// Per-query wall time per phase, summed over models, then mean and p95.
// Each plan adds a method cost: route time plus the sample and score time of
// the planned models for that query. "oracle" (all pool models) is always
// included when sample entries exist.
TimingReport timing_report(const std::vector<TimingEntry>& entries, const ModelPool& pool,
                           const std::map<std::string, EnsemblePlan>& plans = {});

std::string timing_json(const TimingReport& report);

}  // namespace divcov::harness
