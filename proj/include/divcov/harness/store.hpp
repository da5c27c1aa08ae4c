#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/ensemble/merge.hpp"

namespace divcov::harness {

// Answer sets of one sampling configuration, persisted append-only at
// <run_dir>/answers/<sampling_hash>/answers.ndjson. A torn final line left by
// an interrupted run is ignored on load. One writer per run directory.
class AnswerStore final : public ensemble::AnswerBank {
 public:
  AnswerStore(const std::filesystem::path& run_dir, std::string sampling_hash, ModelPool pool);

  bool has(const std::string& query_id, int pool_index) const;
  const AnswerSet& get(const std::string& query_id, int pool_index) const override;
  // Validates, persists, and indexes the set (replacing any earlier one).
  void put(AnswerSet set);
  // sha256 of the stored record bytes.
  std::optional<std::string> sha(const std::string& query_id, int pool_index) const;

  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }
  const ModelPool& pool() const { return pool_; }

 private:
  struct Entry {
    AnswerSet set;
    std::string sha;
  };

  std::filesystem::path file_;
  ModelPool pool_;
  std::map<std::string, int> index_by_name_;
  mutable std::shared_mutex mutex_;
  std::map<std::pair<std::string, int>, Entry> sets_;
};

struct TimingEntry {
  std::string phase;  // "sample", "score", "route"
  std::string query_id;
  std::string model;
  double ms = 0.0;
};

// Append-only timing log (timing.ndjson). Thread-safe.
class TimingLog {
 public:
  explicit TimingLog(std::filesystem::path file);
  void record(const TimingEntry& entry);
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::mutex mutex_;
};

std::vector<TimingEntry> read_timing(const std::filesystem::path& file);

}  // namespace divcov::harness
