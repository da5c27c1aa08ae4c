#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/equiv/embedder.hpp"

namespace divcov::router {

struct FeatureVector {
  std::string query_id;
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  bool operator==(const FeatureVector&) const = default;
};

// Vectors of one encoder keyed by query id; all share one dimension.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::string encoder_id) : encoder_id_(std::move(encoder_id)) {}

  // Rejects empty, non-finite, zero-norm, or wrong-dimension vectors.
  void add(FeatureVector vec);
  bool has(const std::string& query_id) const { return rows_.count(query_id) > 0; }
  // Throws IncompleteError when the query has no vector.
  const std::vector<double>& at(const std::string& query_id) const;
  // Throws ContractError listing every query without a vector.
  void require(const std::vector<std::string>& query_ids) const;

  const std::string& encoder_id() const { return encoder_id_; }
  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

  bool operator==(const FeatureSet&) const = default;

 private:
  std::string encoder_id_;
  int dim_ = 0;
  std::map<std::string, std::vector<double>> rows_;
};

std::string agnostic_encoder_id(const std::string& model);
std::string specific_encoder_id(const std::string& model);

// features.<encoder_id>.ndjson with '/' in the id replaced by '_'.
std::filesystem::path feature_file_name(const std::string& encoder_id);

// Rows {query_id, dim, values}, sorted by query id.
void write_features(const std::filesystem::path& path, const FeatureSet& set);
FeatureSet read_features(const std::filesystem::path& path, std::string encoder_id);

// Hidden-state features for one pool model. Every listed query must be
// present; absentees are reported together.
FeatureSet load_specific_features(const std::filesystem::path& path, const ModelId& model,
                                  const std::vector<std::string>& query_ids);

void l2_normalize(std::vector<double>& values);

// Model-agnostic query encoder over an embedding endpoint. Vectors are
// L2-normalised and cached per query id.
class AgnosticEncoder {
 public:
  explicit AgnosticEncoder(std::shared_ptr<const equiv::Embedder> embedder);

  const std::vector<double>& encode(const Query& query);
  // Encodes every query (using threads workers) and returns the set.
  FeatureSet encode_all(const std::vector<Query>& queries, int threads = 1);

  const std::string& encoder_id() const { return encoder_id_; }
  std::size_t calls() const;

 private:
  std::shared_ptr<const equiv::Embedder> embedder_;
  std::string encoder_id_;
  mutable std::mutex mutex_;
  FeatureSet cache_;
  std::size_t calls_ = 0;
};

}  // namespace divcov::router
