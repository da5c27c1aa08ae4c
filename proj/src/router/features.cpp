#include "divcov/router/features.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "divcov/core/error.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/simd/kernels.hpp"

namespace divcov::router {

void FeatureSet::add(FeatureVector vec) {
  if (vec.query_id.empty()) throw ContractError("feature row without query id");
  if (vec.values.empty()) throw ContractError("empty feature vector for " + vec.query_id);
  for (double x : vec.values) {
    if (!std::isfinite(x)) {
      throw ContractError("non-finite feature value for query " + vec.query_id);
    }
  }
  if (simd::dot(vec.values, vec.values) <= 0.0) {
    throw ContractError("zero feature vector for query " + vec.query_id);
  }
  if (dim_ != 0 && vec.dim() != dim_) {
    throw ContractError("feature dim " + std::to_string(vec.dim()) + " for query " +
                        vec.query_id + " does not match " + std::to_string(dim_) +
                        " of encoder " + encoder_id_);
  }
  dim_ = vec.dim();
  rows_.insert_or_assign(std::move(vec.query_id), std::move(vec.values));
}

const std::vector<double>& FeatureSet::at(const std::string& query_id) const {
  auto it = rows_.find(query_id);
  if (it == rows_.end()) {
    throw IncompleteError("no " + encoder_id_ + " features for query " + query_id);
  }
  return it->second;
}

void FeatureSet::require(const std::vector<std::string>& query_ids) const {
  std::string absent;
  int count = 0;
  for (const std::string& q : query_ids) {
    if (!has(q)) {
      absent += (count++ ? ", " : "") + q;
    }
  }
  if (count > 0) {
    throw ContractError(encoder_id_ + " features missing for " + std::to_string(count) +
                        " queries: " + absent);
  }
}

std::string agnostic_encoder_id(const std::string& model) { return "agnostic:" + model; }
std::string specific_encoder_id(const std::string& model) { return "specific:" + model; }

std::filesystem::path feature_file_name(const std::string& encoder_id) {
  std::string safe = encoder_id;
  std::replace(safe.begin(), safe.end(), '/', '_');
  return "features." + safe + ".ndjson";
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
  std::string out;
  for (const auto& [id, values] : set.rows()) {
    Json row = {{"query_id", id}, {"dim", values.size()}, {"values", values}};
    out += row.dump();
    out += '\n';
  }
  write_text_atomic(path, out);
}

FeatureSet read_features(const std::filesystem::path& path, std::string encoder_id) {
  FeatureSet set(std::move(encoder_id));
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const Json j = parse_json(lines[i]);
    FieldReader r(j, where);
    FeatureVector vec;
    vec.query_id = r.string("query_id");
    const auto dim = r.integer("dim");
    const Json& values = r.require("values");
    if (!values.is_array()) throw_field_error("values must be an array", r.child_path("values"));
    for (std::size_t k = 0; k < values.size(); ++k) {
      vec.values.push_back(
          json_number(values[k], r.child_path("values") + "[" + std::to_string(k) + "]"));
    }
    r.finish();
    if (dim != vec.dim()) throw_field_error("dim does not match values", r.child_path("dim"));
    if (set.has(vec.query_id)) {
      throw ContractError("duplicate feature row for query " + vec.query_id + " at " + where);
    }
    set.add(std::move(vec));
  }
  return set;
}

FeatureSet load_specific_features(const std::filesystem::path& path, const ModelId& model,
                                  const std::vector<std::string>& query_ids) {
  FeatureSet set = read_features(path, specific_encoder_id(model.name));
  set.require(query_ids);
  return set;
}

void l2_normalize(std::vector<double>& values) {
  const double norm = std::sqrt(simd::dot(values, values));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ContractError("cannot normalise a zero or non-finite vector");
  }
  for (double& x : values) x /= norm;
}

AgnosticEncoder::AgnosticEncoder(std::shared_ptr<const equiv::Embedder> embedder)
    : embedder_(std::move(embedder)),
      encoder_id_(agnostic_encoder_id(embedder_->model_name())),
      cache_(encoder_id_) {}

const std::vector<double>& AgnosticEncoder::encode(const Query& query) {
  {
    std::lock_guard lock(mutex_);
    if (cache_.has(query.id)) return cache_.at(query.id);
  }
  std::vector<double> values;
  try {
    values = embedder_->embed(query.text);
  } catch (const TransportError& e) {
    throw TransportError(std::string(e.what()) + " (query " + query.id + ")");
  } catch (const ProtocolError& e) {
    throw ProtocolError(std::string(e.what()) + " (query " + query.id + ")");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw ProtocolError("non-finite embedding for query " + query.id);
  }
  if (values.empty() || simd::dot(values, values) <= 0.0) {
    throw ProtocolError("zero embedding for query " + query.id);
  }
  l2_normalize(values);
  std::lock_guard lock(mutex_);
  ++calls_;
  if (!cache_.has(query.id)) cache_.add(FeatureVector{query.id, std::move(values)});
  return cache_.at(query.id);
}

FeatureSet AgnosticEncoder::encode_all(const std::vector<Query>& queries, int threads) {
  const std::size_t n = queries.size();
  const auto workers_n = static_cast<std::size_t>(std::max(1, threads));
  if (workers_n <= 1 || n <= 1) {
    for (const Query& q : queries) encode(q);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < std::min(workers_n, n); ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            encode(queries[i]);
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
  FeatureSet out(encoder_id_);
  std::lock_guard lock(mutex_);
  for (const Query& q : queries) out.add(FeatureVector{q.id, cache_.at(q.id)});
  return out;
}

std::size_t AgnosticEncoder::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace divcov::router
