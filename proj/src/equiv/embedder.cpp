#include "divcov/equiv/embedder.hpp"

#include <cmath>

#include "divcov/core/error.hpp"

namespace divcov::equiv {

HttpEmbedder::HttpEmbedder(net::EndpointConfig endpoint, std::string model)
    : client_(std::move(endpoint)), model_(std::move(model)) {}

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
  const nlohmann::json reply =
      client_.post("/v1/embeddings", {{"model", model_}, {"input", text}});
  if (!reply.is_object() || !reply.contains("data") || !reply["data"].is_array() ||
      reply["data"].empty() || !reply["data"][0].is_object() ||
      !reply["data"][0].contains("embedding") ||
      !reply["data"][0]["embedding"].is_array()) {
    throw ProtocolError("embedding reply lacks data[0].embedding");
  }
  std::vector<double> out;
  for (const auto& v : reply["data"][0]["embedding"]) {
    if (!v.is_number()) throw ProtocolError("non-numeric embedding entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ProtocolError("non-finite embedding entry");
    out.push_back(d);
  }
  if (out.empty()) throw ProtocolError("empty embedding");
  return out;
}

std::vector<double> CachingEmbedder::embed(std::string_view text) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(std::string(text)); it != cache_.end()) return it->second;
  }
  std::vector<double> v = inner_->embed(text);
  std::lock_guard lock(mutex_);
  ++misses_;
  return cache_.emplace(std::string(text), std::move(v)).first->second;
}

std::size_t CachingEmbedder::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace divcov::equiv
