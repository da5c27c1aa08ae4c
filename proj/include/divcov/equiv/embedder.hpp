#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "divcov/net/http_json.hpp"

namespace divcov::equiv {

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::string model_name() const = 0;
};

// OpenAI-compatible embeddings: POST /v1/embeddings {model, input}
// -> data[0].embedding.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(net::EndpointConfig endpoint, std::string model);
  std::vector<double> embed(std::string_view text) const override;
  std::string model_name() const override { return model_; }

 private:
  net::HttpJsonClient client_;
  std::string model_;
};

// Memoises another embedder by exact text. Safe for concurrent callers.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<const Embedder> inner)
      : inner_(std::move(inner)) {}
  std::vector<double> embed(std::string_view text) const override;
  std::string model_name() const override { return inner_->model_name(); }
  std::size_t misses() const;

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
  mutable std::size_t misses_ = 0;
};

}  // namespace divcov::equiv
