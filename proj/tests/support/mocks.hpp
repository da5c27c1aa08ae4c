#pragma once

// Test doubles shared by the unit, integration, and acceptance tests.

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/equiv/embedder.hpp"
#include "divcov/equiv/provider.hpp"
#include "divcov/sampling/endpoint.hpp"

namespace httplib {
class Server;
}

namespace divcov::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "divcov");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::uint64_t fnv1a(std::string_view s);

// Similarity looked up from a matrix; answers are the strings "0".."n-1".
class MatrixEquivalence final : public equiv::EquivalenceProvider {
 public:
  explicit MatrixEquivalence(std::vector<std::vector<double>> sim) : sim_(std::move(sim)) {}
  double similarity(std::string_view a, std::string_view b) const override;
  equiv::EquivalenceKind kind() const override { return equiv::EquivalenceKind::kCustom; }
  std::vector<std::string> labels() const;

 private:
  std::vector<std::vector<double>> sim_;
};

// Chat endpoint driven by a callback; counts calls.
class ScriptedChat final : public sampling::ChatEndpoint {
 public:
  using Script = std::function<std::string(const sampling::ChatRequest&, int call)>;
  explicit ScriptedChat(Script script) : script_(std::move(script)) {}
  std::string complete(const sampling::ChatRequest& request) const override;
  int calls() const { return calls_.load(); }

 private:
  Script script_;
  mutable std::atomic<int> calls_{0};
};

// Synthetic routing world. Every query belongs to one of pool_size topics
// (a planted feature visible in its text). The model whose index equals the
// topic samples from the whole gold list; every other model only repeats a
// small slice of it, so the best model per query is the topic.
struct World {
  int n_queries = 100;
  int pool_size = 4;
  int gold_size = 12;
  int weak_size = 3;
  int per_call = 10;

  std::vector<Query> queries() const;
  std::vector<std::string> model_names() const;
  static int topic_of(std::string_view text);
  static int model_index(std::string_view name);
  // Curly-list reply for a prompt whose first line is the query text.
  std::string reply(std::string_view model, std::string_view prompt, std::int64_t seed) const;
  std::vector<double> embed(std::string_view text) const;
};

class WorldChat final : public sampling::ChatEndpoint {
 public:
  explicit WorldChat(World world) : world_(world) {}
  std::string complete(const sampling::ChatRequest& request) const override;
  int calls() const { return calls_.load(); }

 private:
  World world_;
  mutable std::atomic<int> calls_{0};
};

class WorldEmbedder final : public equiv::Embedder {
 public:
  explicit WorldEmbedder(World world) : world_(world) {}
  std::vector<double> embed(std::string_view text) const override { return world_.embed(text); }
  std::string model_name() const override { return "mock-embed"; }

 private:
  World world_;
};

// Local HTTP server speaking the chat, embedding, reward, equivalence and
// route wire formats. Replies come from a World unless overridden.
class MockHttpServer {
 public:
  explicit MockHttpServer(World world = {});
  ~MockHttpServer();

  std::string base_url() const;
  int port() const { return port_; }

  // Every request on path gets this status and body instead.
  void fail(const std::string& path, int status, std::string body = "{}");
  // Replaces the handler for one path: JSON body in, JSON text out.
  void on(const std::string& path, std::function<std::string(const std::string&)> handler);
  int hits(const std::string& path) const;
  std::string last_authorization() const;

 private:
  void install();

  World world_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, std::function<std::string(const std::string&)>> handlers_;
  std::map<std::string, std::pair<int, std::string>> failures_;
  std::map<std::string, int> hits_;
  std::string authorization_;
};

}  // namespace divcov::testing
