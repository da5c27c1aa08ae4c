#include "mocks.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

#include "divcov/core/rng.hpp"
#include "divcov/core/serialize.hpp"
#include "httplib.h"

namespace divcov::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double MatrixEquivalence::similarity(std::string_view a, std::string_view b) const {
  return sim_.at(std::stoul(std::string(a))).at(std::stoul(std::string(b)));
}

std::vector<std::string> MatrixEquivalence::labels() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sim_.size(); ++i) out.push_back(std::to_string(i));
  return out;
}

std::string ScriptedChat::complete(const sampling::ChatRequest& request) const {
  const int call = calls_.fetch_add(1);
  return script_(request, call);
}

// --- World -----------------------------------------------------------------

std::vector<Query> World::queries() const {
  std::vector<Query> out;
  for (int i = 0; i < n_queries; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "q%03d", i);
    Query q;
    q.id = id;
    const int topic = static_cast<int>(fnv1a(q.id) % static_cast<std::uint64_t>(pool_size));
    q.text = "Name the items of case " + q.id + " in topic-" + std::to_string(topic) + ".";
    q.space = AnswerSpace::kFixedSet;
    std::vector<std::string> gold;
    for (int g = 0; g < gold_size; ++g) gold.push_back("item " + std::to_string(g));
    q.gold_answers = gold;
    q.dataset_tag = "synthetic";
    out.push_back(q);
  }
  return out;
}

std::vector<std::string> World::model_names() const {
  std::vector<std::string> out;
  for (int m = 0; m < pool_size; ++m) out.push_back("m" + std::to_string(m));
  return out;
}

int World::topic_of(std::string_view text) {
  const auto at = text.find("topic-");
  if (at == std::string_view::npos) return -1;
  return std::stoi(std::string(text.substr(at + 6)));
}

int World::model_index(std::string_view name) {
  return std::stoi(std::string(name.substr(1)));
}

std::string World::reply(std::string_view model, std::string_view prompt,
                         std::int64_t seed) const {
  const std::string first_line(prompt.substr(0, prompt.find('\n')));
  const int topic = topic_of(first_line);
  const int m = model_index(model);
  Rng rng(fnv1a(first_line) ^ (static_cast<std::uint64_t>(seed) * 0x9e3779b97f4a7c15ULL) ^
          static_cast<std::uint64_t>(m + 1));
  std::string out = "{";
  for (int i = 0; i < per_call; ++i) {
    int item;
    if (m == topic) {
      item = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(gold_size)));
    } else {
      item = (m * weak_size + static_cast<int>(uniform_index(rng, weak_size))) % gold_size;
    }
    if (i > 0) out += ", ";
    out += "item " + std::to_string(item);
  }
  return out + "}";
}

std::vector<double> World::embed(std::string_view text) const {
  std::vector<double> v(static_cast<std::size_t>(pool_size) + 4, 0.0);
  const int topic = topic_of(text);
  if (topic >= 0 && topic < pool_size) v[topic] = 1.0;
  Rng rng(fnv1a(text));
  for (int j = 0; j < 4; ++j) v[pool_size + j] = 0.3 * uniform(rng, -1.0, 1.0) + 0.01;
  return v;
}

std::string WorldChat::complete(const sampling::ChatRequest& request) const {
  calls_.fetch_add(1);
  return world_.reply(request.model, request.messages.back().content, request.seed);
}

// --- HTTP ------------------------------------------------------------------

MockHttpServer::MockHttpServer(World world)
    : world_(world), server_(std::make_unique<httplib::Server>()) {
  handlers_["/v1/chat/completions"] = [this](const std::string& body) {
    const Json req = Json::parse(body);
    const std::string content = world_.reply(req.at("model").get<std::string>(),
                                             req.at("messages").back().at("content").get<std::string>(),
                                             req.value("seed", std::int64_t{0}));
    return Json{{"choices", Json::array({Json{{"index", 0},
                                              {"message", {{"role", "assistant"},
                                                           {"content", content}}}}})}}
        .dump();
  };
  handlers_["/v1/embeddings"] = [this](const std::string& body) {
    const Json req = Json::parse(body);
    return Json{{"data", Json::array({Json{{"embedding",
                                            world_.embed(req.at("input").get<std::string>())}}})}}
        .dump();
  };
  install();
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockHttpServer::~MockHttpServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockHttpServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void MockHttpServer::install() {
  server_->Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    std::function<std::string(const std::string&)> handler;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++hits_[req.path];
      authorization_ = req.get_header_value("Authorization");
      if (auto it = failures_.find(req.path); it != failures_.end()) {
        res.status = it->second.first;
        res.set_content(it->second.second, "application/json");
        return;
      }
      auto it = handlers_.find(req.path);
      if (it == handlers_.end()) {
        res.status = 404;
        return;
      }
      handler = it->second;
    }
    try {
      res.set_content(handler(req.body), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

void MockHttpServer::fail(const std::string& path, int status, std::string body) {
  std::lock_guard<std::mutex> lock(mutex_);
  failures_[path] = {status, std::move(body)};
}

void MockHttpServer::on(const std::string& path,
                        std::function<std::string(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(mutex_);
  handlers_[path] = std::move(handler);
}

int MockHttpServer::hits(const std::string& path) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = hits_.find(path);
  return it == hits_.end() ? 0 : it->second;
}

std::string MockHttpServer::last_authorization() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return authorization_;
}

}  // namespace divcov::testing
