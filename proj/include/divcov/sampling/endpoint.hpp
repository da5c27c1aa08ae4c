#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/net/http_json.hpp"

namespace divcov::sampling {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 4096;
  std::int64_t seed = 0;
};

// One chat completion per call; returns the assistant message text.
// Implementations must be safe to call from several threads.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(const ChatRequest& request) const = 0;
};

// OpenAI-compatible POST /v1/chat/completions.
class OpenAIChatEndpoint final : public ChatEndpoint {
 public:
  explicit OpenAIChatEndpoint(net::EndpointConfig config);
  std::string complete(const ChatRequest& request) const override;

 private:
  net::HttpJsonClient client_;
};

nlohmann::json to_json(const ChatRequest& request);

}  // namespace divcov::sampling
