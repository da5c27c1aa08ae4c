#include "divcov/sampling/endpoint.hpp"

#include "divcov/core/error.hpp"

namespace divcov::sampling {

nlohmann::json to_json(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", request.model},       {"messages", messages},
          {"temperature", request.temperature}, {"top_p", request.top_p},
          {"max_tokens", request.max_tokens},   {"seed", request.seed}};
}

OpenAIChatEndpoint::OpenAIChatEndpoint(net::EndpointConfig config)
    : client_(std::move(config)) {}

std::string OpenAIChatEndpoint::complete(const ChatRequest& request) const {
  const nlohmann::json reply = client_.post("/v1/chat/completions", to_json(request));
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("chat reply missing choices[0].message.content: ") +
                        e.what());
  }
}

}  // namespace divcov::sampling
