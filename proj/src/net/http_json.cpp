#include "divcov/net/http_json.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "divcov/core/error.hpp"

namespace divcov::net {

HttpJsonClient::HttpJsonClient(EndpointConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ContractError("endpoint URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
  if (config_.timeout_ms < 1) throw ContractError("timeout_ms must be >= 1");
  if (config_.retries < 0) throw ContractError("retries must be >= 0");
}

nlohmann::json HttpJsonClient::post(std::string_view path,
                                    const nlohmann::json& body) const {
  const std::string full_path = prefix_ + std::string(path);
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ContractError("environment variable " + config_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    httplib::Client client(origin_);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + origin_ + full_path + " failed: " +
                   httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + origin_ + full_path;
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + origin_ +
                           full_path + ": " + res->body.substr(0, 200));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("non-JSON response from " + origin_ + full_path);
    }
  }
  throw TransportError(last_error);
}

}  // namespace divcov::net
