#pragma once

// Minimal JSON-over-HTTP client shared by the chat, embedding, reward, and
// equivalence endpoint clients.

#include <string>
#include <string_view>

#include <json.hpp>

namespace divcov::net {

struct EndpointConfig {
  std::string base_url;      // scheme://host[:port][/prefix]
  std::string api_key_env;   // name of the variable holding a bearer token
  int timeout_ms = 30000;
  int retries = 2;           // extra attempts after the first failure
};

class HttpJsonClient {
 public:
  explicit HttpJsonClient(EndpointConfig config);

  // POSTs body to prefix + path. Connection failures, timeouts, 429 and 5xx
  // are retried; the last failure surfaces as TransportError. A 2xx reply
  // that is not JSON raises ProtocolError.
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path prefix without trailing slash
};

}  // namespace divcov::net
