#include "divcov/equiv/provider.hpp"

#include <algorithm>
#include <cmath>

#include "divcov/core/error.hpp"
#include "divcov/core/text.hpp"
#include "divcov/equiv/embedder.hpp"
#include "divcov/simd/kernels.hpp"

namespace divcov::equiv {

std::string_view to_token(EquivalenceKind kind) {
  switch (kind) {
    case EquivalenceKind::kExactMatch: return "exact";
    case EquivalenceKind::kNormalizedMatch: return "normalized";
    case EquivalenceKind::kCosineThreshold: return "cosine";
    case EquivalenceKind::kRemoteClassifier: return "remote";
    case EquivalenceKind::kCustom: return "custom";
  }
  return "custom";
}

EquivalenceKind equivalence_kind_from_token(std::string_view token) {
  for (auto kind : {EquivalenceKind::kExactMatch, EquivalenceKind::kNormalizedMatch,
                    EquivalenceKind::kCosineThreshold,
                    EquivalenceKind::kRemoteClassifier}) {
    if (to_token(kind) == token) return kind;
  }
  throw ContractError("unknown equivalence kind: " + std::string(token));
}

std::string normalize_text(std::string_view s) { return text::match_form(s); }

double NormalizedMatch::similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  return normalize_text(a) == normalize_text(b) ? 1.0 : 0.0;
}

double CosineThreshold::similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  const std::vector<double> ea = embedder_->embed(a);
  const std::vector<double> eb = embedder_->embed(b);
  if (ea.size() != eb.size() || ea.empty()) {
    throw ProtocolError("embedding dimensions differ or are empty");
  }
  const double na = std::sqrt(simd::dot(ea, ea));
  const double nb = std::sqrt(simd::dot(eb, eb));
  if (!(na > 0.0) || !(nb > 0.0)) throw ProtocolError("zero-norm embedding");
  const double cos = std::clamp(simd::dot(ea, eb) / (na * nb), -1.0, 1.0);
  return (cos + 1.0) / 2.0;
}

namespace {

// Unambiguous key for an unordered text pair.
std::string pair_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key = std::to_string(a.size());
  key.push_back(':');
  key.append(a);
  key.append(b);
  return key;
}

double checked_score(const nlohmann::json& v) {
  if (!v.is_number()) throw ProtocolError("equivalence score is not a number");
  const double s = v.get<double>();
  if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
    throw ProtocolError("equivalence score outside [0,1]");
  }
  return s;
}

}  // namespace

RemoteClassifier::RemoteClassifier(net::EndpointConfig endpoint, bool batch)
    : client_(std::move(endpoint)), batch_(batch) {}

double RemoteClassifier::score_once(std::string_view a, std::string_view b) const {
  if (batch_) {
    nlohmann::json body{{"pairs", nlohmann::json::array({
                                      {{"text_a", a}, {"text_b", b}},
                                      {{"text_a", b}, {"text_b", a}},
                                  })}};
    const nlohmann::json reply = client_.post("", body);
    {
      std::lock_guard lock(mutex_);
      ++requests_;
    }
    if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array() ||
        reply["scores"].size() != 2) {
      throw ProtocolError("batch equivalence reply must carry two scores");
    }
    return (checked_score(reply["scores"][0]) + checked_score(reply["scores"][1])) / 2.0;
  }
  double total = 0.0;
  for (int orientation = 0; orientation < 2; ++orientation) {
    const auto x = orientation == 0 ? a : b;
    const auto y = orientation == 0 ? b : a;
    const nlohmann::json reply = client_.post("", {{"text_a", x}, {"text_b", y}});
    {
      std::lock_guard lock(mutex_);
      ++requests_;
    }
    if (!reply.is_object() || !reply.contains("score")) {
      throw ProtocolError("equivalence reply has no score");
    }
    total += checked_score(reply["score"]);
  }
  return total / 2.0;
}

double RemoteClassifier::similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  const std::string key = pair_key(a, b);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const double s = score_once(a, b);
  std::lock_guard lock(mutex_);
  memo_.emplace(key, s);
  return s;
}

std::size_t RemoteClassifier::cache_size() const {
  std::lock_guard lock(mutex_);
  return memo_.size();
}

std::size_t RemoteClassifier::requests_sent() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace divcov::equiv
