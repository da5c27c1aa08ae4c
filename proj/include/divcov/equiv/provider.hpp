#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "divcov/net/http_json.hpp"

namespace divcov::equiv {

class Embedder;

enum class EquivalenceKind {
  kExactMatch,
  kNormalizedMatch,
  kCosineThreshold,
  kRemoteClassifier,
  kCustom,
};

std::string_view to_token(EquivalenceKind kind);
EquivalenceKind equivalence_kind_from_token(std::string_view token);

inline constexpr double kDefaultTau = 0.5;

// Pairwise answer similarity in [0,1]: symmetric, with sim(a,a) == 1.
// Boolean kinds return exactly 0 or 1 and form an equivalence relation.
class EquivalenceProvider {
 public:
  virtual ~EquivalenceProvider() = default;
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
  virtual EquivalenceKind kind() const = 0;

  bool is_boolean() const {
    return kind() == EquivalenceKind::kExactMatch ||
           kind() == EquivalenceKind::kNormalizedMatch;
  }
};

// Lowercased, NFC, whitespace-collapsed, trimmed, terminal punctuation
// stripped: "  The  CAT. " -> "the cat".
std::string normalize_text(std::string_view s);

class ExactMatch final : public EquivalenceProvider {
 public:
  double similarity(std::string_view a, std::string_view b) const override {
    return a == b ? 1.0 : 0.0;
  }
  EquivalenceKind kind() const override { return EquivalenceKind::kExactMatch; }
};

class NormalizedMatch final : public EquivalenceProvider {
 public:
  double similarity(std::string_view a, std::string_view b) const override;
  EquivalenceKind kind() const override { return EquivalenceKind::kNormalizedMatch; }
};

// (cos(e_a, e_b) + 1) / 2 over embeddings from the given embedder.
class CosineThreshold final : public EquivalenceProvider {
 public:
  explicit CosineThreshold(std::shared_ptr<const Embedder> embedder)
      : embedder_(std::move(embedder)) {}
  double similarity(std::string_view a, std::string_view b) const override;
  EquivalenceKind kind() const override { return EquivalenceKind::kCosineThreshold; }

 private:
  std::shared_ptr<const Embedder> embedder_;
};

// Scores pairs through an HTTP classifier:
//   POST {text_a, text_b} -> {score}
//   POST {pairs:[{text_a, text_b}, ...]} -> {scores:[...]}   (batch mode)
// The returned similarity is the mean of both orientations, memoised per
// unordered pair for the lifetime of the provider.
class RemoteClassifier final : public EquivalenceProvider {
 public:
  RemoteClassifier(net::EndpointConfig endpoint, bool batch = false);

  double similarity(std::string_view a, std::string_view b) const override;
  EquivalenceKind kind() const override { return EquivalenceKind::kRemoteClassifier; }

  std::size_t cache_size() const;
  std::size_t requests_sent() const;

 private:
  double score_once(std::string_view a, std::string_view b) const;

  net::HttpJsonClient client_;
  bool batch_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, double> memo_;
  mutable std::size_t requests_ = 0;
};

}  // namespace divcov::equiv
