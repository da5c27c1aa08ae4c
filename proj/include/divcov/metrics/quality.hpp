#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/net/http_json.hpp"

namespace divcov::metrics {

enum class QualityKind { kFixedSetMatch, kRewardEndpoint, kConstant, kCustom };

std::string_view to_token(QualityKind kind);
QualityKind quality_kind_from_token(std::string_view token);

// Scores one answer in [0, q_max].
class QualityProvider {
 public:
  virtual ~QualityProvider() = default;
  virtual double quality(const Query& query, std::string_view answer) const = 0;
  // One score per answer, in input order.
  virtual std::vector<double> quality_batch(const Query& query,
                                            std::span<const std::string> answers) const;
  virtual double q_max() const = 0;
  virtual QualityKind kind() const = 0;
};

// 1 iff the normalised answer is a normalised member of the gold set A*.
class FixedSetMatch final : public QualityProvider {
 public:
  double quality(const Query& query, std::string_view answer) const override;
  std::vector<double> quality_batch(const Query& query,
                                    std::span<const std::string> answers) const override;
  double q_max() const override { return 1.0; }
  QualityKind kind() const override { return QualityKind::kFixedSetMatch; }
};

class ConstantQuality final : public QualityProvider {
 public:
  explicit ConstantQuality(double q_max = 10.0);
  double quality(const Query&, std::string_view) const override { return q_max_; }
  double q_max() const override { return q_max_; }
  QualityKind kind() const override { return QualityKind::kConstant; }

 private:
  double q_max_;
};

// Source of unmapped reward-model scores.
class RawRewardSource {
 public:
  virtual ~RawRewardSource() = default;
  virtual double raw_score(const Query& query, std::string_view answer) const = 0;
  virtual std::vector<double> raw_scores(const Query& query,
                                         std::span<const std::string> answers) const;
};

// Reward endpoint: POST {query, answer} -> {raw_score}; batch mode sends
// {pairs:[{query, answer}, ...]} and expects {raw_scores:[...]}.
class HttpRewardSource final : public RawRewardSource {
 public:
  HttpRewardSource(net::EndpointConfig endpoint, bool batch = false);
  double raw_score(const Query& query, std::string_view answer) const override;
  std::vector<double> raw_scores(const Query& query,
                                 std::span<const std::string> answers) const override;

 private:
  net::HttpJsonClient client_;
  bool batch_;
};

inline constexpr int kRewardThresholdCount = 9;

// Nine cut points evenly spaced strictly inside (lo, hi).
std::vector<double> even_thresholds(double lo, double hi);

// Step mapping of a raw reward to {1..10}: one plus the number of
// thresholds that are <= raw.
int map_reward(double raw, std::span<const double> thresholds);

// Reward-model quality on the 1..10 scale. Mapped scores are memoised per
// (query id, answer text).
class RewardEndpointQuality final : public QualityProvider {
 public:
  RewardEndpointQuality(std::shared_ptr<const RawRewardSource> source,
                        std::vector<double> thresholds, double q_max = 10.0);
  double quality(const Query& query, std::string_view answer) const override;
  std::vector<double> quality_batch(const Query& query,
                                    std::span<const std::string> answers) const override;
  double q_max() const override { return q_max_; }
  QualityKind kind() const override { return QualityKind::kRewardEndpoint; }
  const std::vector<double>& thresholds() const { return thresholds_; }

 private:
  std::shared_ptr<const RawRewardSource> source_;
  std::vector<double> thresholds_;
  double q_max_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

}  // namespace divcov::metrics
