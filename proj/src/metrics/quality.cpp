#include "divcov/metrics/quality.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "divcov/core/error.hpp"
#include "divcov/core/text.hpp"

namespace divcov::metrics {

std::string_view to_token(QualityKind kind) {
  switch (kind) {
    case QualityKind::kFixedSetMatch: return "fixed_set";
    case QualityKind::kRewardEndpoint: return "reward";
    case QualityKind::kConstant: return "constant";
    case QualityKind::kCustom: return "custom";
  }
  return "custom";
}

QualityKind quality_kind_from_token(std::string_view token) {
  for (auto kind : {QualityKind::kFixedSetMatch, QualityKind::kRewardEndpoint,
                    QualityKind::kConstant}) {
    if (to_token(kind) == token) return kind;
  }
  throw ContractError("unknown quality kind: " + std::string(token));
}

std::vector<double> QualityProvider::quality_batch(
    const Query& query, std::span<const std::string> answers) const {
  std::vector<double> out;
  out.reserve(answers.size());
  for (const std::string& a : answers) out.push_back(quality(query, a));
  return out;
}

namespace {

const std::vector<std::string>& require_gold(const Query& query) {
  if (query.space != AnswerSpace::kFixedSet || !query.gold_answers ||
      query.gold_answers->empty()) {
    throw ContractError("fixed-set quality needs a gold answer set (query " + query.id + ")");
  }
  return *query.gold_answers;
}

std::unordered_set<std::string> gold_forms(const Query& query) {
  std::unordered_set<std::string> forms;
  for (const std::string& g : require_gold(query)) forms.insert(text::match_form(g));
  return forms;
}

}  // namespace

double FixedSetMatch::quality(const Query& query, std::string_view answer) const {
  return gold_forms(query).count(text::match_form(answer)) ? 1.0 : 0.0;
}

std::vector<double> FixedSetMatch::quality_batch(
    const Query& query, std::span<const std::string> answers) const {
  const auto forms = gold_forms(query);
  std::vector<double> out;
  out.reserve(answers.size());
  for (const std::string& a : answers) {
    out.push_back(forms.count(text::match_form(a)) ? 1.0 : 0.0);
  }
  return out;
}

ConstantQuality::ConstantQuality(double q_max) : q_max_(q_max) {
  if (!(q_max > 0.0) || !std::isfinite(q_max)) throw ContractError("q_max must be > 0");
}

std::vector<double> RawRewardSource::raw_scores(
    const Query& query, std::span<const std::string> answers) const {
  std::vector<double> out;
  out.reserve(answers.size());
  for (const std::string& a : answers) out.push_back(raw_score(query, a));
  return out;
}

namespace {

double checked_raw(const nlohmann::json& v) {
  if (!v.is_number()) throw ProtocolError("raw_score is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ProtocolError("raw_score is not finite");
  return d;
}

}  // namespace

HttpRewardSource::HttpRewardSource(net::EndpointConfig endpoint, bool batch)
    : client_(std::move(endpoint)), batch_(batch) {}

double HttpRewardSource::raw_score(const Query& query, std::string_view answer) const {
  const nlohmann::json reply = client_.post("", {{"query", query.text}, {"answer", answer}});
  if (!reply.is_object() || !reply.contains("raw_score")) {
    throw ProtocolError("reward reply has no raw_score");
  }
  return checked_raw(reply["raw_score"]);
}

std::vector<double> HttpRewardSource::raw_scores(
    const Query& query, std::span<const std::string> answers) const {
  if (!batch_ || answers.empty()) return RawRewardSource::raw_scores(query, answers);
  nlohmann::json pairs = nlohmann::json::array();
  for (const std::string& a : answers) {
    pairs.push_back({{"query", query.text}, {"answer", a}});
  }
  const nlohmann::json reply = client_.post("", {{"pairs", pairs}});
  if (!reply.is_object() || !reply.contains("raw_scores") ||
      !reply["raw_scores"].is_array() || reply["raw_scores"].size() != answers.size()) {
    throw ProtocolError("batch reward reply must carry one raw score per answer");
  }
  std::vector<double> out;
  for (const auto& v : reply["raw_scores"]) out.push_back(checked_raw(v));
  return out;
}

std::vector<double> even_thresholds(double lo, double hi) {
  if (!(hi > lo)) throw ContractError("reward range must satisfy lo < hi");
  std::vector<double> t;
  for (int k = 1; k <= kRewardThresholdCount; ++k) {
    t.push_back(lo + (hi - lo) * k / (kRewardThresholdCount + 1));
  }
  return t;
}

int map_reward(double raw, std::span<const double> thresholds) {
  const auto below = std::upper_bound(thresholds.begin(), thresholds.end(), raw);
  return 1 + static_cast<int>(below - thresholds.begin());
}

RewardEndpointQuality::RewardEndpointQuality(std::shared_ptr<const RawRewardSource> source,
                                             std::vector<double> thresholds, double q_max)
    : source_(std::move(source)), thresholds_(std::move(thresholds)), q_max_(q_max) {
  if (thresholds_.size() != kRewardThresholdCount) {
    throw ContractError("reward mapping needs exactly 9 thresholds");
  }
  for (std::size_t i = 1; i < thresholds_.size(); ++i) {
    if (!(thresholds_[i] > thresholds_[i - 1])) {
      throw ContractError("reward thresholds must be strictly ascending");
    }
  }
  if (q_max_ < kRewardThresholdCount + 1) {
    throw ContractError("q_max must cover the mapped 1..10 scale");
  }
}

namespace {

std::string memo_key(const Query& q, std::string_view answer) {
  return std::to_string(q.id.size()) + ":" + q.id + std::string(answer);
}

}  // namespace

double RewardEndpointQuality::quality(const Query& query, std::string_view answer) const {
  const std::string key = memo_key(query, answer);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const double q = map_reward(source_->raw_score(query, answer), thresholds_);
  std::lock_guard lock(mutex_);
  memo_.emplace(key, q);
  return q;
}

std::vector<double> RewardEndpointQuality::quality_batch(
    const Query& query, std::span<const std::string> answers) const {
  std::vector<double> out(answers.size(), -1.0);
  std::vector<std::string> pending;
  std::vector<std::size_t> pending_index;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < answers.size(); ++i) {
      if (auto it = memo_.find(memo_key(query, answers[i])); it != memo_.end()) {
        out[i] = it->second;
      } else {
        pending.push_back(answers[i]);
        pending_index.push_back(i);
      }
    }
  }
  if (pending.empty()) return out;
  const std::vector<double> raw = source_->raw_scores(query, pending);
  std::lock_guard lock(mutex_);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const double q = map_reward(raw[k], thresholds_);
    out[pending_index[k]] = q;
    memo_.emplace(memo_key(query, pending[k]), q);
  }
  return out;
}

}  // namespace divcov::metrics
