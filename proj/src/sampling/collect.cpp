#include "divcov/sampling/collect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "divcov/sampling/parse.hpp"

namespace divcov::sampling {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string shortfall_message(const SamplingRun& run) {
  return "collected " + std::to_string(run.parsed.size()) + " of " +
         std::to_string(run.config.target_n) + " answers for query " + run.query_id +
         " / model " + run.model.name + " after " + std::to_string(run.generations()) +
         " requests";
}

}  // namespace

AnswerSet SamplingRun::to_answer_set() const {
  AnswerSet set;
  set.query_id = query_id;
  set.model = model;
  set.prompt_kind = kind;
  set.answers = parsed;
  set.budget = static_cast<int>(parsed.size());
  return set;
}

ShortfallError::ShortfallError(SamplingRun partial)
    : Error(ExitCode::kEndpoint, shortfall_message(partial)), partial_(std::move(partial)) {}

int prior_answers_per_call(PromptKind kind) {
  switch (kind) {
    case PromptKind::kG1: return 1;
    case PromptKind::kG2: return 2;
    default: return 10;
  }
}

int default_max_attempts(PromptKind kind, int target_n) {
  const int prior = prior_answers_per_call(kind);
  return std::max(1, (20 * target_n + prior - 1) / prior);
}

SamplingRun collect_answers(const Query& query, const ModelId& model, PromptKind kind,
                            const DecodingConfig& config, const ChatEndpoint& endpoint,
                            const CollectOptions& options) {
  config.validate();
  if (options.max_inflight < 1) throw ContractError("max_inflight must be >= 1");
  const int max_attempts =
      options.max_attempts.value_or(default_max_attempts(kind, config.target_n));
  if (max_attempts < 1) throw ContractError("max_attempts must be >= 1");

  const PromptTemplate prompt = render_prompt(query, kind, options.noun);
  ChatRequest base;
  base.model = model.name;
  if (prompt.system) base.messages.push_back({"system", *prompt.system});
  base.messages.push_back({"user", prompt.body});
  base.temperature = config.temperature;
  base.top_p = config.top_p;
  base.max_tokens = config.max_tokens;

  SamplingRun run;
  run.query_id = query.id;
  run.model = model;
  run.kind = kind;
  run.config = config;

  const int target = config.target_n;
  std::vector<std::string> texts;
  double per_call = prior_answers_per_call(kind);
  while (static_cast<int>(texts.size()) < target && run.generations() < max_attempts) {
    const int remaining = target - static_cast<int>(texts.size());
    const int wanted = static_cast<int>(std::ceil(remaining / std::max(per_call, 1.0)));
    const int wave = std::min({options.max_inflight, std::max(wanted, 1),
                               max_attempts - run.generations()});

    const auto request_start = Clock::now();
    std::vector<std::future<std::string>> pending;
    pending.reserve(wave);
    for (int k = 0; k < wave; ++k) {
      ChatRequest req = base;
      req.seed = config.seed + run.generations() + k;
      if (wave == 1) {
        std::promise<std::string> done;
        try {
          done.set_value(endpoint.complete(req));
        } catch (...) {
          done.set_exception(std::current_exception());
        }
        pending.push_back(done.get_future());
      } else {
        pending.push_back(std::async(std::launch::async, [&endpoint, req = std::move(req)] {
          return endpoint.complete(req);
        }));
      }
    }
    std::vector<std::string> replies;
    replies.reserve(wave);
    std::exception_ptr failure;
    for (auto& f : pending) {
      try {
        replies.push_back(f.get());
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    run.request_ms += ms_since(request_start);
    if (failure) std::rethrow_exception(failure);

    const auto parse_start = Clock::now();
    for (std::string& reply : replies) {
      auto answers = parse_answers(reply, prompt.expected_format, prompt.verbalized);
      if (answers.empty()) ++run.failed_parses;
      for (auto& a : answers) texts.push_back(std::move(a));
      run.raw_generations.push_back(std::move(reply));
    }
    run.parse_ms += ms_since(parse_start);
    per_call = static_cast<double>(texts.size()) / run.generations();
  }

  const std::size_t keep = std::min<std::size_t>(texts.size(), target);
  for (std::size_t i = 0; i < keep; ++i) {
    Answer a;
    a.text = std::move(texts[i]);
    a.position = static_cast<int>(i);
    a.model = model;
    a.prompt_kind = kind;
    run.parsed.push_back(std::move(a));
  }
  if (static_cast<int>(run.parsed.size()) < target) throw ShortfallError(std::move(run));
  return run;
}

}  // namespace divcov::sampling
