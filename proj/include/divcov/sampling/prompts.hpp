#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "divcov/core/types.hpp"

namespace divcov::sampling {

enum class OutputFormat { kCurlyList, kAnswerIdJson, kResponseTags };

std::string_view to_token(OutputFormat format);

struct PromptTemplate {
  PromptKind kind = PromptKind::kGAll;
  std::optional<std::string> system;  // system message, system-prompt variants only
  std::string body;                   // user message
  OutputFormat expected_format = OutputFormat::kCurlyList;
  bool verbalized = false;            // answers carry a probability field

  bool operator==(const PromptTemplate&) const = default;
};

// Noun used in the fixed-set format instructions, e.g. "day" / "days".
struct ItemNoun {
  std::string singular = "answer";
  std::string plural = "answers";
};

OutputFormat format_for(AnswerSpace space, PromptKind kind);

// Renders the template for (query.space, kind) with the query text in place.
PromptTemplate render_prompt(const Query& query, PromptKind kind,
                             const ItemNoun& noun = {});

}  // namespace divcov::sampling
