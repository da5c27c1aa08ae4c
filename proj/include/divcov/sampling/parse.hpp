#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "divcov/sampling/prompts.hpp"

namespace divcov::sampling {

// Removes <think>...</think> spans. An unmatched closing tag drops everything
// before it; an unmatched opening tag drops everything after it.
std::string strip_think(std::string_view raw);

// Extracts answer texts from one generation. Never returns empty strings.
// With verbalized set, "(item, probability)" tuples in a curly list keep only
// the item. Returns an empty list when nothing can be extracted.
std::vector<std::string> parse_answers(std::string_view raw, OutputFormat format,
                                       bool verbalized = false);

}  // namespace divcov::sampling
