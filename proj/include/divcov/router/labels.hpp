#pragma once

#include <string_view>
#include <vector>

#include "divcov/core/types.hpp"

namespace divcov::router {

enum class LabelMode { kOneHot, kSoft };

std::string_view to_token(LabelMode mode);  // "one_hot", "soft"
LabelMode label_mode_from_token(std::string_view token);

// One example per table query. Soft labels are div_cov / max (uniform when
// all scores are zero); one-hot labels mark the lowest-index argmax.
std::vector<RoutingExample> build_labels(const ScoreTable& table, LabelMode mode);

}  // namespace divcov::router
