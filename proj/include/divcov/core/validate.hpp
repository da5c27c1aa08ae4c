#pragma once

#include <string>
#include <vector>

#include "divcov/core/types.hpp"

namespace divcov {

struct Violation {
  std::string query_id;
  std::string message;

  bool operator==(const Violation&) const = default;
  auto operator<=>(const Violation&) const = default;
};

// Sorted by (query_id, message) so the report does not depend on input order.
struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_dataset(const std::vector<Query>& queries);

}  // namespace divcov
