#include "divcov/core/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "divcov/core/text.hpp"

namespace divcov {

ValidationReport validate_dataset(const std::vector<Query>& queries) {
  ValidationReport report;
  auto add = [&](const std::string& id, std::string msg) {
    report.violations.push_back(Violation{id, std::move(msg)});
  };

  std::map<std::string, int> id_counts;
  for (const Query& q : queries) ++id_counts[q.id];
  for (const auto& [id, count] : id_counts) {
    if (count > 1) add(id, "duplicate id");
  }

  for (const Query& q : queries) {
    if (q.id.empty()) add(q.id, "empty id");
    if (q.text.empty() || !text::is_valid_utf8(q.text)) add(q.id, "empty or invalid text");
    if (q.space == AnswerSpace::kFixedSet) {
      if (!q.gold_answers || q.gold_answers->empty()) {
        add(q.id, "missing gold set");
        continue;
      }
      std::set<std::string> seen;
      for (const std::string& g : *q.gold_answers) {
        const std::string norm = text::match_form(g);
        if (norm.empty()) add(q.id, "empty gold answer");
        else if (!seen.insert(norm).second) add(q.id, "duplicate gold answer: " + norm);
      }
    } else if (q.gold_answers) {
      add(q.id, "gold set on open-ended query");
    }
  }

  std::sort(report.violations.begin(), report.violations.end());
  // A duplicated id repeats its per-query violations once per copy.
  report.violations.erase(
      std::unique(report.violations.begin(), report.violations.end()),
      report.violations.end());
  return report;
}

}  // namespace divcov
