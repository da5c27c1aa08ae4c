#include "divcov/harness/split.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "divcov/core/error.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/core/serialize.hpp"

namespace divcov::harness {

std::string_view to_token(Part part) {
  switch (part) {
    case Part::kTrain: return "train";
    case Part::kVal: return "val";
    case Part::kTest: return "test";
  }
  return "?";
}

const std::vector<std::string>& Split::part(Part p) const {
  switch (p) {
    case Part::kTrain: return train;
    case Part::kVal: return val;
    case Part::kTest: return test;
  }
  return train;
}

Split split_dataset(const std::vector<std::string>& query_ids,
                    const std::vector<double>& fractions, std::uint64_t seed) {
  if (fractions.size() != 3) throw ContractError("split needs three fractions");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ContractError("split fractions must be >= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("split fractions must sum to 1");
  if (query_ids.size() < fractions.size()) {
    throw ContractError("split needs at least " + std::to_string(fractions.size()) +
                        " queries, got " + std::to_string(query_ids.size()));
  }
  std::unordered_set<std::string> seen;
  for (const std::string& q : query_ids) {
    if (!seen.insert(q).second) throw ContractError("duplicate query id in split: " + q);
  }
  const auto n = static_cast<double>(query_ids.size());
  const auto n_val = static_cast<std::size_t>(std::floor(n * fractions[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * fractions[2] + 1e-9));
  const std::size_t n_train = query_ids.size() - n_val - n_test;

  std::vector<std::size_t> perm(query_ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  shuffle(perm, rng);
  std::vector<Part> assign(query_ids.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    assign[perm[i]] = i < n_train ? Part::kTrain : i < n_train + n_val ? Part::kVal : Part::kTest;
  }
  Split split;
  split.seed = seed;
  split.fractions = fractions;
  for (std::size_t i = 0; i < query_ids.size(); ++i) {
    switch (assign[i]) {
      case Part::kTrain: split.train.push_back(query_ids[i]); break;
      case Part::kVal: split.val.push_back(query_ids[i]); break;
      case Part::kTest: split.test.push_back(query_ids[i]); break;
    }
  }
  return split;
}

void write_split(const std::filesystem::path& path, const Split& split) {
  const Json doc = {{"seed", split.seed},
                    {"fractions", split.fractions},
                    {"train", split.train},
                    {"val", split.val},
                    {"test", split.test}};
  write_text_atomic(path, doc.dump() + "\n");
}

Split read_split(const std::filesystem::path& path) {
  std::string content;
  for (const std::string& line : read_lines(path)) content += line;
  const Json doc = parse_json(content);
  FieldReader r(doc, path.string());
  Split split;
  const std::int64_t seed = r.integer("seed");
  if (seed < 0) throw_field_error("seed must be >= 0", r.child_path("seed"));
  split.seed = static_cast<std::uint64_t>(seed);
  try {
    split.fractions = r.require("fractions").get<std::vector<double>>();
    split.train = r.require("train").get<std::vector<std::string>>();
    split.val = r.require("val").get<std::vector<std::string>>();
    split.test = r.require("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("malformed split file " + path.string() + ": " + e.what());
  }
  r.finish();
  std::unordered_set<std::string> seen;
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (const std::string& q : *part) {
      if (!seen.insert(q).second) throw ContractError("query in two split parts: " + q);
    }
  }
  return split;
}

}  // namespace divcov::harness
