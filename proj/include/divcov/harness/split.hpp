#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace divcov::harness {

enum class Part { kTrain, kVal, kTest };

std::string_view to_token(Part part);  // "train", "val", "test"

struct Split {
  std::uint64_t seed = 0;
  std::vector<double> fractions;
  // Each part keeps the input order of its queries.
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  const std::vector<std::string>& part(Part p) const;
  bool operator==(const Split&) const = default;
};

// Seeded permutation sliced by cumulative counts: val and test take
// floor(n * fraction), train takes the remainder.
Split split_dataset(const std::vector<std::string>& query_ids,
                    const std::vector<double>& fractions, std::uint64_t seed);

void write_split(const std::filesystem::path& path, const Split& split);
Split read_split(const std::filesystem::path& path);

}  // namespace divcov::harness
