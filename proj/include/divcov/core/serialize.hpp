#pragma once

// Canonical JSON encoding for the core types. Keys are emitted in
// lexicographic order, one compact object per record; unknown fields are
// rejected on decode. ndjson files hold one record per LF-terminated line.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "divcov/core/types.hpp"

namespace divcov {

using Json = nlohmann::json;

// Strict object reader that records the path of the field being decoded.
class FieldReader {
 public:
  FieldReader(const Json& object, std::string path);

  const Json& require(std::string_view key);
  const Json* optional(std::string_view key);

  std::string string(std::string_view key);
  double number(std::string_view key);
  std::int64_t integer(std::string_view key);
  bool boolean(std::string_view key);

  std::string child_path(std::string_view key) const;
  const std::string& path() const { return path_; }

  // Throws if the object has keys that were never read.
  void finish() const;

 private:
  const Json& object_;
  std::string path_;
  std::vector<std::string> consumed_;
};

[[noreturn]] void throw_field_error(const std::string& what, const std::string& path);

double json_number(const Json& v, const std::string& path);
std::int64_t json_integer(const Json& v, const std::string& path);
std::string json_string(const Json& v, const std::string& path);

template <typename T>
struct Codec;  // specialised in serialize.cpp for every core type

template <typename T>
Json to_json_value(const T& value);

template <typename T>
T from_json_value(const Json& value, const std::string& path = "");

// Canonical byte form of one record (no trailing newline).
template <typename T>
std::string serialize(const T& value) {
  return to_json_value(value).dump();
}

// Parses one record; ParseError carries byte offset and field path.
template <typename T>
T deserialize(std::string_view bytes);

Json parse_json(std::string_view bytes);

// Whole-file helpers. Lines are LF-terminated; blank lines are not allowed.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

template <typename T>
std::vector<T> read_ndjson(const std::filesystem::path& path);

template <typename T>
void write_ndjson(const std::filesystem::path& path, const std::vector<T>& records);

// scores.ndjson: a grid header line followed by one ScoreRow per cell.
// Reading rejects tables that are incomplete over their declared grid.
struct ScoreFile {
  ScoreTable table;
  std::vector<ScoreRow> rows;  // includes answers_sha when recorded
};
std::string serialize_score_table(const ScoreTable& table,
                                  const std::vector<ScoreRow>& rows_with_sha = {});
ScoreFile parse_score_table(std::string_view content, bool require_complete = true);
void write_score_table(const std::filesystem::path& path, const ScoreTable& table,
                       const std::vector<ScoreRow>& rows_with_sha = {});
ScoreFile read_score_table(const std::filesystem::path& path,
                           bool require_complete = true);

// plan.ndjson rows {query_id, sources:[{count, model}]}.
void write_plan(const std::filesystem::path& path, const EnsemblePlan& plan);
EnsemblePlan read_plan(const std::filesystem::path& path);

}  // namespace divcov
