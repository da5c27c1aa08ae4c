#include "divcov/core/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "divcov/core/error.hpp"

namespace divcov {

// ---------------------------------------------------------------------------
// FieldReader

FieldReader::FieldReader(const Json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw_field_error("expected object", path_);
}

std::string FieldReader::child_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

const Json* FieldReader::optional(std::string_view key) {
  auto it = object_.find(std::string(key));
  if (it == object_.end()) return nullptr;
  consumed_.emplace_back(key);
  if (it->is_null()) return nullptr;
  return &*it;
}

const Json& FieldReader::require(std::string_view key) {
  const Json* v = optional(key);
  if (!v) throw_field_error("missing required field", child_path(key));
  return *v;
}

std::string FieldReader::string(std::string_view key) {
  return json_string(require(key), child_path(key));
}

double FieldReader::number(std::string_view key) {
  return json_number(require(key), child_path(key));
}

std::int64_t FieldReader::integer(std::string_view key) {
  return json_integer(require(key), child_path(key));
}

bool FieldReader::boolean(std::string_view key) {
  const Json& v = require(key);
  if (!v.is_boolean()) throw_field_error("expected boolean", child_path(key));
  return v.get<bool>();
}

void FieldReader::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (std::find(consumed_.begin(), consumed_.end(), it.key()) == consumed_.end()) {
      throw_field_error("unknown field", child_path(it.key()));
    }
  }
}

void throw_field_error(const std::string& what, const std::string& path) {
  throw ParseError(what, 0, path);
}

double json_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw_field_error("expected number", path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw_field_error("non-finite number", path);
  return d;
}

std::int64_t json_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw_field_error("expected integer", path);
  return v.get<std::int64_t>();
}

std::string json_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw_field_error("expected string", path);
  return v.get<std::string>();
}

namespace {

int to_int(std::int64_t v, const std::string& path) {
  if (v < INT32_MIN || v > INT32_MAX) throw_field_error("integer out of range", path);
  return static_cast<int>(v);
}

template <typename T>
std::vector<T> decode_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw_field_error("expected array", path);
  std::vector<T> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(from_json_value<T>(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename T>
Json encode_array(const std::vector<T>& values) {
  Json arr = Json::array();
  for (const T& v : values) arr.push_back(to_json_value(v));
  return arr;
}

// Rethrows a validation failure as a ParseError at the given path.
template <typename F>
void validated(F&& check, const std::string& path) {
  try {
    check();
  } catch (const ParseError&) {
    throw;
  } catch (const ContractError& e) {
    throw ParseError(e.what(), 0, path);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Codecs

template <>
struct Codec<double> {
  static Json encode(double v) { return v; }
  static double decode(const Json& v, const std::string& path) {
    return json_number(v, path);
  }
};

template <>
struct Codec<std::string> {
  static Json encode(const std::string& v) { return v; }
  static std::string decode(const Json& v, const std::string& path) {
    return json_string(v, path);
  }
};

template <>
struct Codec<ModelId> {
  static Json encode(const ModelId& m) {
    return Json{{"name", m.name}, {"pool_index", m.pool_index}};
  }
  static ModelId decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    ModelId m;
    m.name = r.string("name");
    m.pool_index = to_int(r.integer("pool_index"), r.child_path("pool_index"));
    r.finish();
    if (m.name.empty()) throw_field_error("model name is empty", r.child_path("name"));
    if (m.pool_index < 0) throw_field_error("negative pool_index", r.child_path("pool_index"));
    return m;
  }
};

template <>
struct Codec<Query> {
  static Json encode(const Query& q) {
    Json j{{"id", q.id},
           {"text", q.text},
           {"space", std::string(to_token(q.space))},
           {"dataset_tag", q.dataset_tag}};
    if (q.gold_answers) j["gold_answers"] = *q.gold_answers;
    return j;
  }
  static Query decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    Query q;
    q.id = r.string("id");
    q.text = r.string("text");
    const std::string space = r.string("space");
    validated([&] { q.space = answer_space_from_token(space); }, r.child_path("space"));
    q.dataset_tag = r.string("dataset_tag");
    if (const Json* gold = r.optional("gold_answers")) {
      q.gold_answers = decode_array<std::string>(*gold, r.child_path("gold_answers"));
    }
    r.finish();
    return q;
  }
};

template <>
struct Codec<Answer> {
  static Json encode(const Answer& a) {
    Json j{{"text", a.text},
           {"position", a.position},
           {"model", Codec<ModelId>::encode(a.model)},
           {"prompt_kind", std::string(to_token(a.prompt_kind))}};
    if (a.quality) j["quality"] = *a.quality;
    return j;
  }
  static Answer decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    Answer a;
    a.text = r.string("text");
    a.position = to_int(r.integer("position"), r.child_path("position"));
    a.model = Codec<ModelId>::decode(r.require("model"), r.child_path("model"));
    const std::string kind = r.string("prompt_kind");
    validated([&] { a.prompt_kind = prompt_kind_from_token(kind); },
              r.child_path("prompt_kind"));
    if (const Json* q = r.optional("quality")) a.quality = json_number(*q, r.child_path("quality"));
    r.finish();
    return a;
  }
};

// Answers inside a set omit the model and prompt kind they share with it.
template <>
struct Codec<AnswerSet> {
  static Json encode(const AnswerSet& s) {
    Json answers = Json::array();
    for (const Answer& a : s.answers) {
      Json j{{"text", a.text}, {"position", a.position}};
      if (a.quality) j["quality"] = *a.quality;
      answers.push_back(std::move(j));
    }
    return Json{{"query_id", s.query_id},
                {"model", Codec<ModelId>::encode(s.model)},
                {"prompt_kind", std::string(to_token(s.prompt_kind))},
                {"budget", s.budget},
                {"answers", std::move(answers)}};
  }
  static AnswerSet decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    AnswerSet s;
    s.query_id = r.string("query_id");
    s.model = Codec<ModelId>::decode(r.require("model"), r.child_path("model"));
    const std::string kind = r.string("prompt_kind");
    validated([&] { s.prompt_kind = prompt_kind_from_token(kind); },
              r.child_path("prompt_kind"));
    s.budget = to_int(r.integer("budget"), r.child_path("budget"));
    const Json& answers = r.require("answers");
    const std::string apath = r.child_path("answers");
    if (!answers.is_array()) throw_field_error("expected array", apath);
    for (std::size_t i = 0; i < answers.size(); ++i) {
      FieldReader ar(answers[i], apath + "[" + std::to_string(i) + "]");
      Answer a;
      a.text = ar.string("text");
      a.position = to_int(ar.integer("position"), ar.child_path("position"));
      if (const Json* q = ar.optional("quality")) {
        a.quality = json_number(*q, ar.child_path("quality"));
      }
      ar.finish();
      a.model = s.model;
      a.prompt_kind = s.prompt_kind;
      s.answers.push_back(std::move(a));
    }
    r.finish();
    validated([&] { s.validate(); }, path);
    return s;
  }
};

template <>
struct Codec<MetricRecord> {
  static Json encode(const MetricRecord& m) {
    return Json{{"div_cov", m.div_cov},
                {"n_unique", m.n_unique},
                {"qual", m.qual},
                {"unq_qual", m.unq_qual}};
  }
  static MetricRecord decode_fields(FieldReader& r) {
    MetricRecord m;
    m.div_cov = r.number("div_cov");
    m.n_unique = to_int(r.integer("n_unique"), r.child_path("n_unique"));
    m.qual = r.number("qual");
    m.unq_qual = r.number("unq_qual");
    if (m.div_cov < 0.0 || m.div_cov > 1.0) {
      throw_field_error("div_cov outside [0,1]", r.child_path("div_cov"));
    }
    if (m.n_unique < 0) throw_field_error("negative n_unique", r.child_path("n_unique"));
    return m;
  }
  static MetricRecord decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    MetricRecord m = decode_fields(r);
    r.finish();
    return m;
  }
};

template <>
struct Codec<ScoreRow> {
  static Json encode(const ScoreRow& row) {
    Json j = Codec<MetricRecord>::encode(row.record);
    j["query_id"] = row.query_id;
    j["model"] = Codec<ModelId>::encode(row.model);
    if (row.answers_sha) j["answers_sha"] = *row.answers_sha;
    return j;
  }
  static ScoreRow decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    ScoreRow row;
    row.query_id = r.string("query_id");
    row.model = Codec<ModelId>::decode(r.require("model"), r.child_path("model"));
    row.record = Codec<MetricRecord>::decode_fields(r);
    if (const Json* sha = r.optional("answers_sha")) {
      row.answers_sha = json_string(*sha, r.child_path("answers_sha"));
    }
    r.finish();
    return row;
  }
};

template <>
struct Codec<RoutingExample> {
  static Json encode(const RoutingExample& e) {
    return Json{{"query_id", e.query_id},
                {"oracle_index", e.oracle_index},
                {"soft_labels", e.soft_labels},
                {"raw_scores", e.raw_scores}};
  }
  static RoutingExample decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    RoutingExample e;
    e.query_id = r.string("query_id");
    e.oracle_index = to_int(r.integer("oracle_index"), r.child_path("oracle_index"));
    e.soft_labels = decode_array<double>(r.require("soft_labels"), r.child_path("soft_labels"));
    e.raw_scores = decode_array<double>(r.require("raw_scores"), r.child_path("raw_scores"));
    r.finish();
    if (e.soft_labels.size() != e.raw_scores.size() ||
        e.oracle_index < 0 ||
        e.oracle_index >= static_cast<int>(e.soft_labels.size())) {
      throw_field_error("inconsistent routing example", path);
    }
    return e;
  }
};

template <>
struct Codec<Allocation> {
  static Json encode(const Allocation& a) {
    return Json{{"model", Codec<ModelId>::encode(a.model)}, {"count", a.count}};
  }
  static Allocation decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    Allocation a;
    a.model = Codec<ModelId>::decode(r.require("model"), r.child_path("model"));
    a.count = to_int(r.integer("count"), r.child_path("count"));
    r.finish();
    if (a.count < 0) throw_field_error("negative count", r.child_path("count"));
    return a;
  }
};

template <>
struct Codec<PlanRow> {
  static Json encode(const PlanRow& row) {
    return Json{{"query_id", row.query_id}, {"sources", encode_array(row.sources)}};
  }
  static PlanRow decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    PlanRow row;
    row.query_id = r.string("query_id");
    row.sources = decode_array<Allocation>(r.require("sources"), r.child_path("sources"));
    r.finish();
    return row;
  }
};

template <>
struct Codec<DecodingConfig> {
  static Json encode(const DecodingConfig& c) {
    return Json{{"temperature", c.temperature},
                {"top_p", c.top_p},
                {"max_tokens", c.max_tokens},
                {"target_n", c.target_n},
                {"seed", c.seed}};
  }
  static DecodingConfig decode(const Json& v, const std::string& path) {
    FieldReader r(v, path);
    DecodingConfig c;
    if (const Json* t = r.optional("temperature")) c.temperature = json_number(*t, r.child_path("temperature"));
    if (const Json* t = r.optional("top_p")) c.top_p = json_number(*t, r.child_path("top_p"));
    if (const Json* t = r.optional("max_tokens")) c.max_tokens = to_int(json_integer(*t, r.child_path("max_tokens")), r.child_path("max_tokens"));
    if (const Json* t = r.optional("target_n")) c.target_n = to_int(json_integer(*t, r.child_path("target_n")), r.child_path("target_n"));
    if (const Json* t = r.optional("seed")) c.seed = json_integer(*t, r.child_path("seed"));
    r.finish();
    validated([&] { c.validate(); }, path);
    return c;
  }
};

template <typename T>
Json to_json_value(const T& value) {
  return Codec<T>::encode(value);
}

template <typename T>
T from_json_value(const Json& value, const std::string& path) {
  return Codec<T>::decode(value, path);
}

Json parse_json(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    // nlohmann reports a 1-based position of the offending byte.
    throw ParseError("malformed JSON", e.byte > 0 ? e.byte - 1 : 0, "");
  }
}

template <typename T>
T deserialize(std::string_view bytes) {
  return from_json_value<T>(parse_json(bytes), "");
}

#define DIVCOV_INSTANTIATE(T)                                  \
  template Json to_json_value<T>(const T&);                    \
  template T from_json_value<T>(const Json&, const std::string&); \
  template T deserialize<T>(std::string_view);

DIVCOV_INSTANTIATE(ModelId)
DIVCOV_INSTANTIATE(Query)
DIVCOV_INSTANTIATE(Answer)
DIVCOV_INSTANTIATE(AnswerSet)
DIVCOV_INSTANTIATE(MetricRecord)
DIVCOV_INSTANTIATE(ScoreRow)
DIVCOV_INSTANTIATE(RoutingExample)
DIVCOV_INSTANTIATE(Allocation)
DIVCOV_INSTANTIATE(PlanRow)
DIVCOV_INSTANTIATE(DecodingConfig)
#undef DIVCOV_INSTANTIATE

// ---------------------------------------------------------------------------
// Files

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IncompleteError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContractError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ContractError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

template <typename F>
auto with_line_context(const std::filesystem::path& path, std::size_t line_no,
                       std::size_t line_offset, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                         ": " + e.what(),
                     line_offset + e.byte_offset(), e.field_path());
  }
}

}  // namespace

template <typename T>
std::vector<T> read_ndjson(const std::filesystem::path& path) {
  std::vector<T> out;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    out.push_back(with_line_context(path, line_no, offset,
                                    [&] { return deserialize<T>(line); }));
    offset += line.size() + 1;
  }
  return out;
}

template <typename T>
void write_ndjson(const std::filesystem::path& path, const std::vector<T>& records) {
  std::string content;
  for (const T& r : records) {
    content += serialize(r);
    content += '\n';
  }
  write_text_atomic(path, content);
}

#define DIVCOV_INSTANTIATE_FILE(T)                                        \
  template std::vector<T> read_ndjson<T>(const std::filesystem::path&); \
  template void write_ndjson<T>(const std::filesystem::path&, const std::vector<T>&);

DIVCOV_INSTANTIATE_FILE(Query)
DIVCOV_INSTANTIATE_FILE(AnswerSet)
DIVCOV_INSTANTIATE_FILE(ScoreRow)
DIVCOV_INSTANTIATE_FILE(RoutingExample)
DIVCOV_INSTANTIATE_FILE(PlanRow)
#undef DIVCOV_INSTANTIATE_FILE

std::string serialize_score_table(const ScoreTable& table,
                                  const std::vector<ScoreRow>& rows_with_sha) {
  Json pool = Json::array();
  for (const ModelId& m : table.pool()) pool.push_back(to_json_value(m));
  Json header{{"grid",
               Json{{"budget", table.budget()},
                    {"pool", std::move(pool)},
                    {"prompt_kind", std::string(to_token(table.prompt_kind()))},
                    {"queries", table.query_ids()}}}};
  std::string out = header.dump() + "\n";
  std::map<std::pair<std::string, int>, std::optional<std::string>> shas;
  for (const ScoreRow& r : rows_with_sha) shas[{r.query_id, r.model.pool_index}] = r.answers_sha;
  auto sha_for = [&](const std::string& qid, int m) -> std::optional<std::string> {
    auto it = shas.find({qid, m});
    return it == shas.end() ? std::nullopt : it->second;
  };
  for (const std::string& qid : table.query_ids()) {
    for (const ModelId& m : table.pool()) {
      if (!table.has(qid, m.pool_index)) continue;
      ScoreRow row{qid, m, table.at(qid, m.pool_index), sha_for(qid, m.pool_index)};
      out += serialize(row) + "\n";
    }
  }
  return out;
}

ScoreFile parse_score_table(std::string_view content, bool require_complete) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) throw ParseError("empty score table", 0, "grid");
  const Json header = parse_json(lines[0]);
  FieldReader hr(header, "");
  FieldReader grid(hr.require("grid"), "grid");
  const int budget = to_int(grid.integer("budget"), grid.child_path("budget"));
  const ModelPool pool = decode_array<ModelId>(grid.require("pool"), grid.child_path("pool"));
  const std::string kind_token = grid.string("prompt_kind");
  PromptKind kind{};
  validated([&] { kind = prompt_kind_from_token(kind_token); }, grid.child_path("prompt_kind"));
  const auto queries =
      decode_array<std::string>(grid.require("queries"), grid.child_path("queries"));
  grid.finish();
  hr.finish();

  ScoreFile file;
  validated([&] { file.table = ScoreTable(queries, pool, budget, kind); }, "grid");
  std::size_t offset = lines[0].size() + 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    ScoreRow row;
    try {
      row = deserialize<ScoreRow>(lines[i]);
    } catch (const ParseError& e) {
      throw ParseError("scores line " + std::to_string(i + 1) + ": " + e.what(),
                       offset + e.byte_offset(), e.field_path());
    }
    const std::string path = "line " + std::to_string(i + 1);
    if (!file.table.contains_query(row.query_id)) {
      throw ParseError("row for undeclared query " + row.query_id, offset, path);
    }
    if (row.model.pool_index >= static_cast<int>(pool.size()) ||
        !(pool[static_cast<std::size_t>(row.model.pool_index)] == row.model)) {
      throw ParseError("row for undeclared model " + row.model.name, offset, path);
    }
    if (file.table.has(row.query_id, row.model.pool_index)) {
      throw ParseError("duplicate row (" + row.query_id + ", " + row.model.name + ")",
                       offset, path);
    }
    validated([&] { file.table.set(row.query_id, row.model.pool_index, row.record); }, path);
    file.rows.push_back(std::move(row));
    offset += lines[i].size() + 1;
  }
  if (require_complete) file.table.require_complete();
  return file;
}

void write_score_table(const std::filesystem::path& path, const ScoreTable& table,
                       const std::vector<ScoreRow>& rows_with_sha) {
  write_text_atomic(path, serialize_score_table(table, rows_with_sha));
}

ScoreFile read_score_table(const std::filesystem::path& path, bool require_complete) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IncompleteError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score_table(buf.str(), require_complete);
}

void write_plan(const std::filesystem::path& path, const EnsemblePlan& plan) {
  plan.validate();
  write_ndjson(path, plan.rows);
}

EnsemblePlan read_plan(const std::filesystem::path& path) {
  EnsemblePlan plan;
  plan.rows = read_ndjson<PlanRow>(path);
  if (!plan.rows.empty()) plan.budget = plan.rows.front().total();
  plan.validate();
  return plan;
}

}  // namespace divcov
