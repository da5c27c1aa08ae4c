#include "divcov/harness/store.hpp"

#include <fstream>
#include <sstream>

#include "divcov/core/error.hpp"
#include "divcov/core/hash.hpp"
#include "divcov/core/serialize.hpp"

namespace divcov::harness {

namespace {

// Complete lines only; bytes after the last LF are a torn write.
std::vector<std::string> complete_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) return lines;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  std::size_t start = 0;
  while (true) {
    const std::size_t end = content.find('\n', start);
    if (end == std::string::npos) break;
    if (end > start) lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ContractError("cannot append to " + path.string());
  out << line << '\n';
  out.flush();
  if (!out) throw ContractError("write failed: " + path.string());
}

}  // namespace

AnswerStore::AnswerStore(const std::filesystem::path& run_dir, std::string sampling_hash,
                         ModelPool pool)
    : file_(run_dir / "answers" / sampling_hash / "answers.ndjson"), pool_(std::move(pool)) {
  for (const ModelId& m : pool_) index_by_name_[m.name] = m.pool_index;
  const auto lines = complete_lines(file_);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    AnswerSet set;
    try {
      set = deserialize<AnswerSet>(lines[i]);
    } catch (const ParseError& e) {
      throw ContractError(file_.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    auto it = index_by_name_.find(set.model.name);
    if (it == index_by_name_.end()) continue;
    set.model.pool_index = it->second;
    for (Answer& a : set.answers) a.model.pool_index = it->second;
    auto key = std::make_pair(set.query_id, it->second);
    sets_.insert_or_assign(std::move(key), Entry{std::move(set), sha256_hex(lines[i])});
  }
}

bool AnswerStore::has(const std::string& query_id, int pool_index) const {
  std::shared_lock lock(mutex_);
  return sets_.count({query_id, pool_index}) > 0;
}

const AnswerSet& AnswerStore::get(const std::string& query_id, int pool_index) const {
  std::shared_lock lock(mutex_);
  auto it = sets_.find({query_id, pool_index});
  if (it == sets_.end()) {
    const std::string name = pool_index >= 0 && pool_index < static_cast<int>(pool_.size())
                                 ? pool_[pool_index].name
                                 : std::to_string(pool_index);
    throw IncompleteError("no stored answers for query " + query_id + " / model " + name);
  }
  return it->second.set;
}

void AnswerStore::put(AnswerSet set) {
  set.validate();
  auto it = index_by_name_.find(set.model.name);
  if (it == index_by_name_.end() || it->second != set.model.pool_index) {
    throw ContractError("answer set model " + set.model.name + " is not in the pool");
  }
  const std::string line = serialize(set);
  std::unique_lock lock(mutex_);
  append_line(file_, line);
  auto key = std::make_pair(set.query_id, set.model.pool_index);
  sets_.insert_or_assign(std::move(key), Entry{std::move(set), sha256_hex(line)});
}

std::optional<std::string> AnswerStore::sha(const std::string& query_id, int pool_index) const {
  std::shared_lock lock(mutex_);
  auto it = sets_.find({query_id, pool_index});
  if (it == sets_.end()) return std::nullopt;
  return it->second.sha;
}

std::size_t AnswerStore::size() const {
  std::shared_lock lock(mutex_);
  return sets_.size();
}

TimingLog::TimingLog(std::filesystem::path file) : file_(std::move(file)) {}

void TimingLog::record(const TimingEntry& e) {
  const Json row = {{"phase", e.phase}, {"query_id", e.query_id}, {"model", e.model}, {"ms", e.ms}};
  std::lock_guard lock(mutex_);
  append_line(file_, row.dump());
}

std::vector<TimingEntry> read_timing(const std::filesystem::path& file) {
  std::vector<TimingEntry> out;
  for (const std::string& line : complete_lines(file)) {
    const Json j = parse_json(line);
    FieldReader r(j, file.string());
    TimingEntry e;
    e.phase = r.string("phase");
    e.query_id = r.string("query_id");
    e.model = r.string("model");
    e.ms = r.number("ms");
    r.finish();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace divcov::harness
