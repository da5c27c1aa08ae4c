#include "divcov/sampling/parse.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>

#include <json.hpp>


namespace divcov::sampling {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return trim_view(s.substr(1, s.size() - 2));
  }
  return s;
}

// Splits on commas outside quotes, braces, brackets and parentheses.
std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> parts;
  int depth = 0;
  bool in_quote = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') in_quote = true;
    else if (c == '{' || c == '(' || c == '[') ++depth;
    else if ((c == '}' || c == ')' || c == ']') && depth > 0) --depth;
    else if (c == ',' && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

std::vector<std::string> parse_curly(std::string_view raw, bool verbalized) {
  std::vector<std::string> out;
  const std::size_t open = raw.find('{');
  if (open == std::string_view::npos) return out;
  int depth = 0;
  bool in_quote = false;
  std::size_t end = raw.size();  // unterminated: salvage to end of text
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') in_quote = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) {
      end = i;
      break;
    }
  }
  const std::string_view inner = raw.substr(open + 1, end - open - 1);
  for (std::string_view item : split_top_level(inner)) {
    item = trim_view(item);
    if (verbalized && item.size() >= 2 && item.front() == '(') {
      std::string_view tuple = item.substr(1);
      if (tuple.back() == ')') tuple.remove_suffix(1);
      const auto fields = split_top_level(tuple);
      item = trim_view(fields.front());
    }
    item = unquote(item);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

// Drops commas that directly precede a closing brace or bracket.
std::string strip_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_quote = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quote) {
      out.push_back(c);
      if (c == '\\' && i + 1 < s.size()) out.push_back(s[++i]);
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') in_quote = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && is_space(s[j])) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

struct IdContent {
  double id;
  std::size_t arrival;
  std::string content;
};

std::optional<IdContent> read_object(std::string_view span, std::size_t arrival) {
  const auto j = nlohmann::json::parse(strip_trailing_commas(span), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("content");
  if (it == j.end() || !it->is_string()) return std::nullopt;
  IdContent rec{std::numeric_limits<double>::infinity(), arrival,
                std::string(trim_view(it->get_ref<const std::string&>()))};
  auto id = j.find("answer-id");
  if (id != j.end()) {
    if (id->is_number()) {
      rec.id = id->get<double>();
    } else if (id->is_string()) {
      try {
        rec.id = std::stod(id->get<std::string>());
      } catch (const std::exception&) {
      }
    }
  }
  return rec;
}

std::vector<std::string> parse_answer_id_json(std::string_view raw) {
  // Every balanced {...} span is tried as a standalone object; the outer
  // wrapper of the documented format is not valid JSON and is skipped.
  std::vector<IdContent> found;
  std::vector<std::size_t> stack;
  bool in_quote = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') {
      in_quote = true;
    } else if (c == '{') {
      stack.push_back(i);
    } else if (c == '}' && !stack.empty()) {
      const std::size_t start = stack.back();
      stack.pop_back();
      if (auto rec = read_object(raw.substr(start, i - start + 1), found.size())) {
        found.push_back(std::move(*rec));
      }
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const IdContent& a, const IdContent& b) { return a.id < b.id; });
  std::vector<std::string> out;
  for (auto& rec : found) {
    if (!rec.content.empty()) out.push_back(std::move(rec.content));
  }
  return out;
}

std::vector<std::string> parse_response_tags(std::string_view raw) {
  std::vector<std::string> out;
  constexpr std::string_view kOpen = "<text>";
  constexpr std::string_view kClose = "</text>";
  std::size_t pos = 0;
  while (true) {
    const std::size_t a = raw.find(kOpen, pos);
    if (a == std::string_view::npos) break;
    const std::size_t b = raw.find(kClose, a + kOpen.size());
    if (b == std::string_view::npos) break;
    const std::string_view inner = trim_view(raw.substr(a + kOpen.size(), b - a - kOpen.size()));
    if (!inner.empty()) out.emplace_back(inner);
    pos = b + kClose.size();
  }
  return out;
}

}  // namespace

std::string strip_think(std::string_view raw) {
  constexpr std::string_view kOpen = "<think>";
  constexpr std::string_view kClose = "</think>";
  std::string text(raw);
  const std::size_t first_close = text.find(kClose);
  const std::size_t first_open = text.find(kOpen);
  if (first_close != std::string::npos &&
      (first_open == std::string::npos || first_close < first_open)) {
    text.erase(0, first_close + kClose.size());
  }
  std::size_t pos;
  while ((pos = text.find(kOpen)) != std::string::npos) {
    const std::size_t close = text.find(kClose, pos + kOpen.size());
    if (close == std::string::npos) {
      text.erase(pos);
      break;
    }
    text.erase(pos, close + kClose.size() - pos);
  }
  return text;
}

std::vector<std::string> parse_answers(std::string_view raw, OutputFormat format,
                                       bool verbalized) {
  const std::string text = strip_think(raw);
  switch (format) {
    case OutputFormat::kCurlyList: return parse_curly(text, verbalized);
    case OutputFormat::kAnswerIdJson: return parse_answer_id_json(text);
    case OutputFormat::kResponseTags: return parse_response_tags(text);
  }
  return {};
}

}  // namespace divcov::sampling
