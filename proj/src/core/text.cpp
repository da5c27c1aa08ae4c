#include "divcov/core/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "divcov/core/error.hpp"

namespace divcov::text {
namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Decodes one code point at s[i], advancing i. Invalid bytes yield U+FFFD.
UChar32 next_code_point(std::string_view s, int32_t& i) {
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i,
          static_cast<int32_t>(s.size()), c);
  return c < 0 ? 0xFFFD : c;
}

}  // namespace

std::string to_nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");
  icu::UnicodeString normalized = nfc->normalize(from_utf8(s), status);
  if (U_FAILURE(status)) throw ContractError("NFC normalization failed");
  return to_utf8(normalized);
}

std::string case_fold(std::string_view s) {
  icu::UnicodeString u = from_utf8(s);
  u.foldCase(U_FOLD_CASE_DEFAULT);
  return to_utf8(u);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    const int32_t start = i;
    const UChar32 c = next_code_point(s, i);
    if (u_isUWhiteSpace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.append(s.substr(static_cast<std::size_t>(start),
                          static_cast<std::size_t>(i - start)));
      in_space = false;
    }
  }
  return out;
}

std::string trim_right(std::string_view s) {
  // Walk forward remembering the end of the last non-space code point.
  int32_t i = 0;
  int32_t keep = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    const UChar32 c = next_code_point(s, i);
    if (!u_isUWhiteSpace(c)) keep = i;
  }
  return std::string(s.substr(0, static_cast<std::size_t>(keep)));
}

std::string trim(std::string_view s) {
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    int32_t next = i;
    const UChar32 c = next_code_point(s, next);
    if (!u_isUWhiteSpace(c)) break;
    i = next;
  }
  return trim_right(s.substr(static_cast<std::size_t>(i)));
}

std::string storage_form(std::string_view s) { return trim_right(to_nfc(s)); }

bool is_valid_utf8(std::string_view s) {
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, n, c);
    if (c < 0) return false;
  }
  return true;
}

}  // namespace divcov::text

namespace divcov::text {

std::string match_form(std::string_view s) {
  std::string out = trim(collapse_whitespace(case_fold(to_nfc(s))));
  auto is_terminal = [](char c) {
    return c == '.' || c == '?' || c == '!' || c == ',' || c == ';' || c == ':';
  };
  while (!out.empty() && is_terminal(out.back())) {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

}  // namespace divcov::text
