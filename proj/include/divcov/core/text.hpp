#pragma once

// Unicode helpers backed by ICU. All inputs and outputs are UTF-8.

#include <string>
#include <string_view>

namespace divcov::text {

std::string to_nfc(std::string_view s);

// Full Unicode case folding (e.g. "Straße" -> "strasse").
std::string case_fold(std::string_view s);

// Collapses every run of Unicode whitespace to a single ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);

// Storage form: NFC plus trailing-whitespace strip. No case folding.
std::string storage_form(std::string_view s);

bool is_valid_utf8(std::string_view s);

}  // namespace divcov::text

namespace divcov::text {

// Matching form used for answer comparison: NFC, case-folded, whitespace
// runs collapsed, outer whitespace and terminal [.?!,;:] removed.
std::string match_form(std::string_view s);

}  // namespace divcov::text
