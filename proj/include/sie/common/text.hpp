#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sie::text {

bool is_ascii_space(char c) noexcept;

/// Removes C0 controls other than whitespace, DEL, and UTF-8 encoded C1
/// controls (U+0080..U+009F). All other bytes pass through untouched.
std::string strip_controls(std::string_view s);

/// Collapses every run of ASCII whitespace to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// ASCII lowercase; non-ASCII bytes are left as they are.
std::string casefold(std::string_view s);

/// casefold + collapse_whitespace. Used for entity keys and label matching.
std::string normalize_key(std::string_view s);

/// Lowercased word tokens. Word characters are ASCII alphanumerics and any
/// non-ASCII byte, so non-Latin words survive as tokens.
std::vector<std::string> words(std::string_view s);

/// words() minus a small English stop-word list.
std::vector<std::string> content_words(std::string_view s);

bool is_stop_word(std::string_view w) noexcept;

/// Splits text into sentences that cover it exactly: concatenating the
/// returned views reproduces the input. A boundary sits after terminal
/// punctuation (. ! ?) plus its following whitespace, when the next
/// character is an uppercase ASCII letter or a digit.
std::vector<std::string_view> split_sentences(std::string_view s);

/// Length of the longest prefix of s that ends on a UTF-8 code point
/// boundary and is at most max_bytes long.
std::size_t utf8_floor(std::string_view s, std::size_t max_bytes) noexcept;

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

}  // namespace sie::text
