#include "sie/common/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace sie::text {

namespace {

constexpr std::array<std::string_view, 48> kStopWords = {
    "a",    "an",   "and",  "are",   "as",    "at",   "be",    "by",    "for",  "from",
    "has",  "have", "in",   "into",  "is",    "it",   "its",   "of",    "on",   "or",
    "that", "the",  "their", "then", "there", "these", "this", "those", "to",   "was",
    "were", "which", "with", "within", "we",  "our",  "not",   "but",   "can",  "been",
    "also", "such", "than", "via",   "between", "each", "other", "both"};

bool is_word_byte(unsigned char c) noexcept {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string strip_controls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x20 && !is_ascii_space(static_cast<char>(c))) continue;
    if (c == 0x7f) continue;
    if (c == 0xc2 && i + 1 < s.size()) {
      const auto next = static_cast<unsigned char>(s[i + 1]);
      if (next >= 0x80 && next <= 0x9f) {
        ++i;
        continue;
      }
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string casefold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  return out;
}

std::string normalize_key(std::string_view s) { return casefold(collapse_whitespace(s)); }

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stop_word(std::string_view w) noexcept {
  return std::find(kStopWords.begin(), kStopWords.end(), w) != kStopWords.end();
}

std::vector<std::string> content_words(std::string_view s) {
  auto all = words(s);
  std::erase_if(all, [](const std::string& w) { return is_stop_word(w); });
  return all;
}

std::vector<std::string_view> split_sentences(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i + 1;
      while (j < s.size() && is_ascii_space(s[j])) ++j;
      if (j > i + 1 && j < s.size()) {
        const auto next = static_cast<unsigned char>(s[j]);
        if (std::isupper(next) != 0 || std::isdigit(next) != 0) {
          out.push_back(s.substr(start, j - start));
          start = j;
          i = j;
          continue;
        }
      }
    }
    ++i;
  }
  if (start < s.size()) out.push_back(s.substr(start));
  return out;
}

std::size_t utf8_floor(std::string_view s, std::size_t max_bytes) noexcept {
  if (max_bytes >= s.size()) return s.size();
  std::size_t n = max_bytes;
  while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xc0) == 0x80) --n;
  return n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

}  // namespace sie::text
