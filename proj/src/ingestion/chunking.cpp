#include "sie/ingestion/chunking.hpp"

#include <algorithm>

#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::ingestion {

std::size_t WordCounter::count(std::string_view s) const {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = text::is_ascii_space(c);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::size_t ByteQuarterCounter::count(std::string_view s) const { return (s.size() + 3) / 4; }

std::string Chunk::text() const {
  std::string out;
  for (const auto& p : pieces) out += p.text;
  return out;
}

std::vector<std::string> Chunk::section_ids() const {
  std::vector<std::string> ids;
  for (const auto& p : pieces)
    if (ids.empty() || ids.back() != p.section_id) ids.push_back(p.section_id);
  return ids;
}

namespace {

class Packer {
 public:
  Packer(std::size_t max_units, const TokenCounter& counter)
      : max_units_(max_units), counter_(counter) {}

  void add_sentence(const std::string& section_id, std::string_view sentence) {
    if (counter_.count(sentence) > max_units_) {
      flush();
      hard_split(section_id, sentence);
      return;
    }
    if (!current_text_.empty() &&
        counter_.count(current_text_ + std::string(sentence)) > max_units_)
      flush();
    append(section_id, sentence);
  }

  std::vector<Chunk> finish() {
    flush();
    return std::move(chunks_);
  }

 private:
  void append(const std::string& section_id, std::string_view part) {
    if (current_.pieces.empty() || current_.pieces.back().section_id != section_id)
      current_.pieces.push_back({section_id, {}});
    current_.pieces.back().text.append(part);
    current_text_.append(part);
  }

  void flush() {
    if (current_.pieces.empty()) return;
    chunks_.push_back(std::move(current_));
    current_ = {};
    current_text_.clear();
  }

  // Cuts at code point boundaries only. Each piece is the longest prefix
  // within budget, or a single code point when even that exceeds it.
  void hard_split(const std::string& section_id, std::string_view sentence) {
    while (!sentence.empty()) {
      std::vector<std::size_t> cuts;
      for (std::size_t i = 1; i <= sentence.size(); ++i)
        if (i == sentence.size() || (static_cast<unsigned char>(sentence[i]) & 0xc0) != 0x80)
          cuts.push_back(i);
      const auto fits = [&](std::size_t cut) {
        return counter_.count(sentence.substr(0, cut)) <= max_units_;
      };
      // cuts[0] is always taken; find the last cut that still fits.
      std::size_t lo = 0;
      std::size_t hi = cuts.size() - 1;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (fits(cuts[mid]))
          lo = mid;
        else
          hi = mid - 1;
      }
      const std::size_t take = cuts[lo];
      append(section_id, sentence.substr(0, take));
      flush();
      sentence.remove_prefix(take);
    }
  }

  std::size_t max_units_;
  const TokenCounter& counter_;
  std::vector<Chunk> chunks_;
  Chunk current_;
  std::string current_text_;
};

}  // namespace

std::vector<Chunk> chunk_document(const SourceDocument& doc, std::size_t max_units,
                                  const TokenCounter& counter) {
  if (max_units == 0) fail(Errc::precondition, "max_units must be at least 1");
  Packer packer(max_units, counter);
  for (const auto& section : doc.sections)
    for (auto sentence : text::split_sentences(section.body))
      packer.add_sentence(section.section_id, sentence);
  return packer.finish();
}

}  // namespace sie::ingestion
