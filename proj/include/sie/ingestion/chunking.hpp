#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sie/ingestion/document.hpp"

namespace sie::ingestion {

/// Counting contract used to budget chunks. count() must be monotone in
/// prefix length: count(prefix) <= count(whole).
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

/// Whitespace-delimited words.
class WordCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
};

/// Rough sub-word estimate: ceil(bytes / 4).
class ByteQuarterCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
};

struct ChunkPiece {
  std::string section_id;
  std::string text;
};

struct Chunk {
  std::vector<ChunkPiece> pieces;

  std::string text() const;
  std::vector<std::string> section_ids() const;
};

/// Packs sentences into chunks of at most max_units. Sentences are only
/// split when a single sentence exceeds the budget; such a sentence is cut
/// into maximal code-point-aligned pieces, each its own chunk. Joining all
/// chunk texts reproduces SourceDocument::text(). Throws Errc::precondition
/// when max_units is 0.
std::vector<Chunk> chunk_document(const SourceDocument& doc, std::size_t max_units,
                                  const TokenCounter& counter);

}  // namespace sie::ingestion
