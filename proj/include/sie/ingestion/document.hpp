#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sie::ingestion {

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

struct Section {
  std::string section_id;
  std::string heading;
  std::string body;
  CharSpan char_span;  ///< offsets into SourceDocument::text()

  bool operator==(const Section&) const = default;
};

/// Section-segmented content of one article or instrument. Section bodies
/// are stored normalized; text() is their plain concatenation, so every
/// section's char_span addresses its body exactly.
struct SourceDocument {
  std::string doc_id;
  std::string title;
  std::string origin;
  std::vector<Section> sections;

  std::string text() const;
  const Section* find_section(std::string_view section_id) const noexcept;
  bool operator==(const SourceDocument&) const = default;
};

/// Parses the section-document format:
///
///   {"doc_id": ..., "title": ..., "origin": ...,
///    "sections": [{"section_id": ..., "heading": ..., "body": ...}]}
///
/// Unknown keys are ignored; each one is reported through `warnings` (when
/// given) and the log. Throws Errc::syntax for malformed input or missing
/// keys and Errc::duplicate_section_id when two sections share an id.
SourceDocument parse_structured_article(std::string_view bytes,
                                        std::vector<std::string>* warnings = nullptr);

std::string to_json(const SourceDocument& doc);

/// Strips control characters and collapses whitespace runs in the body.
/// Idempotent. The span keeps its start and is resized to the new body.
Section normalize_text(Section section);

}  // namespace sie::ingestion
