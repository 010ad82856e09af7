#include "sie/ingestion/document.hpp"

#include <spdlog/spdlog.h>

#include <set>

#include "json.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::ingestion {

using nlohmann::json;

namespace {

const std::set<std::string> kDocKeys = {"doc_id", "title", "origin", "sections"};
const std::set<std::string> kSectionKeys = {"section_id", "heading", "body"};

void note_unknown(const json& obj, const std::set<std::string>& known, const std::string& where,
                  std::vector<std::string>* warnings) {
  for (const auto& [key, _] : obj.items()) {
    if (known.contains(key)) continue;
    const auto msg = "ignoring unknown key '" + where + key + "'";
    spdlog::warn("section document: {}", msg);
    if (warnings) warnings->push_back(msg);
  }
}

std::string string_field(const json& obj, const char* key, const std::string& where,
                         bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) fail(Errc::syntax, "missing key '" + where + key + "'", where + key);
    return {};
  }
  if (!it->is_string()) fail(Errc::syntax, "'" + where + key + "' must be a string", where + key);
  return it->get<std::string>();
}

}  // namespace

std::string SourceDocument::text() const {
  std::string out;
  for (const auto& s : sections) out += s.body;
  return out;
}

const Section* SourceDocument::find_section(std::string_view section_id) const noexcept {
  for (const auto& s : sections)
    if (s.section_id == section_id) return &s;
  return nullptr;
}

Section normalize_text(Section section) {
  section.body = text::collapse_whitespace(text::strip_controls(section.body));
  section.char_span.end = section.char_span.start + section.body.size();
  return section;
}

SourceDocument parse_structured_article(std::string_view bytes,
                                        std::vector<std::string>* warnings) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::syntax, std::string("section document is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(Errc::syntax, "section document must be an object");
  note_unknown(root, kDocKeys, "", warnings);

  SourceDocument doc;
  doc.doc_id = string_field(root, "doc_id", "", true);
  if (doc.doc_id.empty()) fail(Errc::syntax, "doc_id must be non-empty", "doc_id");
  doc.title = string_field(root, "title", "", false);
  doc.origin = string_field(root, "origin", "", false);

  const auto secs = root.find("sections");
  if (secs == root.end() || !secs->is_array())
    fail(Errc::syntax, "'sections' must be an array", "sections");

  std::set<std::string> seen;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < secs->size(); ++i) {
    const auto& raw = (*secs)[i];
    const std::string where = "sections[" + std::to_string(i) + "].";
    if (!raw.is_object()) fail(Errc::syntax, where + " must be an object", where);
    note_unknown(raw, kSectionKeys, where, warnings);
    Section s;
    s.section_id = string_field(raw, "section_id", where, true);
    if (s.section_id.empty()) fail(Errc::syntax, where + "section_id must be non-empty", where);
    if (!seen.insert(s.section_id).second)
      fail(Errc::duplicate_section_id, "section id '" + s.section_id + "' appears twice",
           s.section_id);
    s.heading = text::collapse_whitespace(string_field(raw, "heading", where, false));
    s.body = string_field(raw, "body", where, false);
    s.char_span = {offset, offset};
    s = normalize_text(std::move(s));
    offset = s.char_span.end;
    doc.sections.push_back(std::move(s));
  }
  return doc;
}

std::string to_json(const SourceDocument& doc) {
  json out = {{"doc_id", doc.doc_id}, {"title", doc.title}, {"origin", doc.origin}};
  json secs = json::array();
  for (const auto& s : doc.sections)
    secs.push_back({{"section_id", s.section_id}, {"heading", s.heading}, {"body", s.body}});
  out["sections"] = std::move(secs);
  return out.dump(2);
}

}  // namespace sie::ingestion
