#include "sie/eval/inputs.hpp"

#include <charconv>

#include "json.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::eval {

std::vector<ConceptRow> parse_concept_rows(std::string_view csv) {
  std::vector<std::size_t> lines;
  const auto rows = reviewfile::parse_csv(csv, &lines);
  if (rows.empty() || rows[0] != std::vector<std::string>{"curie", "label", "ontology_name"})
    fail(Errc::format, "expected header curie,label,ontology_name", "1");
  std::vector<ConceptRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3)
      fail(Errc::format, "expected 3 fields", std::to_string(lines[i]));
    out.push_back({rows[i][0], rows[i][1], rows[i][2]});
  }
  return out;
}

std::vector<std::string> parse_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text::collapse_whitespace(text.substr(start, end - start));
    if (!line.empty()) out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

std::set<std::string> parse_label_set(std::string_view text) {
  const auto lines = parse_lines(text);
  return {lines.begin(), lines.end()};
}

std::map<std::string, std::uint64_t> parse_type_counts(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::format, std::string("type counts are not JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::format, "type counts must be a JSON object");
  std::map<std::string, std::uint64_t> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_unsigned()) fail(Errc::format, "count must be a non-negative integer", k);
    out[k] = v.get<std::uint64_t>();
  }
  return out;
}

std::vector<double> parse_scores(std::string_view text) {
  std::vector<double> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ',' || c == ' ' || c == '\n' || c == '\t' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && sep(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !sep(text[j])) ++j;
    double v = 0;
    const auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, v);
    if (ec != std::errc{} || p != text.data() + j)
      fail(Errc::format, "not a number", std::string(text.substr(i, j - i)));
    out.push_back(v);
    i = j;
  }
  return out;
}

}  // namespace sie::eval
