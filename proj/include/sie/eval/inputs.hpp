#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sie/eval/metrics.hpp"

namespace sie::eval {

/// CSV with header `curie,label,ontology_name`. Errc::format names the line.
std::vector<ConceptRow> parse_concept_rows(std::string_view csv);

/// One label per line; blank lines skipped.
std::set<std::string> parse_label_set(std::string_view text);

/// JSON object mapping entity type to a non-negative integer count.
std::map<std::string, std::uint64_t> parse_type_counts(std::string_view json_text);

/// Whitespace- or comma-separated numbers.
std::vector<double> parse_scores(std::string_view text);

/// One heading per line; blank lines skipped.
std::vector<std::string> parse_lines(std::string_view text);

}  // namespace sie::eval
