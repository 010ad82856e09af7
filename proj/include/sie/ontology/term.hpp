#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sie::ontology {

/// A curated concept, pre-flattened from its source ontology.
struct OntologyTerm {
  std::string curie;  ///< PREFIX:LOCALID, e.g. UBERON:0000956
  std::string iri;
  std::string label;
  std::vector<std::string> synonyms;
  std::string definition;
  std::string ontology_name;

  bool operator==(const OntologyTerm&) const = default;
};

bool is_valid_curie(std::string_view curie);

/// Throws Errc::invalid_argument naming the first broken invariant.
void validate(const OntologyTerm& term);

nlohmann::json to_json(const OntologyTerm& term);
OntologyTerm term_from_json(const nlohmann::json& j);

/// Term ingestion file: one JSON object per line with keys curie, iri,
/// label, synonyms, definition, ontology_name. Blank lines are skipped.
/// Throws Errc::format with the 1-based line number as subject.
std::vector<OntologyTerm> parse_terms_jsonl(std::string_view bytes);

/// Scored reference to a stored term; identity fields mirror the term.
struct ConceptRef {
  std::string curie;
  std::string iri;
  std::string label;
  std::string ontology_name;
  double fused_score = 0.0;

  static ConceptRef of(const OntologyTerm& term, double fused_score);
  bool same_concept(const ConceptRef& other) const noexcept { return curie == other.curie; }
  bool operator==(const ConceptRef&) const = default;
};

nlohmann::json to_json(const ConceptRef& ref);
ConceptRef concept_from_json(const nlohmann::json& j);

}  // namespace sie::ontology
