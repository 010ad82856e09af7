#include "sie/ontology/term.hpp"

#include <regex>
#include <sstream>

#include "sie/common/error.hpp"

namespace sie::ontology {

using nlohmann::json;

bool is_valid_curie(std::string_view curie) {
  static const std::regex kCurie(R"(^[A-Za-z][A-Za-z0-9_.\-]*:[A-Za-z0-9_.\-]+$)");
  return std::regex_match(curie.begin(), curie.end(), kCurie);
}

void validate(const OntologyTerm& term) {
  if (!is_valid_curie(term.curie))
    fail(Errc::invalid_argument, "curie '" + term.curie + "' is not PREFIX:LOCALID", term.curie);
  if (term.iri.empty()) fail(Errc::invalid_argument, "iri must be non-empty", term.curie);
  if (term.label.empty()) fail(Errc::invalid_argument, "label must be non-empty", term.curie);
}

json to_json(const OntologyTerm& t) {
  return {{"curie", t.curie},         {"iri", t.iri},
          {"label", t.label},         {"synonyms", t.synonyms},
          {"definition", t.definition}, {"ontology_name", t.ontology_name}};
}

OntologyTerm term_from_json(const json& j) {
  OntologyTerm t;
  t.curie = j.at("curie").get<std::string>();
  t.iri = j.at("iri").get<std::string>();
  t.label = j.at("label").get<std::string>();
  t.synonyms = j.value("synonyms", std::vector<std::string>{});
  t.definition = j.value("definition", std::string{});
  t.ontology_name = j.value("ontology_name", std::string{});
  return t;
}

std::vector<OntologyTerm> parse_terms_jsonl(std::string_view bytes) {
  std::vector<OntologyTerm> out;
  std::istringstream in{std::string(bytes)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(term_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(Errc::format, "terms line " + std::to_string(lineno) + ": " + e.what(),
           std::to_string(lineno));
    }
  }
  return out;
}

ConceptRef ConceptRef::of(const OntologyTerm& term, double fused_score) {
  return {term.curie, term.iri, term.label, term.ontology_name, fused_score};
}

json to_json(const ConceptRef& r) {
  return {{"curie", r.curie},
          {"iri", r.iri},
          {"label", r.label},
          {"ontology_name", r.ontology_name},
          {"fused_score", r.fused_score}};
}

ConceptRef concept_from_json(const json& j) {
  return {j.at("curie").get<std::string>(), j.value("iri", std::string{}),
          j.value("label", std::string{}), j.value("ontology_name", std::string{}),
          j.value("fused_score", 0.0)};
}

}  // namespace sie::ontology
