#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sie/ontology/term.hpp"

namespace sie::agents {

struct ExtractedItem {
  std::string item_id;
  std::string label;
  std::string entity_type;
  std::optional<std::string> value;
  std::string source_sentence;
  std::string section_id;
  /// Set when source_sentence does not contain the label verbatim.
  bool non_literal = false;
  /// Task-specific keys declared in the output schema.
  std::map<std::string, nlohmann::json> attributes;

  bool operator==(const ExtractedItem&) const = default;
};

struct AlignedItem {
  ExtractedItem base;
  std::vector<ontology::ConceptRef> candidates;  ///< fused_score descending
  std::optional<ontology::ConceptRef> chosen;    ///< a member of candidates

  bool operator==(const AlignedItem&) const = default;
};

struct JudgedItem {
  AlignedItem base;
  double judge_score = 0.0;  ///< in [0, 1]
  std::string judge_rationale;

  const ExtractedItem& core() const noexcept { return base.base; }
  ExtractedItem& core() noexcept { return base.base; }
  bool operator==(const JudgedItem&) const = default;
};

/// One field-level change requested by a reviewer. Paths:
///   records[<i>].<field>   set a field of the i-th record
///   records[+]             add a record; value is the record object
struct Correction {
  std::string field_path;
  nlohmann::json new_value;

  bool operator==(const Correction&) const = default;
};

struct HumanFeedback {
  std::vector<Correction> corrections;
  std::string guidance;
  bool approve = true;

  bool empty() const noexcept { return corrections.empty() && guidance.empty(); }
  bool operator==(const HumanFeedback&) const = default;
};

/// Throws Errc::invalid_argument when approve is false with nothing to act on.
void validate(const HumanFeedback& feedback);

struct Provenance {
  std::string doc_id;
  std::vector<std::string> section_ids;

  bool operator==(const Provenance&) const = default;
};

struct FinalOutput {
  std::string run_id;
  std::vector<JudgedItem> records;
  double judge_summary = 0.0;  ///< mean record score, 0 for no records
  Provenance provenance;
  bool hil_applied = false;

  bool operator==(const FinalOutput&) const = default;
};

double mean_score(const std::vector<JudgedItem>& items) noexcept;

// Wire forms. Records are flat: every ExtractedItem key at top level plus
// attributes, candidates, chosen, judge_score, judge_rationale.
nlohmann::json to_json(const ExtractedItem& item);
nlohmann::json to_json(const AlignedItem& item);
nlohmann::json to_json(const JudgedItem& item);
nlohmann::json to_json(const HumanFeedback& feedback);
/// Keys run_id, records, judge_summary, provenance, hil_applied.
nlohmann::json to_json(const FinalOutput& output);

ExtractedItem extracted_from_json(const nlohmann::json& j);
AlignedItem aligned_from_json(const nlohmann::json& j);
JudgedItem judged_from_json(const nlohmann::json& j);
HumanFeedback feedback_from_json(const nlohmann::json& j);
FinalOutput final_output_from_json(const nlohmann::json& j);

}  // namespace sie::agents
