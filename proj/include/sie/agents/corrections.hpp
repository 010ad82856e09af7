#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sie/agents/items.hpp"
#include "sie/config/task_spec.hpp"
#include "sie/ingestion/document.hpp"
#include "sie/ontology/store.hpp"

namespace sie::agents {

struct FieldPath {
  std::optional<std::size_t> index;  ///< empty for records[+]
  std::string field;                 ///< empty for a whole-record path
};

/// Parses "records[<i>].<field>", "records[<i>].attributes.<name>" and
/// "records[+]". Throws Errc::unknown_field_path for anything else.
FieldPath parse_field_path(std::string_view path);

/// A reviewer correction bound to a record id rather than a position, so it
/// can be re-applied after any later step reorders or drops records.
struct PinnedCorrection {
  std::string item_id;
  std::string field;  ///< empty: item_id names a reviewer-added record
  nlohmann::json value;

  bool operator==(const PinnedCorrection&) const = default;
};

nlohmann::json to_json(const PinnedCorrection& pin);
PinnedCorrection pin_from_json(const nlohmann::json& j);

/// Resolves positional corrections against `items`. next_added counts the
/// reviewer-added records issued so far; new records continue the
/// "h0001", "h0002", ... sequence after it and advance it. Values are checked
/// here: unknown fields or indexes raise Errc::unknown_field_path, values
/// of the wrong kind Errc::invalid_argument, unknown curies
/// Errc::not_found, unknown section ids Errc::invalid_argument, and values
/// outside a field's allowed set Errc::schema_violation.
std::vector<PinnedCorrection> pin_corrections(const std::vector<JudgedItem>& items,
                                              const std::vector<Correction>& corrections,
                                              const config::ExtractionTaskSpec& spec,
                                              const ingestion::SourceDocument& doc,
                                              const ontology::OntologyStore& store,
                                              std::size_t& next_added);

/// Writes every pin into `items`. Pinned records missing from `items` are
/// restored: reviewer-added ones are appended, others are taken from
/// `fallback` and put back in fallback order.
void apply_pins(std::vector<JudgedItem>& items, const std::vector<PinnedCorrection>& pins,
                const std::vector<JudgedItem>& fallback, const ontology::OntologyStore& store);

}  // namespace sie::agents
