#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sie/config/task_spec.hpp"

namespace sie::agents {

struct FieldSpec {
  std::string name;
  config::FieldType type = config::FieldType::string;
  bool required = true;
  bool nullable = false;
  std::vector<std::string> allowed_values;
};

/// Shape of an agent reply. With list_key set the reply is
/// {"<list_key>": [item, ...]}; otherwise the reply object is the item.
struct WireSchema {
  std::optional<std::string> list_key;
  std::vector<FieldSpec> fields;
};

struct ParsedPayload {
  std::vector<nlohmann::json> items;
  std::vector<std::string> warnings;
};

/// Validation failures to feed back to the model on the next attempt.
struct RepairRequest {
  std::vector<std::string> errors;

  std::string prompt() const;
};

using ParseResult = std::variant<ParsedPayload, RepairRequest>;

/// Finds the first syntactically valid JSON object in `text` (which may
/// wrap it in code fences or prose) and checks it against `schema`. Later
/// objects are ignored with a warning.
ParseResult parse_agent_output(std::string_view text, const WireSchema& schema);

/// Every JSON object embedded in text, in order of appearance.
std::vector<nlohmann::json> find_json_objects(std::string_view text);

/// The extractor's wire schema: the task's output schema plus the core
/// record keys (label and entity_type required; value, source_sentence
/// and section_id optional).
WireSchema extractor_schema(const config::ExtractionTaskSpec& spec);

}  // namespace sie::agents
