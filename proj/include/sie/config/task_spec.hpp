#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sie::config {

enum class FieldType { string, number, boolean };

std::string_view to_string(FieldType type) noexcept;

/// One key of an extracted record.
struct OutputField {
  std::string name;
  FieldType type = FieldType::string;
  bool required = true;
  std::vector<std::string> allowed_values;  ///< empty means unconstrained

  bool operator==(const OutputField&) const = default;
};

struct AgentInstructions {
  std::string extractor;
  std::string alignment;
  std::string judge;
  std::string feedback;

  bool operator==(const AgentInstructions&) const = default;
};

/// Declarative description of one extraction task.
///
/// Records always carry "label" and "entity_type"; the output schema may
/// restate them (to constrain entity_type, say) and may add further keys.
struct ExtractionTaskSpec {
  std::string task_id;
  std::string goal;
  std::vector<OutputField> output_schema;
  AgentInstructions agents;
  std::vector<std::string> constraints;
  std::optional<nlohmann::json> expected_output_example;

  const OutputField* find_field(std::string_view name) const noexcept;
  bool operator==(const ExtractionTaskSpec&) const = default;
};

/// Parses a YAML task document with a closed schema:
///
///   task_id: ner
///   goal: ...
///   output_schema:
///     - {name: label, type: string, required: true}
///     - {name: entity_type, allowed_values: [ANATOMICAL_REGION, ...]}
///   agents: {extractor: ..., alignment: ..., judge: ..., feedback: ...}
///   constraints: [...]
///   expected_output_example: {...}
///
/// Throws Errc::syntax for empty or malformed YAML and Errc::schema for
/// missing or unknown keys. A schema error lists every offending path in
/// its message; subject() holds the first.
ExtractionTaskSpec load_task_spec(std::string_view source);

nlohmann::json to_json(const ExtractionTaskSpec& spec);
ExtractionTaskSpec task_spec_from_json(const nlohmann::json& j);

}  // namespace sie::config
