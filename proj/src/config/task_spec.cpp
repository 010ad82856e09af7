#include "sie/config/task_spec.hpp"

#include <set>

#include "sie/common/error.hpp"
#include "yaml_util.hpp"

namespace sie::config {

using nlohmann::json;

std::string_view to_string(FieldType type) noexcept {
  switch (type) {
    case FieldType::string: return "string";
    case FieldType::number: return "number";
    case FieldType::boolean: return "boolean";
  }
  return "string";
}

namespace {

std::optional<FieldType> parse_field_type(std::string_view s) {
  for (auto t : {FieldType::string, FieldType::number, FieldType::boolean})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

}  // namespace

const OutputField* ExtractionTaskSpec::find_field(std::string_view name) const noexcept {
  for (const auto& f : output_schema)
    if (f.name == name) return &f;
  return nullptr;
}

ExtractionTaskSpec load_task_spec(std::string_view source) {
  using namespace detail;
  const auto root = parse_yaml(source, "task spec");
  std::vector<std::string> bad;
  unknown_keys(root,
               {"task_id", "goal", "output_schema", "agents", "constraints",
                "expected_output_example"},
               "", bad);

  ExtractionTaskSpec spec;
  if (!root["task_id"] || scalar(root["task_id"], "task_id").empty())
    bad.push_back("task_id");
  else
    spec.task_id = scalar(root["task_id"], "task_id");
  if (!root["goal"])
    bad.push_back("goal");
  else
    spec.goal = scalar(root["goal"], "goal");

  const auto schema = root["output_schema"];
  if (!schema || !schema.IsSequence() || schema.size() == 0) {
    bad.push_back("output_schema");
  } else {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto node = schema[i];
      const auto path = "output_schema[" + std::to_string(i) + "]";
      if (!node.IsMap()) {
        bad.push_back(path);
        continue;
      }
      unknown_keys(node, {"name", "type", "required", "allowed_values"}, path + ".", bad);
      OutputField f;
      if (!node["name"] || scalar(node["name"], path + ".name").empty()) {
        bad.push_back(path + ".name");
        continue;
      }
      f.name = scalar(node["name"], path + ".name");
      if (!seen.insert(f.name).second) bad.push_back(path + ".name");
      if (node["type"]) {
        auto t = parse_field_type(scalar(node["type"], path + ".type"));
        if (!t)
          bad.push_back(path + ".type");
        else
          f.type = *t;
      }
      if (node["required"]) f.required = boolean(node["required"], path + ".required");
      if (node["allowed_values"]) {
        if (!node["allowed_values"].IsSequence()) {
          bad.push_back(path + ".allowed_values");
        } else {
          for (const auto& v : node["allowed_values"])
            f.allowed_values.push_back(scalar(v, path + ".allowed_values"));
        }
      }
      spec.output_schema.push_back(std::move(f));
    }
  }

  const auto agents = root["agents"];
  if (!agents || !agents.IsMap()) {
    bad.push_back("agents");
  } else {
    unknown_keys(agents, {"extractor", "alignment", "judge", "feedback"}, "agents.", bad);
    auto block = [&](const char* name, std::string& into, bool may_be_empty) {
      const std::string path = std::string("agents.") + name;
      if (!agents[name]) {
        bad.push_back(path);
        return;
      }
      into = scalar(agents[name], path);
      if (into.empty() && !may_be_empty) bad.push_back(path);
    };
    block("extractor", spec.agents.extractor, false);
    block("alignment", spec.agents.alignment, false);
    block("judge", spec.agents.judge, false);
    block("feedback", spec.agents.feedback, true);
  }

  if (const auto c = root["constraints"]) {
    if (!c.IsSequence())
      bad.push_back("constraints");
    else
      for (const auto& v : c) spec.constraints.push_back(scalar(v, "constraints"));
  }
  if (const auto ex = root["expected_output_example"]) spec.expected_output_example = yaml_to_json(ex);

  if (!bad.empty()) schema_failure("task spec", bad);
  return spec;
}

json to_json(const ExtractionTaskSpec& spec) {
  json fields = json::array();
  for (const auto& f : spec.output_schema)
    fields.push_back({{"name", f.name},
                      {"type", std::string(to_string(f.type))},
                      {"required", f.required},
                      {"allowed_values", f.allowed_values}});
  json j = {{"task_id", spec.task_id},
            {"goal", spec.goal},
            {"output_schema", fields},
            {"agents",
             {{"extractor", spec.agents.extractor},
              {"alignment", spec.agents.alignment},
              {"judge", spec.agents.judge},
              {"feedback", spec.agents.feedback}}},
            {"constraints", spec.constraints}};
  if (spec.expected_output_example) j["expected_output_example"] = *spec.expected_output_example;
  return j;
}

ExtractionTaskSpec task_spec_from_json(const json& j) {
  ExtractionTaskSpec spec;
  spec.task_id = j.at("task_id").get<std::string>();
  spec.goal = j.at("goal").get<std::string>();
  for (const auto& f : j.at("output_schema")) {
    OutputField field;
    field.name = f.at("name").get<std::string>();
    auto t = parse_field_type(f.at("type").get<std::string>());
    if (!t) fail(Errc::schema, "unknown field type", field.name);
    field.type = *t;
    field.required = f.at("required").get<bool>();
    field.allowed_values = f.at("allowed_values").get<std::vector<std::string>>();
    spec.output_schema.push_back(std::move(field));
  }
  const auto& a = j.at("agents");
  spec.agents = {a.at("extractor").get<std::string>(), a.at("alignment").get<std::string>(),
                 a.at("judge").get<std::string>(), a.at("feedback").get<std::string>()};
  spec.constraints = j.at("constraints").get<std::vector<std::string>>();
  if (j.contains("expected_output_example")) spec.expected_output_example = j["expected_output_example"];
  return spec;
}

}  // namespace sie::config
