#include "sie/agents/parse.hpp"

#include <algorithm>

namespace sie::agents {

using nlohmann::json;

namespace {

/// End (exclusive) of the brace-balanced region starting at text[open], or
/// npos when it never closes. Braces inside strings are skipped.
std::size_t balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    else if (c == '{')
      ++depth;
    else if (c == '}' && --depth == 0)
      return i + 1;
  }
  return std::string_view::npos;
}

std::string describe(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "boolean";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    default: return "number";
  }
}

void check_item(const json& item, const WireSchema& schema, const std::string& where,
                std::vector<std::string>& errors) {
  if (!item.is_object()) {
    errors.push_back(where + " must be an object");
    return;
  }
  for (const auto& f : schema.fields) {
    const auto it = item.find(f.name);
    if (it == item.end() || (it->is_null() && !f.nullable)) {
      if (f.required) errors.push_back(where + " is missing required field \"" + f.name + "\"");
      continue;
    }
    const auto& v = *it;
    if (v.is_null()) continue;
    bool ok = false;
    switch (f.type) {
      case config::FieldType::string: ok = v.is_string(); break;
      case config::FieldType::number: ok = v.is_number(); break;
      case config::FieldType::boolean: ok = v.is_boolean(); break;
    }
    if (!ok) {
      errors.push_back(where + " field \"" + f.name + "\" must be a " +
                       std::string(config::to_string(f.type)) + ", got " + describe(v));
      continue;
    }
    if (f.type == config::FieldType::string && f.required && v.get<std::string>().empty()) {
      errors.push_back(where + " field \"" + f.name + "\" must not be empty");
      continue;
    }
    if (!f.allowed_values.empty() && v.is_string() &&
        std::find(f.allowed_values.begin(), f.allowed_values.end(), v.get<std::string>()) ==
            f.allowed_values.end()) {
      std::string allowed;
      for (const auto& a : f.allowed_values) allowed += (allowed.empty() ? "" : ", ") + a;
      errors.push_back(where + " field \"" + f.name + "\" has value \"" + v.get<std::string>() +
                       "\" outside {" + allowed + "}");
    }
  }
}

}  // namespace

std::string RepairRequest::prompt() const {
  std::string s =
      "Your previous reply could not be used. Fix these problems and reply with a single JSON "
      "object only:\n";
  for (const auto& e : errors) s += "- " + e + "\n";
  return s;
}

std::vector<json> find_json_objects(std::string_view text) {
  std::vector<json> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto end = balanced_end(text, pos);
    if (end == std::string_view::npos) break;
    auto parsed = json::parse(text.substr(pos, end - pos), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      out.push_back(std::move(parsed));
      pos = end;
    } else {
      ++pos;
    }
  }
  return out;
}

ParseResult parse_agent_output(std::string_view text, const WireSchema& schema) {
  auto objects = find_json_objects(text);
  if (objects.empty()) return RepairRequest{{"no JSON object found in the reply"}};
  ParsedPayload out;
  if (objects.size() > 1)
    out.warnings.push_back("reply held " + std::to_string(objects.size()) +
                           " JSON objects; used the first");
  auto& root = objects.front();
  std::vector<std::string> errors;
  if (schema.list_key) {
    const auto it = root.find(*schema.list_key);
    if (it == root.end() || !it->is_array())
      return RepairRequest{{"reply must have an array under \"" + *schema.list_key + "\""}};
    for (std::size_t i = 0; i < it->size(); ++i)
      check_item((*it)[i], schema, *schema.list_key + "[" + std::to_string(i) + "]", errors);
    if (errors.empty()) out.items.assign(it->begin(), it->end());
  } else {
    check_item(root, schema, "reply", errors);
    if (errors.empty()) out.items.push_back(std::move(root));
  }
  if (!errors.empty()) return RepairRequest{std::move(errors)};
  return out;
}

WireSchema extractor_schema(const config::ExtractionTaskSpec& spec) {
  WireSchema w;
  w.list_key = "items";
  auto core = [&](const char* name, bool required) {
    FieldSpec f{name, config::FieldType::string, required, !required, {}};
    if (const auto* declared = spec.find_field(name)) {
      f.allowed_values = declared->allowed_values;
      f.required = required || declared->required;
      f.nullable = !f.required;
    }
    w.fields.push_back(std::move(f));
  };
  core("label", true);
  core("entity_type", true);
  core("value", false);
  core("source_sentence", false);
  core("section_id", false);
  for (const auto& f : spec.output_schema) {
    if (f.name == "label" || f.name == "entity_type" || f.name == "value" ||
        f.name == "source_sentence" || f.name == "section_id")
      continue;
    w.fields.push_back({f.name, f.type, f.required, !f.required, f.allowed_values});
  }
  return w;
}

}  // namespace sie::agents
