#include "sie/agents/corrections.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::agents {

using nlohmann::json;

namespace {

constexpr std::string_view kPrefix = "records[";

const std::set<std::string, std::less<>> kStringFields = {"label", "entity_type", "source_sentence",
                                                          "section_id", "judge_rationale"};

bool is_core(std::string_view f) {
  return kStringFields.count(f) || f == "value" || f == "chosen" || f == "judge_score";
}

/// Canonical field name, or empty when the task spec does not know it.
std::string canonical_field(std::string_view field, const config::ExtractionTaskSpec& spec) {
  if (is_core(field)) return std::string(field);
  std::string_view name = field;
  if (name.substr(0, 11) == "attributes.") name.remove_prefix(11);
  const auto* f = spec.find_field(name);
  if (!f || is_core(name)) return {};
  return "attributes." + std::string(name);
}

void check_value(const std::string& field, const json& v, const std::string& path,
                 const config::ExtractionTaskSpec& spec, const ingestion::SourceDocument& doc,
                 const ontology::OntologyStore& store) {
  auto bad = [&](const std::string& why) { fail(Errc::invalid_argument, path + ": " + why, path); };
  if (kStringFields.count(field)) {
    if (!v.is_string()) bad("expected a string");
    const auto s = v.get<std::string>();
    if (field == "label" && text::collapse_whitespace(s).empty()) bad("label must not be empty");
    if (field == "section_id" && !doc.find_section(s)) bad("unknown section \"" + s + "\"");
  } else if (field == "value") {
    if (!v.is_string() && !v.is_null()) bad("expected a string or null");
  } else if (field == "chosen") {
    if (v.is_null()) return;
    if (!v.is_string()) bad("expected a CURIE or null");
    if (!store.find(v.get<std::string>()))
      fail(Errc::not_found, path + ": no stored concept " + v.get<std::string>(), v.get<std::string>());
    return;
  } else if (field == "judge_score") {
    if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0)
      bad("expected a number in [0, 1]");
    return;
  }
  const std::string name = field.rfind("attributes.", 0) == 0 ? field.substr(11) : field;
  if (const auto* f = spec.find_field(name); f && !f->allowed_values.empty() && v.is_string() &&
      std::find(f->allowed_values.begin(), f->allowed_values.end(), v.get<std::string>()) ==
          f->allowed_values.end())
    fail(Errc::schema_violation,
         path + ": \"" + v.get<std::string>() + "\" is not an allowed " + name, name);
}

bool contains_label(const std::string& sentence, const std::string& label) {
  return text::collapse_whitespace(sentence).find(text::collapse_whitespace(label)) !=
         std::string::npos;
}

void assign(JudgedItem& item, const std::string& field, const json& v,
            const ontology::OntologyStore& store) {
  auto& c = item.core();
  if (field == "label") c.label = v.get<std::string>();
  else if (field == "entity_type") c.entity_type = v.get<std::string>();
  else if (field == "source_sentence") c.source_sentence = v.get<std::string>();
  else if (field == "section_id") c.section_id = v.get<std::string>();
  else if (field == "judge_rationale") item.judge_rationale = v.get<std::string>();
  else if (field == "judge_score") item.judge_score = v.get<double>();
  else if (field == "value") c.value = v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
  else if (field == "chosen") {
    if (v.is_null()) {
      item.base.chosen.reset();
    } else {
      const auto curie = v.get<std::string>();
      auto& cands = item.base.candidates;
      auto it = std::find_if(cands.begin(), cands.end(),
                             [&](const auto& r) { return r.curie == curie; });
      if (it == cands.end()) {
        cands.push_back(ontology::ConceptRef::of(store.get(curie), 0.0));
        it = std::prev(cands.end());
      }
      item.base.chosen = *it;
    }
  } else if (field.rfind("attributes.", 0) == 0) {
    c.attributes[field.substr(11)] = v;
  }
  if (field == "label" || field == "source_sentence")
    c.non_literal = !contains_label(c.source_sentence, c.label);
}

JudgedItem added_record(const std::string& id, const json& obj,
                        const ontology::OntologyStore& store) {
  JudgedItem r;
  r.core().item_id = id;
  r.judge_score = 1.0;
  r.judge_rationale = "added by reviewer";
  for (const auto& [k, v] : obj.items()) assign(r, k, v, store);
  r.core().non_literal = !contains_label(r.core().source_sentence, r.core().label);
  return r;
}

}  // namespace

FieldPath parse_field_path(std::string_view path) {
  auto bad = [&] { fail(Errc::unknown_field_path, "unknown field path " + std::string(path), std::string(path)); };
  if (path.substr(0, kPrefix.size()) != kPrefix) bad();
  auto rest = path.substr(kPrefix.size());
  const auto close = rest.find(']');
  if (close == std::string_view::npos || close == 0) bad();
  const auto idx = rest.substr(0, close);
  FieldPath fp;
  if (idx != "+") {
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), n);
    if (ec != std::errc{} || p != idx.data() + idx.size()) bad();
    fp.index = n;
  }
  rest.remove_prefix(close + 1);
  if (rest.empty()) {
    if (fp.index) bad();  // whole-record replacement is not supported
    return fp;
  }
  if (rest.front() != '.' || rest.size() < 2 || !fp.index) bad();
  fp.field = std::string(rest.substr(1));
  return fp;
}

json to_json(const PinnedCorrection& p) {
  return {{"item_id", p.item_id}, {"field", p.field}, {"value", p.value}};
}

PinnedCorrection pin_from_json(const json& j) {
  return {j.at("item_id").get<std::string>(), j.at("field").get<std::string>(), j.at("value")};
}

std::vector<PinnedCorrection> pin_corrections(const std::vector<JudgedItem>& items,
                                              const std::vector<Correction>& corrections,
                                              const config::ExtractionTaskSpec& spec,
                                              const ingestion::SourceDocument& doc,
                                              const ontology::OntologyStore& store,
                                              std::size_t& next_added) {
  std::vector<PinnedCorrection> out;
  auto seq = next_added;
  for (const auto& c : corrections) {
    const auto fp = parse_field_path(c.field_path);
    if (!fp.index) {
      if (!c.new_value.is_object())
        fail(Errc::invalid_argument, c.field_path + ": expected a record object", c.field_path);
      json normalized = json::object();
      for (const auto& [k, v] : c.new_value.items()) {
        const auto field = canonical_field(k, spec);
        const auto sub = c.field_path + "." + k;
        if (field.empty())
          fail(Errc::unknown_field_path, "unknown field path " + sub, sub);
        check_value(field, v, sub, spec, doc, store);
        normalized[field] = v;
      }
      for (const char* key : {"label", "entity_type"})
        if (!normalized.contains(key))
          fail(Errc::invalid_argument, c.field_path + ": a new record needs " + std::string(key),
               c.field_path);
      char id[16];
      std::snprintf(id, sizeof id, "h%04zu", ++seq);
      out.push_back({id, "", std::move(normalized)});
      continue;
    }
    if (*fp.index >= items.size())
      fail(Errc::unknown_field_path,
           "unknown field path " + c.field_path + " (" + std::to_string(items.size()) + " records)",
           c.field_path);
    const auto field = canonical_field(fp.field, spec);
    if (field.empty()) fail(Errc::unknown_field_path, "unknown field path " + c.field_path, c.field_path);
    check_value(field, c.new_value, c.field_path, spec, doc, store);
    out.push_back({items[*fp.index].core().item_id, field, c.new_value});
  }
  next_added = seq;
  return out;
}

void apply_pins(std::vector<JudgedItem>& items, const std::vector<PinnedCorrection>& pins,
                const std::vector<JudgedItem>& fallback, const ontology::OntologyStore& store) {
  auto find = [](std::vector<JudgedItem>& v, const std::string& id) {
    return std::find_if(v.begin(), v.end(), [&](const auto& r) { return r.core().item_id == id; });
  };
  std::set<std::string> pinned_ids;
  for (const auto& p : pins)
    if (!p.field.empty()) pinned_ids.insert(p.item_id);
  // Put back pinned records a model step dropped, keeping fallback order.
  std::vector<JudgedItem> restored;
  std::vector<bool> taken(items.size(), false);
  for (const auto& f : fallback) {
    const auto& id = f.core().item_id;
    auto it = std::find_if(items.begin(), items.end(),
                           [&](const auto& r) { return r.core().item_id == id; });
    if (it != items.end()) {
      taken[std::size_t(it - items.begin())] = true;
      restored.push_back(*it);
    } else if (pinned_ids.count(id)) {
      restored.push_back(f);
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!taken[i]) restored.push_back(std::move(items[i]));
  items = std::move(restored);

  for (const auto& p : pins) {
    if (p.field.empty()) {
      auto it = find(items, p.item_id);
      auto rec = added_record(p.item_id, p.value, store);
      if (it == items.end()) {
        items.push_back(std::move(rec));
      } else {
        for (const auto& [k, v] : p.value.items()) assign(*it, k, v, store);
      }
      continue;
    }
    auto it = find(items, p.item_id);
    if (it != items.end()) assign(*it, p.field, p.value, store);
  }
}

}  // namespace sie::agents
