#include "sie/agents/items.hpp"

#include "sie/common/error.hpp"

namespace sie::agents {

using nlohmann::json;

void validate(const HumanFeedback& f) {
  if (!f.approve && f.empty())
    fail(Errc::invalid_argument, "rejecting feedback needs a correction or guidance");
}

double mean_score(const std::vector<JudgedItem>& items) noexcept {
  if (items.empty()) return 0.0;
  double s = 0.0;
  for (const auto& i : items) s += i.judge_score;
  return s / static_cast<double>(items.size());
}

json to_json(const ExtractedItem& i) {
  return {{"item_id", i.item_id},
          {"label", i.label},
          {"entity_type", i.entity_type},
          {"value", i.value ? json(*i.value) : json(nullptr)},
          {"source_sentence", i.source_sentence},
          {"section_id", i.section_id},
          {"non_literal", i.non_literal},
          {"attributes", i.attributes}};
}

json to_json(const AlignedItem& i) {
  auto j = to_json(i.base);
  json cands = json::array();
  for (const auto& c : i.candidates) cands.push_back(ontology::to_json(c));
  j["candidates"] = std::move(cands);
  j["chosen"] = i.chosen ? ontology::to_json(*i.chosen) : json(nullptr);
  return j;
}

json to_json(const JudgedItem& i) {
  auto j = to_json(i.base);
  j["judge_score"] = i.judge_score;
  j["judge_rationale"] = i.judge_rationale;
  return j;
}

json to_json(const HumanFeedback& f) {
  json cs = json::array();
  for (const auto& c : f.corrections) cs.push_back({{"field_path", c.field_path}, {"new_value", c.new_value}});
  return {{"corrections", cs}, {"guidance", f.guidance}, {"approve", f.approve}};
}

json to_json(const FinalOutput& o) {
  json recs = json::array();
  for (const auto& r : o.records) recs.push_back(to_json(r));
  return {{"run_id", o.run_id},
          {"records", recs},
          {"judge_summary", o.judge_summary},
          {"provenance", {{"doc_id", o.provenance.doc_id}, {"section_ids", o.provenance.section_ids}}},
          {"hil_applied", o.hil_applied}};
}

ExtractedItem extracted_from_json(const json& j) {
  ExtractedItem i;
  i.item_id = j.at("item_id").get<std::string>();
  i.label = j.at("label").get<std::string>();
  i.entity_type = j.at("entity_type").get<std::string>();
  if (j.contains("value") && !j["value"].is_null()) i.value = j["value"].get<std::string>();
  i.source_sentence = j.value("source_sentence", "");
  i.section_id = j.value("section_id", "");
  i.non_literal = j.value("non_literal", false);
  if (j.contains("attributes"))
    i.attributes = j["attributes"].get<std::map<std::string, json>>();
  return i;
}

AlignedItem aligned_from_json(const json& j) {
  AlignedItem a;
  a.base = extracted_from_json(j);
  for (const auto& c : j.at("candidates")) a.candidates.push_back(ontology::concept_from_json(c));
  if (!j.at("chosen").is_null()) a.chosen = ontology::concept_from_json(j["chosen"]);
  return a;
}

JudgedItem judged_from_json(const json& j) {
  JudgedItem r;
  r.base = aligned_from_json(j);
  r.judge_score = j.at("judge_score").get<double>();
  r.judge_rationale = j.at("judge_rationale").get<std::string>();
  return r;
}

HumanFeedback feedback_from_json(const json& j) {
  HumanFeedback f;
  if (j.contains("corrections"))
    for (const auto& c : j["corrections"])
      f.corrections.push_back({c.at("field_path").get<std::string>(), c.at("new_value")});
  f.guidance = j.value("guidance", "");
  f.approve = j.value("approve", true);
  return f;
}

FinalOutput final_output_from_json(const json& j) {
  FinalOutput o;
  o.run_id = j.at("run_id").get<std::string>();
  for (const auto& r : j.at("records")) o.records.push_back(judged_from_json(r));
  o.judge_summary = j.at("judge_summary").get<double>();
  o.provenance.doc_id = j.at("provenance").at("doc_id").get<std::string>();
  o.provenance.section_ids = j.at("provenance").at("section_ids").get<std::vector<std::string>>();
  o.hil_applied = j.at("hil_applied").get<bool>();
  return o;
}

}  // namespace sie::agents
