#include "sie/agents/agents.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <future>
#include <set>

#include <spdlog/spdlog.h>

#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::agents {

using nlohmann::json;
using gateway::Message;
using gateway::MessageRole;

namespace {

std::string system_prompt(const AgentEnv& env, AgentRole role) {
  std::string s = env.prompts.for_role(role);
  const std::string* block = nullptr;
  switch (role) {
    case AgentRole::extractor: block = &env.spec.agents.extractor; break;
    case AgentRole::alignment: block = &env.spec.agents.alignment; break;
    case AgentRole::judge: block = &env.spec.agents.judge; break;
    case AgentRole::feedback: block = &env.spec.agents.feedback; break;
  }
  if (!block->empty()) s += "\nTask instructions:\n" + *block + "\n";
  return s;
}

/// Sends the conversation, and on an unusable reply appends the reply and
/// a repair note and asks again, up to max_repair_attempts more times.
/// `check` adds reply-specific errors on top of the schema check.
ParsedPayload call_with_repair(
    const AgentEnv& env, const config::AgentProfile& profile, AgentRole role,
    std::vector<Message> messages, const WireSchema& schema,
    const std::function<std::vector<std::string>(const ParsedPayload&)>& check,
    StageReport* report) {
  const gateway::CallContext ctx{env.run_id, std::string(to_string(role))};
  std::vector<std::string> last_errors;
  for (int attempt = 0; attempt <= env.max_repair_attempts; ++attempt) {
    const auto completion = env.gateway.complete(ctx, profile.model, messages, profile.decoding);
    if (report) {
      ++report->calls;
      if (attempt > 0) ++report->repairs;
    }
    auto result = parse_agent_output(completion.text, schema);
    if (auto* ok = std::get_if<ParsedPayload>(&result)) {
      auto extra = check ? check(*ok) : std::vector<std::string>{};
      if (extra.empty()) {
        if (report)
          report->warnings.insert(report->warnings.end(), ok->warnings.begin(), ok->warnings.end());
        for (const auto& w : ok->warnings) spdlog::warn("{}: {}", to_string(role), w);
        return std::move(*ok);
      }
      result = RepairRequest{std::move(extra)};
    }
    const auto& repair = std::get<RepairRequest>(result);
    last_errors = repair.errors;
    spdlog::debug("{}: reply rejected ({} problems), attempt {}", to_string(role),
                  repair.errors.size(), attempt + 1);
    messages.push_back({MessageRole::assistant, completion.text});
    messages.push_back({MessageRole::user, repair.prompt()});
  }
  std::string msg = std::string(to_string(role)) + " output still invalid after " +
                    std::to_string(env.max_repair_attempts) + " repair attempts:";
  for (const auto& e : last_errors) msg += " " + e + ";";
  fail(Errc::stage, msg, std::string(to_string(role)));
}

/// Runs fn(i) for i in [0, n) with at most `width` calls in flight. Results
/// keep index order; the first failure (by index) is rethrown.
template <typename T>
std::vector<T> fan_out(std::size_t n, std::size_t width, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out;
  out.reserve(n);
  if (width <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<T>> batch;
    for (std::size_t i = start; i < std::min(n, start + width); ++i)
      batch.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

std::string render_chunk(const ingestion::Chunk& chunk,
                         const std::map<std::string, std::string>& headings) {
  std::string s;
  for (const auto& p : chunk.pieces) {
    auto h = headings.find(p.section_id);
    s += "### [" + p.section_id + "] " + (h == headings.end() ? std::string() : h->second) + "\n";
    s += p.text + "\n\n";
  }
  return s;
}

std::string schema_notes(const config::ExtractionTaskSpec& spec) {
  std::string s = "Goal: " + spec.goal + "\nRecord keys:\n";
  for (const auto& f : spec.output_schema) {
    s += "- " + f.name + " (" + std::string(config::to_string(f.type)) +
         (f.required ? ", required" : ", optional");
    if (!f.allowed_values.empty()) {
      s += ", one of:";
      for (const auto& v : f.allowed_values) s += " " + v;
    }
    s += ")\n";
  }
  if (!spec.constraints.empty()) {
    s += "Constraints:\n";
    for (const auto& c : spec.constraints) s += "- " + c + "\n";
  }
  if (spec.expected_output_example)
    s += "Example output:\n" + spec.expected_output_example->dump() + "\n";
  return s;
}

/// First sentence of any piece containing the label, exact match first.
std::pair<std::string, std::string> locate(const ingestion::Chunk& chunk, const std::string& needle,
                                           bool case_insensitive) {
  const auto want = case_insensitive ? text::casefold(needle) : needle;
  for (const auto& p : chunk.pieces)
    for (auto sentence : text::split_sentences(p.text)) {
      auto s = text::collapse_whitespace(sentence);
      const auto hay = case_insensitive ? text::casefold(s) : s;
      if (hay.find(want) != std::string::npos) return {p.section_id, s};
    }
  return {};
}

bool literal(const std::string& sentence, const std::string& label) {
  return text::collapse_whitespace(sentence).find(text::collapse_whitespace(label)) !=
         std::string::npos;
}

std::string fmt_id(char prefix, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%04zu", prefix, n);
  return buf;
}

}  // namespace

std::vector<ExtractedItem> run_extractor(const AgentEnv& env, const config::AgentProfile& profile,
                                         const std::vector<ingestion::Chunk>& chunks,
                                         const std::map<std::string, std::string>& section_headings,
                                         StageReport* report) {
  const auto schema = extractor_schema(env.spec);
  auto headings = section_headings;
  for (const auto& c : chunks)
    for (const auto& p : c.pieces) headings.emplace(p.section_id, "");
  bool any_text = false;
  for (const auto& c : chunks) any_text = any_text || !text::collapse_whitespace(c.text()).empty();
  if (!any_text) fail(Errc::precondition, "document text is empty", "extractor");

  std::string notes;
  if (env.use_longterm && env.longterm_embedder) {
    for (const auto& item : env.memory.recall_longterm(env.spec.goal, 3, env.longterm_embedder))
      notes += "- " + item.value + "\n";
  }

  std::vector<ExtractedItem> out;
  std::size_t seq = 0;
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    const auto& chunk = chunks[ci];
    if (text::collapse_whitespace(chunk.text()).empty()) continue;
    const auto sections = chunk.section_ids();
    std::string sys = system_prompt(env, AgentRole::extractor) + "\n" + schema_notes(env.spec);
    if (!notes.empty()) sys += "Notes from earlier runs:\n" + notes;
    std::vector<Message> messages = {{MessageRole::system, sys},
                                     {MessageRole::user, render_chunk(chunk, headings)}};
    auto check = [&](const ParsedPayload& p) {
      std::vector<std::string> errors;
      for (std::size_t i = 0; i < p.items.size(); ++i) {
        const auto& it = p.items[i];
        if (it.contains("section_id") && it["section_id"].is_string() &&
            std::find(sections.begin(), sections.end(), it["section_id"].get<std::string>()) ==
                sections.end())
          errors.push_back("items[" + std::to_string(i) + "] section_id \"" +
                           it["section_id"].get<std::string>() +
                           "\" is not a section of this text");
      }
      return errors;
    };
    const auto parsed =
        call_with_repair(env, profile, AgentRole::extractor, messages, schema, check, report);

    std::vector<ExtractedItem> chunk_items;
    for (const auto& it : parsed.items) {
      ExtractedItem item;
      item.item_id = fmt_id('i', ++seq);
      item.label = text::collapse_whitespace(it["label"].get<std::string>());
      item.entity_type = it["entity_type"].get<std::string>();
      if (it.contains("value") && it["value"].is_string()) item.value = it["value"].get<std::string>();
      if (it.contains("source_sentence") && it["source_sentence"].is_string())
        item.source_sentence = text::collapse_whitespace(it["source_sentence"].get<std::string>());
      if (it.contains("section_id") && it["section_id"].is_string())
        item.section_id = it["section_id"].get<std::string>();
      for (const auto& f : schema.fields) {
        if (f.name == "label" || f.name == "entity_type" || f.name == "value" ||
            f.name == "source_sentence" || f.name == "section_id")
          continue;
        if (it.contains(f.name) && !it[f.name].is_null()) item.attributes[f.name] = it[f.name];
      }
      if (item.section_id.empty() || item.source_sentence.empty()) {
        auto hit = locate(chunk, item.source_sentence.empty() ? item.label : item.source_sentence,
                          false);
        if (hit.first.empty()) hit = locate(chunk, item.label, true);
        if (item.section_id.empty())
          item.section_id = hit.first.empty() ? chunk.pieces.front().section_id : hit.first;
        if (item.source_sentence.empty()) item.source_sentence = hit.second;
      }
      item.non_literal = !literal(item.source_sentence, item.label);
      chunk_items.push_back(std::move(item));
    }
    for (const auto& item : chunk_items)
      env.memory.upsert_entity(env.run_id, item.label, {item.section_id, item.source_sentence});
    out.insert(out.end(), chunk_items.begin(), chunk_items.end());
  }
  json dump = json::array();
  for (const auto& i : out) dump.push_back(to_json(i));
  env.memory.put_context(env.run_id, AgentRole::extractor, "items", dump.dump());
  return out;
}

std::vector<AlignedItem> run_alignment(const AgentEnv& env, const config::AgentProfile& profile,
                                       const ontology::OntologyStore& store,
                                       gateway::Embedder& embedder,
                                       const std::vector<ExtractedItem>& items, std::size_t top_k,
                                       double alpha, StageReport* report) {
  if (store.size() == 0) fail(Errc::empty_index, "alignment needs a non-empty concept store");
  const WireSchema schema{std::nullopt, {{"chosen", config::FieldType::string, true, true, {}}}};
  const auto sys = system_prompt(env, AgentRole::alignment);

  // Hints from entity memory are read before any write so fan-out stays
  // deterministic.
  std::map<std::string, std::string> hints;
  for (const auto& rec : env.memory.entities(env.run_id))
    if (rec.latest_alignment) hints[rec.canonical_key] = rec.latest_alignment->curie;

  std::vector<StageReport> reports(items.size());
  std::function<AlignedItem(std::size_t)> align_one = [&](std::size_t idx) {
    const auto& item = items[idx];
    AlignedItem out{item, {}, std::nullopt};
    const auto query = item.label + " " + item.source_sentence;
    for (const auto& hit : store.hybrid_search(query, top_k, alpha, embedder))
      out.candidates.push_back(ontology::ConceptRef::of(hit.term, hit.fused_score));
    if (out.candidates.empty()) return out;

    std::string user = "Term: " + item.label + "\nType: " + item.entity_type +
                       "\nSentence: " + item.source_sentence + "\nCandidates:\n";
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
      const auto& c = out.candidates[i];
      const auto term = store.get(c.curie);
      user += std::to_string(i + 1) + ". " + c.curie + " | " + c.label + " | " + c.ontology_name +
              " | " + term.definition + "\n";
    }
    if (auto h = hints.find(text::normalize_key(item.label)); h != hints.end())
      user += "Earlier in this run the same term was mapped to " + h->second + ".\n";
    const std::vector<Message> messages = {{MessageRole::system, sys}, {MessageRole::user, user}};
    auto check = [&](const ParsedPayload& p) {
      std::vector<std::string> errors;
      const auto& v = p.items.front()["chosen"];
      if (v.is_string() &&
          std::none_of(out.candidates.begin(), out.candidates.end(),
                       [&](const auto& c) { return c.curie == v.get<std::string>(); }))
        errors.push_back("candidate escape: \"" + v.get<std::string>() +
                         "\" is not in the candidate list; choose a listed CURIE or null");
      return errors;
    };
    const auto parsed = call_with_repair(env, profile, AgentRole::alignment, messages, schema,
                                         check, &reports[idx]);
    const auto& v = parsed.items.front()["chosen"];
    if (v.is_string())
      out.chosen = *std::find_if(out.candidates.begin(), out.candidates.end(),
                                 [&](const auto& c) { return c.curie == v.get<std::string>(); });
    return out;
  };
  auto out = fan_out<AlignedItem>(items.size(), env.fan_out, align_one);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.base.item_id < b.base.item_id; });

  json dump = json::array();
  for (const auto& a : out) {
    env.memory.upsert_entity(env.run_id, a.base.label, {a.base.section_id, a.base.source_sentence},
                             a.chosen);
    dump.push_back({{"item_id", a.base.item_id},
                    {"chosen", a.chosen ? json(a.chosen->curie) : json(nullptr)}});
  }
  env.memory.put_context(env.run_id, AgentRole::alignment, "chosen", dump.dump());
  if (report)
    for (const auto& r : reports) {
      report->calls += r.calls;
      report->repairs += r.repairs;
      report->warnings.insert(report->warnings.end(), r.warnings.begin(), r.warnings.end());
    }
  return out;
}

std::vector<JudgedItem> run_judge(const AgentEnv& env, const config::AgentProfile& profile,
                                  const std::vector<AlignedItem>& items, StageReport* report) {
  const WireSchema schema{std::nullopt,
                          {{"score", config::FieldType::number, true, false, {}},
                           {"rationale", config::FieldType::string, false, true, {}}}};
  const auto sys = system_prompt(env, AgentRole::judge);
  std::map<std::string, std::size_t> seen;
  for (const auto& rec : env.memory.entities(env.run_id))
    seen[rec.canonical_key] = rec.occurrences.size();

  std::vector<StageReport> reports(items.size());
  std::function<JudgedItem(std::size_t)> judge_one = [&](std::size_t idx) {
    const auto& item = items[idx];
    json shown = to_json(item);
    shown.erase("candidates");
    std::string user = "Record:\n" + shown.dump(2) + "\n";
    if (auto s = seen.find(text::normalize_key(item.base.label)); s != seen.end())
      user += "This label occurs " + std::to_string(s->second) + " time(s) in the document.\n";
    const std::vector<Message> messages = {{MessageRole::system, sys}, {MessageRole::user, user}};
    const auto parsed =
        call_with_repair(env, profile, AgentRole::judge, messages, schema, {}, &reports[idx]);
    const auto& reply = parsed.items.front();
    double score = reply["score"].get<double>();
    if (score < 0.0 || score > 1.0) {
      const double clamped = std::clamp(score, 0.0, 1.0);
      const auto warning = "judge score " + std::to_string(score) + " for " + item.base.item_id +
                           " clamped to " + std::to_string(clamped);
      spdlog::warn("{}", warning);
      reports[idx].warnings.push_back(warning);
      score = clamped;
    }
    JudgedItem out{item, score, {}};
    if (reply.contains("rationale") && reply["rationale"].is_string())
      out.judge_rationale = reply["rationale"].get<std::string>();
    return out;
  };
  auto out = fan_out<JudgedItem>(items.size(), env.fan_out, judge_one);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.core().item_id < b.core().item_id; });
  json dump = json::array();
  for (const auto& j : out) dump.push_back({{"item_id", j.core().item_id}, {"score", j.judge_score}});
  env.memory.put_context(env.run_id, AgentRole::judge, "scores", dump.dump());
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.6f", mean_score(out));
  env.memory.put_context(env.run_id, AgentRole::judge, "mean", mean);
  if (report)
    for (const auto& r : reports) {
      report->calls += r.calls;
      report->repairs += r.repairs;
      report->warnings.insert(report->warnings.end(), r.warnings.begin(), r.warnings.end());
    }
  return out;
}

std::vector<JudgedItem> run_feedback(const AgentEnv& env, const config::AgentProfile& profile,
                                     const ontology::OntologyStore& store,
                                     const std::vector<JudgedItem>& items,
                                     const std::vector<PinnedCorrection>& pins,
                                     const std::string& guidance, StageReport* report) {
  std::vector<JudgedItem> current = items;
  apply_pins(current, pins, items, store);
  if (pins.empty() && guidance.empty()) return current;

  WireSchema schema;
  schema.list_key = "records";
  schema.fields.push_back({"item_id", config::FieldType::string, true, false, {}});
  for (const char* f : {"label", "entity_type", "value", "chosen"}) {
    FieldSpec spec{f, config::FieldType::string, false, true, {}};
    if (const auto* declared = env.spec.find_field(f)) spec.allowed_values = declared->allowed_values;
    schema.fields.push_back(std::move(spec));
  }

  json records = json::array();
  for (const auto& r : current) records.push_back(to_json(r));
  std::string user = "Records:\n" + records.dump(2) + "\n";
  user += "Reviewer guidance:\n" + (guidance.empty() ? std::string("(none)") : guidance) + "\n";
  user += "Fields fixed by the reviewer:\n";
  if (pins.empty()) user += "(none)\n";
  for (const auto& p : pins)
    user += "- " + p.item_id + (p.field.empty() ? std::string(" (added record)") : "." + p.field) + "\n";
  const std::vector<Message> messages = {
      {MessageRole::system, system_prompt(env, AgentRole::feedback)}, {MessageRole::user, user}};

  auto find = [&](const std::string& id) {
    return std::find_if(current.begin(), current.end(),
                        [&](const auto& r) { return r.core().item_id == id; });
  };
  auto check = [&](const ParsedPayload& p) {
    std::vector<std::string> errors;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      const auto where = "records[" + std::to_string(i) + "]";
      const auto id = p.items[i]["item_id"].get<std::string>();
      auto it = find(id);
      if (it == current.end()) {
        errors.push_back(where + " names unknown item_id \"" + id + "\"");
        continue;
      }
      if (!ids.insert(id).second) errors.push_back(where + " repeats item_id \"" + id + "\"");
      if (p.items[i].contains("label") && p.items[i]["label"].is_string() &&
          text::collapse_whitespace(p.items[i]["label"].get<std::string>()).empty())
        errors.push_back(where + " label must not be empty");
      if (p.items[i].contains("chosen") && p.items[i]["chosen"].is_string()) {
        const auto curie = p.items[i]["chosen"].get<std::string>();
        const auto& cands = it->base.candidates;
        if (std::none_of(cands.begin(), cands.end(), [&](const auto& c) { return c.curie == curie; }))
          errors.push_back(where + " candidate escape: \"" + curie + "\" is not a candidate");
      }
    }
    return errors;
  };
  const auto parsed =
      call_with_repair(env, profile, AgentRole::feedback, messages, schema, check, report);

  std::vector<JudgedItem> next;
  std::set<std::string> kept;
  for (const auto& r : parsed.items) kept.insert(r["item_id"].get<std::string>());
  for (const auto& rec : current) {
    if (!kept.count(rec.core().item_id)) continue;
    JudgedItem r = rec;
    const auto& patch = *std::find_if(parsed.items.begin(), parsed.items.end(), [&](const json& p) {
      return p["item_id"].get<std::string>() == rec.core().item_id;
    });
    if (patch.contains("label") && patch["label"].is_string())
      r.core().label = text::collapse_whitespace(patch["label"].get<std::string>());
    if (patch.contains("entity_type") && patch["entity_type"].is_string())
      r.core().entity_type = patch["entity_type"].get<std::string>();
    if (patch.contains("value"))
      r.core().value = patch["value"].is_string() ? std::optional(patch["value"].get<std::string>())
                                                  : std::nullopt;
    if (patch.contains("chosen")) {
      if (patch["chosen"].is_string()) {
        const auto curie = patch["chosen"].get<std::string>();
        r.base.chosen = *std::find_if(r.base.candidates.begin(), r.base.candidates.end(),
                                      [&](const auto& c) { return c.curie == curie; });
      } else {
        r.base.chosen.reset();
      }
    }
    r.core().non_literal = !literal(r.core().source_sentence, r.core().label);
    next.push_back(std::move(r));
  }
  apply_pins(next, pins, current, store);

  json dump = json::array();
  for (const auto& r : next) dump.push_back(r.core().item_id);
  env.memory.put_context(env.run_id, AgentRole::feedback, "kept", dump.dump());
  if (!guidance.empty()) env.memory.put_context(env.run_id, AgentRole::feedback, "guidance", guidance);
  return next;
}

}  // namespace sie::agents
