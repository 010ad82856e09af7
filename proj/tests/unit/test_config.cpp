#include <random>

#include "doctest.h"
#include "fixture_stack.hpp"
#include "sie/common/error.hpp"
#include "sie/config/profiles.hpp"
#include "sie/config/task_spec.hpp"

using namespace sie;
using namespace sie::config;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(Errc::syntax, "");
}

std::string without_line(std::string text, const std::string& prefix) {
  const auto at = text.find(prefix);
  REQUIRE(at != std::string::npos);
  return text.erase(at, text.find('\n', at) - at + 1);
}

std::string word(std::mt19937& rng) {
  static const char* w[] = {"cortex", "neuron", "judge", "align", "extract", "schema", "plant", "mouse"};
  return w[rng() % 8];
}

ExtractionTaskSpec random_spec(std::mt19937& rng) {
  ExtractionTaskSpec s;
  s.task_id = "task-" + std::to_string(rng() % 1000);
  s.goal = word(rng) + " " + word(rng);
  const int n = 1 + rng() % 4;
  for (int i = 0; i < n; ++i) {
    OutputField f;
    f.name = i == 0 ? "label" : "field_" + std::to_string(i);
    f.type = static_cast<FieldType>(rng() % 3);
    f.required = rng() % 2;
    if (f.type == FieldType::string && rng() % 2)
      for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) f.allowed_values.push_back("V" + std::to_string(k));
    s.output_schema.push_back(f);
  }
  s.agents = {word(rng), word(rng), word(rng), rng() % 2 ? "" : word(rng)};
  for (int i = 0; i < static_cast<int>(rng() % 3); ++i) s.constraints.push_back(word(rng) + " rule");
  return s;
}

std::string to_yaml(const ExtractionTaskSpec& s) {
  std::string y = "task_id: " + s.task_id + "\ngoal: " + s.goal + "\noutput_schema:\n";
  for (const auto& f : s.output_schema) {
    y += "  - name: " + f.name + "\n    type: " + std::string(to_string(f.type)) +
         "\n    required: " + (f.required ? "true" : "false") + "\n";
    if (!f.allowed_values.empty()) {
      y += "    allowed_values: [";
      for (std::size_t i = 0; i < f.allowed_values.size(); ++i) y += (i ? ", " : "") + f.allowed_values[i];
      y += "]\n";
    }
  }
  y += "agents:\n  extractor: " + s.agents.extractor + "\n  alignment: " + s.agents.alignment +
       "\n  judge: " + s.agents.judge + "\n  feedback: \"" + s.agents.feedback + "\"\n";
  if (!s.constraints.empty()) {
    y += "constraints:\n";
    for (const auto& c : s.constraints) y += "  - " + c + "\n";
  }
  return y;
}

}  // namespace

TEST_CASE("minimal NER task file loads with its four agent blocks") {
  const auto spec = load_task_spec(testing::fixture_text("ner_minimal.yaml"));
  CHECK(spec.task_id == "ner");
  CHECK(spec.agents.extractor == "Extract entities.");
  CHECK(spec.agents.alignment == "Align entities to ontology concepts.");
  CHECK(spec.agents.judge == "Score each alignment.");
  CHECK(spec.agents.feedback.empty());
  REQUIRE(spec.output_schema.size() == 1);
  CHECK(spec.output_schema[0].name == "label");
  CHECK(task_spec_from_json(to_json(spec)) == spec);
}

TEST_CASE("the bundled neuroscience task carries allowed entity types and an example") {
  const auto spec = load_task_spec(testing::fixture_text("ner_task.yaml"));
  const auto* f = spec.find_field("entity_type");
  REQUIRE(f);
  CHECK(f->allowed_values.size() == 5);
  CHECK(spec.expected_output_example.has_value());
  CHECK(spec.constraints.size() == 1);
}

TEST_CASE("a missing judge block is a schema error naming judge") {
  const auto text = without_line(testing::fixture_text("ner_minimal.yaml"), "  judge:");
  const auto e = error_of([&] { load_task_spec(text); });
  CHECK(e.code() == Errc::schema);
  CHECK(e.subject() == "agents.judge");
  CHECK(std::string(e.what()).find("judge") != std::string::npos);
}

TEST_CASE("every missing path is named") {
  auto text = without_line(testing::fixture_text("ner_minimal.yaml"), "  judge:");
  text = without_line(text, "goal:");
  const auto e = error_of([&] { load_task_spec(text); });
  CHECK(e.code() == Errc::schema);
  const std::string msg = e.what();
  CHECK(msg.find("goal") != std::string::npos);
  CHECK(msg.find("agents.judge") != std::string::npos);
}

TEST_CASE("empty or malformed task files are syntax errors") {
  CHECK(error_of([] { load_task_spec(""); }).code() == Errc::syntax);
  CHECK(error_of([] { load_task_spec("task_id: [unclosed"); }).code() == Errc::syntax);
  CHECK(error_of([] { load_task_spec("- just\n- a list\n"); }).code() == Errc::syntax);
}

TEST_CASE("unknown keys are rejected") {
  const auto text = testing::fixture_text("ner_minimal.yaml") + "colour: blue\n";
  const auto e = error_of([&] { load_task_spec(text); });
  CHECK(e.code() == Errc::schema);
  CHECK(std::string(e.what()).find("colour") != std::string::npos);
  const auto nested = testing::fixture_text("ner_minimal.yaml") + "  reviewer: nobody\n";
  CHECK(error_of([&] { load_task_spec(nested); }).code() == Errc::schema);
}

TEST_CASE("only the feedback block may be empty; the schema needs a field") {
  auto text = testing::fixture_text("ner_minimal.yaml");
  const auto empty_judge = text.replace(text.find("Score each alignment."), 21, "\"\"");
  CHECK(error_of([&] { load_task_spec(empty_judge); }).code() == Errc::schema);
  auto no_fields = testing::fixture_text("ner_minimal.yaml");
  no_fields.replace(no_fields.find("  - {name: label, type: string}\n"), 33, "");
  no_fields.replace(no_fields.find("output_schema:"), 14, "output_schema: []");
  CHECK(error_of([&] { load_task_spec(no_fields); }).code() == Errc::schema);
}

TEST_CASE("generated task documents load back to the task spec they were written from") {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto spec = random_spec(rng);
    const auto loaded = load_task_spec(to_yaml(spec));
    CHECK(loaded == spec);
    CHECK(task_spec_from_json(to_json(loaded)) == loaded);
  }
}

TEST_CASE("profiles file declares providers, embedding model and agents") {
  const auto p = load_profiles(testing::fixture_text("profiles.yaml"));
  REQUIRE(p.providers.count("openrouter"));
  CHECK(p.providers.at("openrouter").kind == ProviderKind::http);
  CHECK(p.providers.at("openrouter").credential_ref == "OPENROUTER_API_KEY");
  CHECK(p.embedding_model.qualified() == "scripted/hash-256");
  REQUIRE(p.agents.size() == 4);
  CHECK(p.agents.at(AgentRole::judge).model.qualified() == "openrouter/openai/gpt-4o-mini");
  CHECK(p.agents.at(AgentRole::extractor).decoding.max_output_tokens == 4096);
  for (const auto& [role, prof] : p.agents) CHECK(profile_from_json(to_json(prof)) == prof);
}

TEST_CASE("profile invariants") {
  const auto base = testing::fixture_text("profiles.yaml");
  auto negative = base;
  negative.replace(negative.find("temperature: 0"), 14, "temperature: -1");
  CHECK(error_of([&] { load_profiles(negative); }).code() == Errc::invalid_argument);
  auto zero = base;
  zero.replace(zero.find("max_output_tokens: 256"), 22, "max_output_tokens: 0");
  CHECK(error_of([&] { load_profiles(zero); }).code() == Errc::schema);
  auto bad_role = base + "  reviewer: {model: a/b}\n";
  CHECK(error_of([&] { load_profiles(bad_role); }).subject() == "agents.reviewer");
  auto no_url = base;
  no_url.replace(no_url.find("    base_url: https://openrouter.ai/api\n"), 40, "");
  CHECK(error_of([&] { load_profiles(no_url); }).subject() == "providers.openrouter.base_url");
}

TEST_CASE("run option invariants") {
  RunOptions o;
  validate(o);
  CHECK(run_options_from_json(to_json(o)) == o);
  auto check_bad = [](RunOptions bad, const std::string& field) {
    const auto e = error_of([&] { validate(bad); });
    CHECK(e.code() == Errc::invalid_argument);
    CHECK(e.subject() == field);
  };
  auto o1 = o;
  o1.max_repair_attempts = -1;
  check_bad(o1, "max_repair_attempts");
  auto o2 = o;
  o2.hil_enabled = true;
  o2.max_feedback_rounds = 0;
  check_bad(o2, "max_feedback_rounds");
  auto o3 = o;
  o3.alignment_top_k = 0;
  check_bad(o3, "alignment_top_k");
  for (double a : {-0.01, 1.01}) {
    auto o4 = o;
    o4.hybrid_alpha = a;
    check_bad(o4, "hybrid_alpha");
  }
  auto o5 = o;
  o5.max_feedback_rounds = 0;
  validate(o5);
  CHECK_FALSE(o.longterm_memory);
  CHECK(o.max_feedback_rounds == 1);
  CHECK(o.max_repair_attempts == 2);
}
