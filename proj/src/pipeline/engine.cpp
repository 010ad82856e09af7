#include "sie/pipeline/engine.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "sie/common/digest.hpp"
#include "sie/common/error.hpp"
#include "sie/common/io.hpp"

namespace sie::pipeline {

using nlohmann::json;

// ---------------------------------------------------------------- RunStore

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail(Errc::io, "cannot create run directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path RunStore::path_for(const std::string& run_id) const {
  return dir_ / (run_id + ".ssrun");
}

void RunStore::save(const PipelineRun& run) const { write_file_atomic(path_for(run.run_id), snapshot(run)); }

PipelineRun RunStore::load(const std::string& run_id) const {
  if (!contains(run_id)) fail(Errc::not_found, "no stored run " + run_id, run_id);
  return restore(read_file(path_for(run_id)));
}

bool RunStore::contains(const std::string& run_id) const {
  return std::filesystem::exists(path_for(run_id));
}

std::vector<std::string> RunStore::list() const {
  std::vector<std::string> ids;
  for (const auto& e : std::filesystem::directory_iterator(dir_))
    if (e.is_regular_file() && e.path().extension() == ".ssrun") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ------------------------------------------------------------------ Engine

Engine::Engine(Services services, EngineOptions options)
    : services_(services), options_(std::move(options)) {
  if (!options_.counter) options_.counter = std::make_shared<ingestion::ByteQuarterCounter>();
}

PipelineRun Engine::start_run(const config::ExtractionTaskSpec& spec,
                              const ingestion::SourceDocument& doc,
                              const config::ProfileSet& profiles,
                              const config::RunOptions& options,
                              std::optional<std::string> run_id) const {
  for (auto role : kAllRoles) {
    auto it = profiles.find(role);
    if (it == profiles.end())
      fail(Errc::missing_profile, "no agent profile for " + std::string(to_string(role)),
           std::string(to_string(role)));
    config::validate(it->second);
  }
  if (doc.sections.empty()) fail(Errc::empty_document, "document has no sections", doc.doc_id);
  config::validate(options);

  PipelineRun run;
  run.spec = spec;
  run.document = doc;
  run.profiles = profiles;
  run.options = options;
  if (run_id) {
    if (run_id->empty()) fail(Errc::invalid_argument, "run id must not be empty");
    run.run_id = *run_id;
  } else {
    json seed = {{"spec", config::to_json(spec)},
                 {"doc", json::parse(ingestion::to_json(doc))},
                 {"options", config::to_json(options)},
                 {"profiles", json::array()}};
    for (const auto& [_, p] : profiles) seed["profiles"].push_back(config::to_json(p));
    run.run_id = "run-" + sha256_hex(seed.dump()).substr(0, 16);
  }
  run.usage_ledger_ref = run.run_id;
  run.memory_scope_ref = run.run_id;
  run.created_at = run.updated_at = options_.clock();
  run.history = {RunState::Created};
  services_.memory.open_run(run.memory_scope_ref);
  if (options_.run_store) options_.run_store->save(run);
  return run;
}

agents::AgentEnv Engine::env_for(const PipelineRun& run) const {
  if (!services_.memory.has_run(run.memory_scope_ref))
    services_.memory.open_run(run.memory_scope_ref);
  agents::AgentEnv env{services_.gateway, services_.memory, run.spec, options_.prompts, run.run_id};
  env.max_repair_attempts = run.options.max_repair_attempts;
  env.fan_out = run.options.fan_out;
  env.use_longterm = run.options.longterm_memory;
  env.longterm_embedder = &services_.embedder;
  return env;
}

void Engine::transition(PipelineRun& run, RunState to, Payload payload) const {
  const auto from = run.state;
  if (!is_legal_transition(from, to, run.options.hil_enabled))
    throw std::logic_error("illegal transition " + std::string(to_string(from)) + " -> " +
                           std::string(to_string(to)));
  run.state = to;
  run.payload = std::move(payload);
  run.history.push_back(to);
  if (to == RunState::AwaitingHumanFeedback) ++run.feedback_rounds;
  if (to == RunState::FeedbackApplied) run.hil_applied = true;
  run.updated_at = options_.clock();
  spdlog::debug("run {}: {} -> {}", run.run_id, to_string(from), to_string(to));
  if (options_.run_store) options_.run_store->save(run);
  if (observer_) observer_(run, from);
}

void Engine::fail_run(PipelineRun& run, const std::string& stage, const std::string& code,
                      const std::string& message) const {
  const auto from = run.state;
  run.state = RunState::Failed;
  run.history.push_back(RunState::Failed);
  run.failure = FailureCause{stage, code, message};
  run.updated_at = options_.clock();
  spdlog::error("run {} failed in {}: {}", run.run_id, stage, message);
  if (options_.run_store) options_.run_store->save(run);
  if (observer_) observer_(run, from);
}

agents::FinalOutput Engine::finalize(const PipelineRun& run,
                                     std::vector<agents::JudgedItem> records) const {
  agents::FinalOutput out;
  out.run_id = run.run_id;
  out.judge_summary = agents::mean_score(records);
  out.provenance.doc_id = run.document.doc_id;
  std::set<std::string> used;
  for (const auto& r : records) used.insert(r.core().section_id);
  for (const auto& s : run.document.sections)
    if (used.count(s.section_id)) out.provenance.section_ids.push_back(s.section_id);
  out.records = std::move(records);
  out.hil_applied = run.hil_applied;
  return out;
}

void Engine::advance(PipelineRun& run) const {
  if (is_terminal(run.state))
    fail(Errc::precondition, "run " + run.run_id + " is already " + std::string(to_string(run.state)),
         std::string(to_string(run.state)));
  if (run.state == RunState::AwaitingHumanFeedback)
    fail(Errc::wrong_state, "run " + run.run_id + " is waiting for reviewer feedback",
         std::string(to_string(run.state)));

  std::string stage = "engine";
  try {
    auto env = env_for(run);
    auto profile = [&](AgentRole role) -> const config::AgentProfile& {
      stage = std::string(to_string(role));
      return run.profiles.at(role);
    };
    switch (run.state) {
      case RunState::Created: {
        const auto& p = profile(AgentRole::extractor);
        const auto chunks =
            ingestion::chunk_document(run.document, run.options.chunk_max_units, *options_.counter);
        std::map<std::string, std::string> headings;
        for (const auto& sec : run.document.sections) headings[sec.section_id] = sec.heading;
        auto items = agents::run_extractor(env, p, chunks, headings);
        transition(run, RunState::Extracted, ExtractionDraft{std::move(items)});
        break;
      }
      case RunState::Extracted: {
        const auto& p = profile(AgentRole::alignment);
        auto items = agents::run_alignment(env, p, services_.store, services_.embedder,
                                           std::get<ExtractionDraft>(run.payload).items,
                                           run.options.alignment_top_k, run.options.hybrid_alpha);
        transition(run, RunState::Aligned, AlignedSet{std::move(items)});
        break;
      }
      case RunState::Aligned: {
        const auto& p = profile(AgentRole::judge);
        auto items = agents::run_judge(env, p, std::get<AlignedSet>(run.payload).items);
        const double mean = agents::mean_score(items);
        transition(run, RunState::Judged, JudgedSet{std::move(items), mean});
        break;
      }
      case RunState::Judged: {
        if (run.options.hil_enabled) {
          transition(run, RunState::AwaitingHumanFeedback, run.payload);
          break;
        }
        const auto& p = profile(AgentRole::feedback);
        auto records = agents::run_feedback(env, p, services_.store,
                                            std::get<JudgedSet>(run.payload).items, {}, {});
        auto out = finalize(run, std::move(records));
        transition(run, RunState::Completed, std::move(out));
        break;
      }
      case RunState::FeedbackApplied: {
        const auto& p = profile(AgentRole::feedback);
        const auto& judged = std::get<JudgedSet>(run.payload).items;
        auto records =
            agents::run_feedback(env, p, services_.store, judged, run.pins, run.guidance);
        if (!run.approve && run.feedback_rounds < run.options.max_feedback_rounds) {
          std::vector<agents::AlignedItem> aligned;
          for (const auto& r : records) aligned.push_back(r.base);
          auto rejudged = agents::run_judge(env, profile(AgentRole::judge), aligned);
          agents::apply_pins(rejudged, run.pins, records, services_.store);
          const double mean = agents::mean_score(rejudged);
          transition(run, RunState::AwaitingHumanFeedback, JudgedSet{std::move(rejudged), mean});
        } else {
          auto out = finalize(run, std::move(records));
          transition(run, RunState::Completed, std::move(out));
        }
        break;
      }
      default:
        break;
    }
  } catch (const Error& e) {
    fail_run(run, stage, std::string(to_string(e.code())), e.what());
    throw Error(Errc::stage, stage + " stage failed: " + e.what(), stage);
  } catch (const std::logic_error&) {
    throw;
  } catch (const std::exception& e) {
    fail_run(run, stage, "internal", e.what());
    throw Error(Errc::stage, stage + " stage failed: " + e.what(), stage);
  }
}

void Engine::apply_human_feedback(PipelineRun& run, const agents::HumanFeedback& feedback) const {
  if (run.state != RunState::AwaitingHumanFeedback)
    fail(Errc::wrong_state,
         "run " + run.run_id + " is " + std::string(to_string(run.state)) +
             ", not AwaitingHumanFeedback",
         std::string(to_string(run.state)));
  agents::validate(feedback);
  auto judged = std::get<JudgedSet>(run.payload);
  auto added = run.added_records;
  auto pins = agents::pin_corrections(judged.items, feedback.corrections, run.spec, run.document,
                                      services_.store, added);
  const auto before = judged.items;
  agents::apply_pins(judged.items, pins, before, services_.store);
  judged.judge_mean = agents::mean_score(judged.items);

  run.added_records = added;
  run.pins.insert(run.pins.end(), pins.begin(), pins.end());
  run.guidance = feedback.guidance;
  run.approve = feedback.approve;
  if (!feedback.guidance.empty() && services_.memory.has_run(run.memory_scope_ref))
    services_.memory.put_context(run.memory_scope_ref, AgentRole::feedback, "human_guidance",
                                 feedback.guidance);
  transition(run, RunState::FeedbackApplied, std::move(judged));
}

void Engine::resume(PipelineRun& run) const {
  while (!is_terminal(run.state) && run.state != RunState::AwaitingHumanFeedback) advance(run);
}

agents::FinalOutput Engine::run_to_completion(
    PipelineRun& run, const FeedbackSource& source,
    std::optional<std::chrono::milliseconds> feedback_timeout) const {
  if (is_terminal(run.state))
    fail(Errc::precondition, "run " + run.run_id + " is already " + std::string(to_string(run.state)),
         std::string(to_string(run.state)));
  while (run.state != RunState::Completed) {
    if (run.state == RunState::Failed)
      fail(Errc::stage, "run " + run.run_id + " failed", run.failure ? run.failure->stage : "engine");
    if (run.state != RunState::AwaitingHumanFeedback) {
      advance(run);
      continue;
    }
    if (!source) fail(Errc::precondition, "run waits for feedback but no feedback source was given");
    agents::HumanFeedback fb;
    if (!feedback_timeout) {
      fb = source(run);
    } else {
      auto promise = std::make_shared<std::promise<agents::HumanFeedback>>();
      auto fut = promise->get_future();
      std::thread([promise, source, view = run] {
        try {
          promise->set_value(source(view));
        } catch (...) {
          promise->set_exception(std::current_exception());
        }
      }).detach();
      if (fut.wait_for(*feedback_timeout) != std::future_status::ready)
        fail(Errc::timeout, "no reviewer feedback within " +
                                std::to_string(feedback_timeout->count()) + " ms",
             run.run_id);
      fb = fut.get();
    }
    apply_human_feedback(run, fb);
  }
  return std::get<agents::FinalOutput>(run.payload);
}

std::string serialize_final_output(const agents::FinalOutput& output) {
  return agents::to_json(output).dump(2) + "\n";
}

}  // namespace sie::pipeline
