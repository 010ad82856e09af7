#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sie/agents/agents.hpp"
#include "sie/common/clock.hpp"
#include "sie/gateway/gateway.hpp"
#include "sie/ingestion/chunking.hpp"
#include "sie/memory/memory.hpp"
#include "sie/ontology/store.hpp"
#include "sie/pipeline/run.hpp"

namespace sie::pipeline {

/// Shared services a run uses. All of them tolerate concurrent callers.
struct Services {
  gateway::Gateway& gateway;
  ontology::OntologyStore& store;
  gateway::Embedder& embedder;
  memory::MemoryStore& memory;
};

/// Durable run records: one "<run_id>.ssrun" snapshot per run in a
/// directory, rewritten atomically on every save.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  void save(const PipelineRun& run) const;
  PipelineRun load(const std::string& run_id) const;
  bool contains(const std::string& run_id) const;
  /// Run ids, sorted.
  std::vector<std::string> list() const;
  std::filesystem::path path_for(const std::string& run_id) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Supplies reviewer feedback for a paused run.
using FeedbackSource = std::function<agents::HumanFeedback(const PipelineRun&)>;

/// Called after every state change with the run in its new state.
using TransitionObserver = std::function<void(const PipelineRun&, RunState from)>;

struct EngineOptions {
  agents::Prompts prompts = agents::Prompts::defaults();
  Clock clock = system_clock();
  /// Persisted on every transition when set.
  std::shared_ptr<RunStore> run_store;
  /// Counter for chunk budgets; ByteQuarterCounter when null.
  std::shared_ptr<ingestion::TokenCounter> counter;
};

class Engine {
 public:
  explicit Engine(Services services, EngineOptions options = {});

  /// A new run in Created with an empty payload and a fresh memory scope.
  /// Without an explicit id the run id is derived from the inputs, so equal
  /// inputs give equal outputs. Throws Errc::missing_profile (subject: the
  /// role), Errc::empty_document or Errc::invalid_argument.
  PipelineRun start_run(const config::ExtractionTaskSpec& spec,
                        const ingestion::SourceDocument& doc, const config::ProfileSet& profiles,
                        const config::RunOptions& options,
                        std::optional<std::string> run_id = std::nullopt) const;

  /// Executes one stage and moves the run one step. Throws Errc::wrong_state
  /// while the run waits for a reviewer and Errc::precondition once it is
  /// terminal. A failing stage moves the run to Failed, records the cause
  /// and throws Errc::stage with the agent role as subject.
  void advance(PipelineRun& run) const;

  /// Merges reviewer corrections into the judged records and stores the
  /// guidance for the feedback agent; the run moves to FeedbackApplied.
  /// Throws Errc::wrong_state or Errc::unknown_field_path (the run is left
  /// as it was).
  void apply_human_feedback(PipelineRun& run, const agents::HumanFeedback& feedback) const;

  /// Advances until the run completes or waits for a reviewer.
  void resume(PipelineRun& run) const;

  /// Loops advance() to Completed. With HIL on, each pause blocks on
  /// `source` for at most `feedback_timeout` (Errc::timeout; the run stays
  /// paused). With HIL off, `source` is never called.
  agents::FinalOutput run_to_completion(
      PipelineRun& run, const FeedbackSource& source = {},
      std::optional<std::chrono::milliseconds> feedback_timeout = std::nullopt) const;

  void set_observer(TransitionObserver observer) { observer_ = std::move(observer); }
  const Services& services() const noexcept { return services_; }

 private:
  void transition(PipelineRun& run, RunState to, Payload payload) const;
  void fail_run(PipelineRun& run, const std::string& stage, const std::string& code,
                const std::string& message) const;
  agents::AgentEnv env_for(const PipelineRun& run) const;
  agents::FinalOutput finalize(const PipelineRun& run,
                               std::vector<agents::JudgedItem> records) const;

  Services services_;
  EngineOptions options_;
  TransitionObserver observer_;
};

/// The FinalOutput document with stable key order and formatting; equal
/// outputs give equal bytes.
std::string serialize_final_output(const agents::FinalOutput& output);

}  // namespace sie::pipeline
