#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sie/agents/corrections.hpp"
#include "sie/agents/items.hpp"
#include "sie/agents/parse.hpp"
#include "sie/agents/prompts.hpp"
#include "sie/config/profiles.hpp"
#include "sie/config/task_spec.hpp"
#include "sie/gateway/gateway.hpp"
#include "sie/ingestion/chunking.hpp"
#include "sie/memory/memory.hpp"
#include "sie/ontology/store.hpp"

namespace sie::agents {

/// What every agent call needs from its run.
struct AgentEnv {
  gateway::Gateway& gateway;
  memory::MemoryStore& memory;
  const config::ExtractionTaskSpec& spec;
  const Prompts& prompts;
  std::string run_id;
  int max_repair_attempts = 2;
  std::size_t fan_out = 1;
  /// Adds long-term memory notes to the extractor prompt when set.
  gateway::Embedder* longterm_embedder = nullptr;
  bool use_longterm = false;
};

/// Counters a stage accumulates; tests and logs read them.
struct StageReport {
  std::size_t calls = 0;
  std::size_t repairs = 0;
  std::vector<std::string> warnings;
};

/// Extracts records from each chunk in turn. Ids run "i0001", "i0002", ...
/// across chunks in document order. Each record's section comes from the
/// reply (it must be one of the chunk's sections) or, when absent, from
/// the section holding its source sentence. Records land in entity memory.
/// Throws Errc::stage (subject "extractor") once repairs are exhausted.
/// `headings` maps section ids to the headings shown to the model.
std::vector<ExtractedItem> run_extractor(const AgentEnv& env, const config::AgentProfile& profile,
                                         const std::vector<ingestion::Chunk>& chunks,
                                         const std::map<std::string, std::string>& headings = {},
                                         StageReport* report = nullptr);

/// Candidates per item come from hybrid search over "label source_sentence".
/// The model picks one candidate or none; naming anything else counts as a
/// candidate escape and triggers a repair. Items with no candidates skip
/// the model call.
std::vector<AlignedItem> run_alignment(const AgentEnv& env, const config::AgentProfile& profile,
                                       const ontology::OntologyStore& store,
                                       gateway::Embedder& embedder,
                                       const std::vector<ExtractedItem>& items, std::size_t top_k,
                                       double alpha, StageReport* report = nullptr);

/// One score per item, clamped into [0, 1] with a warning. Read-only with
/// respect to the items.
std::vector<JudgedItem> run_judge(const AgentEnv& env, const config::AgentProfile& profile,
                                  const std::vector<AlignedItem>& items,
                                  StageReport* report = nullptr);

/// Folds reviewer input into the records. Without pins or guidance the
/// items pass through untouched and no model is called. Otherwise the
/// model may drop or edit records, after which every pin is re-applied, so
/// reviewer values always win.
std::vector<JudgedItem> run_feedback(const AgentEnv& env, const config::AgentProfile& profile,
                                     const ontology::OntologyStore& store,
                                     const std::vector<JudgedItem>& items,
                                     const std::vector<PinnedCorrection>& pins,
                                     const std::string& guidance, StageReport* report = nullptr);

}  // namespace sie::agents
