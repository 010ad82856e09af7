#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "sie/config/profiles.hpp"
#include "sie/config/task_spec.hpp"
#include "sie/gateway/gateway.hpp"
#include "sie/ingestion/document.hpp"
#include "sie/memory/memory.hpp"
#include "sie/ontology/store.hpp"
#include "sie/pipeline/engine.hpp"

namespace sie::testing {

std::filesystem::path fixture_dir();
std::filesystem::path fixture(const std::string& relative);
std::string fixture_text(const std::string& relative);

/// Fresh scratch directory under the build tree, emptied on creation.
std::filesystem::path scratch_dir(const std::string& name);

/// The whole offline stack over the bundled fixtures: scripted chat,
/// hashing embeddings, the fixture ontology slice and a stepping clock.
struct FixtureStack {
  explicit FixtureStack(std::shared_ptr<pipeline::RunStore> runs = nullptr);

  config::ProfilesFile profiles;
  config::ExtractionTaskSpec spec;
  ingestion::SourceDocument doc;
  gateway::Gateway gateway;
  gateway::GatewayEmbedder embedder;
  ontology::OntologyStore store;
  memory::MemoryStore memory;
  pipeline::Engine engine;

  pipeline::PipelineRun start(bool hil, std::optional<std::string> run_id = std::nullopt) const;
};

}  // namespace sie::testing
