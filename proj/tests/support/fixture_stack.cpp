#include "fixture_stack.hpp"

#include "sie/common/io.hpp"
#include "sie/gateway/price_table.hpp"
#include "sie/ontology/term.hpp"
#include "sie/pipeline/bootstrap.hpp"

namespace sie::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return SIE_FIXTURE_DIR; }
fs::path fixture(const std::string& relative) { return fixture_dir() / relative; }
std::string fixture_text(const std::string& relative) { return read_file(fixture(relative)); }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::path(SIE_SCRATCH_DIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

namespace {

config::ProfilesFile priced_profiles() {
  auto p = config::load_profiles(fixture_text("profiles.yaml"));
  pipeline::apply_prices(p, gateway::PriceTable::parse(fixture_text("offline/prices.csv")));
  return p;
}

pipeline::EngineOptions engine_options(std::shared_ptr<pipeline::RunStore> runs) {
  pipeline::EngineOptions o;
  o.clock = stepping_clock(1'760'000'000'000, 1000);
  o.run_store = std::move(runs);
  return o;
}

}  // namespace

FixtureStack::FixtureStack(std::shared_ptr<pipeline::RunStore> runs)
    : profiles(priced_profiles()),
      spec(config::load_task_spec(fixture_text("ner_task.yaml"))),
      doc(ingestion::parse_structured_article(fixture_text("article.json"))),
      embedder(gateway, profiles.embedding_model),
      memory("test", stepping_clock(1'760'000'000'000, 1000)),
      engine(pipeline::Services{gateway, store, embedder, memory}, engine_options(std::move(runs))) {
  pipeline::register_providers(gateway, profiles, pipeline::FixtureDir{fixture("offline")});
  store.ingest(ontology::parse_terms_jsonl(fixture_text("terms.jsonl")), embedder);
}

pipeline::PipelineRun FixtureStack::start(bool hil, std::optional<std::string> run_id) const {
  config::RunOptions o;
  o.hil_enabled = hil;
  return engine.start_run(spec, doc, profiles.agents, o, std::move(run_id));
}

}  // namespace sie::testing
