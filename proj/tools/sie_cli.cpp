// sie: operator entry point for ingestion, runs, review hosting and evaluation.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sie/common/error.hpp"
#include "sie/common/io.hpp"
#include "sie/config/profiles.hpp"
#include "sie/config/task_spec.hpp"
#include "sie/eval/inputs.hpp"
#include "sie/eval/metrics.hpp"
#include "sie/eval/report.hpp"
#include "sie/gateway/gateway.hpp"
#include "sie/gateway/ledger.hpp"
#include "sie/gateway/price_table.hpp"
#include "sie/hil/review_service.hpp"
#include "sie/hil/server.hpp"
#include "sie/ingestion/document.hpp"
#include "sie/memory/memory.hpp"
#include "sie/ontology/store.hpp"
#include "sie/ontology/term.hpp"
#include "sie/pipeline/bootstrap.hpp"
#include "sie/pipeline/engine.hpp"
#include "sie/pipeline/run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Services for one process; members are built in dependency order.
struct Stack {
  sie::config::ProfilesFile profiles;
  std::unique_ptr<sie::gateway::Gateway> gateway;
  std::unique_ptr<sie::gateway::GatewayEmbedder> embedder;
  std::unique_ptr<sie::ontology::OntologyStore> store;
  std::unique_ptr<sie::memory::MemoryStore> memory;
  std::unique_ptr<sie::pipeline::Engine> engine;
};

struct StackFlags {
  std::string profiles;
  std::string fixtures;
  std::string index;
  std::string terms;
  std::string prompts;
  std::string runs;
  std::optional<double> cost_cap;
};

void add_stack_flags(CLI::App* cmd, StackFlags& f, bool profiles_required) {
  auto* p = cmd->add_option("--profiles", f.profiles, "Agent profiles YAML")->check(CLI::ExistingFile);
  if (profiles_required) p->required();
  cmd->add_option("--fixtures", f.fixtures, "Scripted provider fixtures (offline mode)")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--index", f.index, "Ontology index snapshot")->check(CLI::ExistingFile);
  cmd->add_option("--terms", f.terms, "Ontology terms JSONL (indexed in memory)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--prompts", f.prompts, "Directory overriding the built-in prompts")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--cost-cap", f.cost_cap, "Per-run spend cap");
}

Stack make_stack(const StackFlags& f, bool needs_index) {
  Stack s;
  if (!f.profiles.empty()) s.profiles = sie::config::load_profiles(sie::read_file(f.profiles));
  std::optional<sie::pipeline::FixtureDir> fixtures;
  if (!f.fixtures.empty()) {
    fixtures = sie::pipeline::FixtureDir{f.fixtures};
    if (fs::exists(fixtures->prices()))
      sie::pipeline::apply_prices(s.profiles,
                                  sie::gateway::PriceTable::parse(sie::read_file(fixtures->prices())));
  }
  sie::gateway::GatewayOptions gopts;
  gopts.run_cost_cap = f.cost_cap;
  s.gateway = std::make_unique<sie::gateway::Gateway>(std::make_shared<sie::gateway::UsageLedger>(),
                                                      gopts);
  sie::pipeline::register_providers(*s.gateway, s.profiles, fixtures);
  s.embedder = std::make_unique<sie::gateway::GatewayEmbedder>(*s.gateway, s.profiles.embedding_model);
  s.store = std::make_unique<sie::ontology::OntologyStore>();
  if (!f.index.empty()) s.store->load_snapshot(sie::read_file(f.index));
  if (!f.terms.empty())
    s.store->ingest(sie::ontology::parse_terms_jsonl(sie::read_file(f.terms)), *s.embedder);
  if (needs_index && s.store->size() == 0) throw UsageFailure("one of --index or --terms is required");
  s.memory = std::make_unique<sie::memory::MemoryStore>();
  sie::pipeline::EngineOptions eopts;
  if (!f.prompts.empty()) eopts.prompts = sie::agents::Prompts::load_dir(f.prompts);
  if (!f.runs.empty()) {
    fs::create_directories(f.runs);
    eopts.run_store = std::make_shared<sie::pipeline::RunStore>(f.runs);
  }
  s.engine = std::make_unique<sie::pipeline::Engine>(
      sie::pipeline::Services{*s.gateway, *s.store, *s.embedder, *s.memory}, eopts);
  return s;
}

std::pair<std::string, int> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageFailure("--addr must be HOST:PORT");
  try {
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageFailure("--addr must be HOST:PORT");
  }
}

void emit(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-")
    std::cout << bytes;
  else
    sie::write_file_atomic(path, bytes);
}

void write_ledger(const std::string& path, const sie::gateway::Gateway& gw) {
  if (!path.empty()) sie::write_file_atomic(path, gw.shared_ledger()->to_jsonl());
}

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

/// Hosts the review service until `done` returns true or a signal arrives.
void host(sie::hil::ReviewService& service, const std::string& addr, const std::string& token,
          const std::function<bool()>& done) {
  const auto [host_name, port] = split_addr(addr);
  sie::hil::ReviewServer server(service, token);
  const int bound = server.bind(host_name, port);
  spdlog::info("review service listening on http://{}:{}", host_name, bound);
  std::thread worker([&] { server.serve(); });
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop && !done()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  worker.join();
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  StackFlags stack;
  std::string out;
};

int cmd_ingest(IngestArgs& a) {
  if (a.stack.terms.empty()) throw UsageFailure("--terms is required");
  auto s = make_stack(a.stack, true);
  sie::write_file_atomic(a.out, s.store->snapshot());
  spdlog::info("indexed {} terms with {}", s.store->size(), s.store->embedder_id());
  return 0;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  StackFlags stack;
  std::string spec;
  std::string doc;
  std::string out;
  std::string ledger;
  std::string run_id;
  std::string options;
  std::string addr = "127.0.0.1:8765";
  std::string token;
  std::string decisions;
  bool hil = false;
};

int cmd_run(RunArgs& a) {
  auto s = make_stack(a.stack, true);
  const auto spec = sie::config::load_task_spec(sie::read_file(a.spec));
  std::vector<std::string> warnings;
  const auto doc = sie::ingestion::parse_structured_article(sie::read_file(a.doc), &warnings);
  auto options = a.options.empty()
                     ? sie::config::RunOptions{}
                     : sie::config::run_options_from_json(json::parse(sie::read_file(a.options)));
  options.hil_enabled = a.hil;
  auto run = s.engine->start_run(spec, doc, s.profiles.agents, options,
                                 a.run_id.empty() ? std::nullopt : std::optional(a.run_id));
  spdlog::info("run {} started", run.run_id);

  if (!a.hil) {
    const auto out = s.engine->run_to_completion(run);
    emit(a.out, sie::pipeline::serialize_final_output(out));
    write_ledger(a.ledger, *s.gateway);
    return 0;
  }

  s.engine->resume(run);
  sie::hil::ReviewService service(*s.engine);
  const auto id = run.run_id;
  if (const auto sid = service.add_run(std::move(run))) spdlog::info("review session {} open", *sid);
  auto finished = [&] { return sie::pipeline::is_terminal(service.run(id).state); };
  if (!a.decisions.empty()) {
    // Offline review: each file entry is one round's submit request.
    auto rounds = json::parse(sie::read_file(a.decisions));
    if (!rounds.is_array()) rounds = json::array({rounds});
    for (const auto& r : rounds) {
      if (finished()) break;
      const auto open = service.sessions(sie::hil::SessionStatus::open);
      if (open.empty()) break;
      service.submit(open.front().session_id, sie::hil::submit_request_from_json(r));
    }
    if (!finished()) sie::fail(sie::Errc::precondition, "review decisions ran out before completion", id);
  } else {
    host(service, a.addr, a.token, finished);
  }
  const auto final_run = service.run(id);
  if (final_run.state == sie::pipeline::RunState::Failed && final_run.failure)
    sie::fail(sie::Errc::stage, final_run.failure->message, final_run.failure->stage);
  if (final_run.state != sie::pipeline::RunState::Completed)
    sie::fail(sie::Errc::precondition, "run did not complete", id);
  emit(a.out, sie::pipeline::serialize_final_output(
                  std::get<sie::agents::FinalOutput>(final_run.payload)));
  write_ledger(a.ledger, *s.gateway);
  return 0;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  StackFlags stack;
  std::string addr = "127.0.0.1:8765";
  std::string token;
};

int cmd_serve(ServeArgs& a) {
  if (a.stack.runs.empty()) throw UsageFailure("--runs is required");
  auto s = make_stack(a.stack, false);
  sie::pipeline::RunStore runs(a.stack.runs);
  sie::hil::ReviewService service(*s.engine);
  for (const auto& id : runs.list()) {
    auto run = runs.load(id);
    if (run.state != sie::pipeline::RunState::AwaitingHumanFeedback) continue;
    if (const auto sid = service.add_run(std::move(run))) spdlog::info("session {} for run {}", *sid, id);
  }
  host(service, a.addr, a.token, [] { return false; });
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> reviews;
  std::vector<std::string> hil_reviews;
  std::vector<std::string> plain_reviews;
  std::vector<std::string> hil_ledgers;
  std::vector<std::string> plain_ledgers;
  std::string report;
};

void add_prf(sie::eval::ReportBundle& b, const std::vector<std::string>& files,
             std::optional<bool> hil) {
  for (const auto& f : files) {
    const auto bytes = sie::read_file(f);
    const auto rf = sie::reviewfile::parse_review_file(bytes);
    b.prf.push_back({rf.task_id, rf.model_name, hil, sie::eval::counts_from_review(rf)});
  }
}

void add_usage(sie::eval::ReportBundle& b, const std::vector<std::string>& files, bool hil) {
  for (const auto& arg : files) {
    std::string task = "all";
    std::string f = arg;
    if (const auto eq = arg.find('='); eq != std::string::npos && arg.find('/') > eq) {
      task = arg.substr(0, eq);
      f = arg.substr(eq + 1);
    }
    if (task.empty() || !fs::is_regular_file(f)) throw UsageFailure("ledger must be [TASK=]FILE: " + arg);
    const auto events = sie::gateway::UsageLedger::from_jsonl(sie::read_file(f)).events();
    const std::string model = events.empty() ? std::string{} : events.front().model;
    b.usage.push_back({task, model, hil, events});
  }
}

int cmd_eval(EvalArgs& a) {
  if (a.reviews.empty() && a.hil_reviews.empty() && a.plain_reviews.empty())
    throw UsageFailure("at least one --review file is required");
  sie::eval::ReportBundle bundle;
  add_prf(bundle, a.reviews, std::nullopt);
  add_prf(bundle, a.hil_reviews, true);
  add_prf(bundle, a.plain_reviews, false);
  add_usage(bundle, a.hil_ledgers, true);
  add_usage(bundle, a.plain_ledgers, false);
  const auto report = sie::eval::report(bundle);
  emit(a.report, report.dump(2) + "\n");
  if (!a.report.empty() && a.report != "-") {
    const fs::path base(a.report);
    for (const auto& t : sie::eval::plot_tables(report))
      sie::write_file_atomic(base.parent_path() / (base.stem().string() + "." + t.name + ".csv"), t.csv);
  }
  return 0;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
  StackFlags stack;
  std::string snapshot;
  std::string out;
  bool resume = false;
};

int cmd_replay(ReplayArgs& a) {
  auto run = sie::pipeline::restore(sie::read_file(a.snapshot));
  if (a.resume) {
    if (a.stack.profiles.empty()) throw UsageFailure("--resume needs --profiles");
    auto s = make_stack(a.stack, true);
    s.memory->open_run(run.run_id);
    s.engine->resume(run);
  }
  json summary = {{"run_id", run.run_id},
                  {"task_id", run.spec.task_id},
                  {"state", sie::pipeline::to_string(run.state)},
                  {"payload", sie::pipeline::payload_tag(run.payload)},
                  {"feedback_rounds", run.feedback_rounds},
                  {"hil_applied", run.hil_applied}};
  json history = json::array();
  for (const auto& h : run.history) history.push_back(sie::pipeline::to_string(h));
  summary["history"] = history;
  if (run.failure)
    summary["failure"] = {{"stage", run.failure->stage},
                          {"code", run.failure->code},
                          {"message", run.failure->message}};
  std::cerr << summary.dump(2) << "\n";
  if (run.state == sie::pipeline::RunState::Completed)
    emit(a.out, sie::pipeline::serialize_final_output(std::get<sie::agents::FinalOutput>(run.payload)));
  else if (!a.out.empty())
    emit(a.out, sie::pipeline::snapshot(run));
  return 0;
}

// ---------------------------------------------------------------- metrics

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_prf(const std::vector<std::string>& files) {
  const auto m = sie::eval::micro_average(files);
  print_json({{"tp", m.counts.tp},
              {"fp", m.counts.fp},
              {"fn", m.counts.fn},
              {"precision", m.scores.precision},
              {"recall", m.scores.recall},
              {"f1", m.scores.f1}});
  return 0;
}

int cmd_alignment(const std::string& predicted, const std::string& gold) {
  const auto p = sie::eval::parse_concept_rows(sie::read_file(predicted));
  const auto g = sie::eval::parse_concept_rows(sie::read_file(gold));
  const auto r = sie::eval::concept_alignment_rate(p, g);
  print_json({{"aligned", r.aligned},
              {"total", r.total},
              {"rate_percent", r.rate_percent},
              {"mismatched_rows", r.mismatched}});
  return 0;
}

int cmd_coverage(const std::vector<std::string>& sets) {
  std::map<std::string, std::set<std::string>> per_model;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageFailure("--set must be MODEL=FILE");
    per_model[s.substr(0, eq)] = sie::eval::parse_label_set(sie::read_file(s.substr(eq + 1)));
  }
  json out = json::object();
  for (const auto& [m, r] : sie::eval::detection_coverage(per_model))
    out[m] = {{"found", r.found}, {"pool", r.pool}, {"fraction", r.fraction}};
  print_json(out);
  return 0;
}

int cmd_diversity(const std::string& counts) {
  const auto c = sie::eval::parse_type_counts(sie::read_file(counts));
  print_json({{"shannon_h", sie::eval::shannon_diversity(c)}});
  return 0;
}

int cmd_judge_stats(const std::string& scores) {
  const auto v = sie::eval::parse_scores(sie::read_file(scores));
  const auto s = sie::eval::judge_stats(v);
  print_json({{"n", s.n}, {"mean", s.mean}, {"std", s.std}});
  return 0;
}

int cmd_sections(const std::string& headings) {
  const auto h = sie::eval::parse_lines(sie::read_file(headings));
  print_json(sie::eval::section_distribution(h, sie::eval::default_section_aliases()));
  return 0;
}

int cmd_usage(const std::vector<std::string>& ledgers, const std::string& group) {
  const auto g = sie::gateway::parse_usage_group(group);
  if (!g) throw UsageFailure("--group-by must be run, agent_role, model or all");
  std::vector<sie::gateway::UsageEvent> events;
  for (const auto& f : ledgers) {
    const auto e = sie::gateway::UsageLedger::from_jsonl(sie::read_file(f)).events();
    events.insert(events.end(), e.begin(), e.end());
  }
  json rows = json::array();
  for (const auto& r : sie::gateway::summarize_usage(events, *g))
    rows.push_back({{"key", r.key},
                    {"input_tokens", r.input_tokens},
                    {"output_tokens", r.output_tokens},
                    {"total_tokens", r.total_tokens},
                    {"total_cost", r.total_cost},
                    {"total_latency_seconds", r.total_latency_seconds},
                    {"tokens_per_second",
                     r.tokens_per_second ? json(*r.tokens_per_second) : json(nullptr)}});
  print_json(rows);
  return 0;
}

void print_error(const sie::Error& e) {
  json cause = {{"code", std::string(sie::to_string(e.code()))}, {"message", e.what()}};
  if (!e.subject().empty()) cause["subject"] = e.subject();
  std::cerr << json{{"error", cause}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema-driven information extraction with ontology alignment and review"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Index ontology terms");
  c_ingest->add_option("--terms", ingest.stack.terms, "Terms JSONL")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--index", ingest.out, "Index snapshot to write")->required();
  c_ingest->add_option("--profiles", ingest.stack.profiles, "Profiles YAML (embedding model)")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--fixtures", ingest.stack.fixtures, "Scripted provider fixtures")
      ->check(CLI::ExistingDirectory);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run the extraction pipeline over one document");
  c_run->add_option("--spec", run.spec, "Task spec YAML")->required()->check(CLI::ExistingFile);
  c_run->add_option("--doc", run.doc, "Section document JSON")->required()->check(CLI::ExistingFile);
  add_stack_flags(c_run, run.stack, true);
  c_run->add_flag("--hil", run.hil, "Pause for review through the review service");
  c_run->add_option("--out", run.out, "FinalOutput file (stdout when absent)");
  c_run->add_option("--ledger", run.ledger, "Usage ledger JSONL to write");
  c_run->add_option("--run-id", run.run_id, "Explicit run id");
  c_run->add_option("--options", run.options, "RunOptions JSON")->check(CLI::ExistingFile);
  c_run->add_option("--runs", run.stack.runs, "Directory of durable run snapshots");
  c_run->add_option("--addr", run.addr, "Review service address HOST:PORT")->capture_default_str();
  c_run->add_option("--token", run.token, "Bearer token for the review service");
  c_run->add_option("--decisions", run.decisions,
                    "Submit requests to apply instead of hosting the review service")
      ->check(CLI::ExistingFile);

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Host review sessions for paused runs");
  c_serve->add_option("--addr", serve.addr, "HOST:PORT")->capture_default_str();
  c_serve->add_option("--runs", serve.stack.runs, "Directory of durable run snapshots")->required();
  c_serve->add_option("--token", serve.token, "Bearer token required on every request");
  add_stack_flags(c_serve, serve.stack, true);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score review files into a metrics report");
  c_eval->add_option("--review", eval.reviews, "Review files");
  c_eval->add_option("--hil-review", eval.hil_reviews, "Review files from HIL runs");
  c_eval->add_option("--plain-review", eval.plain_reviews, "Review files from non-HIL runs");
  c_eval->add_option("--hil-ledger", eval.hil_ledgers, "[TASK=]FILE usage ledgers from HIL runs");
  c_eval->add_option("--plain-ledger", eval.plain_ledgers, "[TASK=]FILE usage ledgers from non-HIL runs");
  c_eval->add_option("--report", eval.report, "Report JSON (stdout when absent)");

  ReplayArgs replay;
  auto* c_replay = app.add_subcommand("replay", "Inspect or resume a run snapshot");
  c_replay->add_option("--snapshot", replay.snapshot, "Run snapshot")->required()->check(CLI::ExistingFile);
  c_replay->add_flag("--resume", replay.resume, "Continue the run until it completes or pauses");
  c_replay->add_option("--out", replay.out, "FinalOutput (completed) or snapshot (otherwise)");
  add_stack_flags(c_replay, replay.stack, false);

  std::vector<std::string> prf_files;
  auto* c_prf = app.add_subcommand("prf", "Micro-averaged precision, recall and F1");
  c_prf->add_option("--review", prf_files, "Review files")->required()->check(CLI::ExistingFile);

  std::string predicted, gold;
  auto* c_align = app.add_subcommand("alignment-rate", "Concept alignment rate against gold");
  c_align->add_option("--predicted", predicted)->required()->check(CLI::ExistingFile);
  c_align->add_option("--gold", gold)->required()->check(CLI::ExistingFile);

  std::vector<std::string> sets;
  auto* c_cov = app.add_subcommand("coverage", "Detection coverage over the pooled labels");
  c_cov->add_option("--set", sets, "MODEL=FILE with one label per line")->required();

  std::string counts;
  auto* c_div = app.add_subcommand("diversity", "Shannon diversity of entity types");
  c_div->add_option("--counts", counts, "JSON type counts")->required()->check(CLI::ExistingFile);

  std::string scores;
  auto* c_judge = app.add_subcommand("judge-stats", "Mean and sample std of judge scores");
  c_judge->add_option("--scores", scores, "Scores file")->required()->check(CLI::ExistingFile);

  std::string headings;
  auto* c_sec = app.add_subcommand("sections", "Distribution of items over canonical sections");
  c_sec->add_option("--headings", headings, "One heading per item")->required()->check(CLI::ExistingFile);

  std::vector<std::string> ledgers;
  std::string group = "all";
  auto* c_usage = app.add_subcommand("usage", "Token, cost and speed summary");
  c_usage->add_option("--ledger", ledgers, "Ledger JSONL files")->required()->check(CLI::ExistingFile);
  c_usage->add_option("--group-by", group, "run, agent_role, model or all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("sie");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*c_ingest) return cmd_ingest(ingest);
    if (*c_run) return cmd_run(run);
    if (*c_serve) return cmd_serve(serve);
    if (*c_eval) return cmd_eval(eval);
    if (*c_replay) return cmd_replay(replay);
    if (*c_prf) return cmd_prf(prf_files);
    if (*c_align) return cmd_alignment(predicted, gold);
    if (*c_cov) return cmd_coverage(sets);
    if (*c_div) return cmd_diversity(counts);
    if (*c_judge) return cmd_judge_stats(scores);
    if (*c_sec) return cmd_sections(headings);
    if (*c_usage) return cmd_usage(ledgers, group);
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return 2;
  } catch (const sie::Error& e) {
    print_error(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 2;
}
