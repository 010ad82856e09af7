#include <thread>

#include "doctest.h"
#include "fixture_stack.hpp"
#include "httplib.h"
#include "sie/common/error.hpp"
#include "sie/eval/metrics.hpp"
#include "sie/hil/review_service.hpp"
#include "sie/hil/server.hpp"

using namespace sie;
using namespace sie::hil;
using nlohmann::json;
using pipeline::RunState;
using sie::testing::FixtureStack;

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

pipeline::PipelineRun paused(FixtureStack& s, const std::string& id = "hil-run", int rounds = 1) {
  config::RunOptions o;
  o.hil_enabled = true;
  o.max_feedback_rounds = rounds;
  auto run = s.engine.start_run(s.spec, s.doc, s.profiles.agents, o, id);
  s.engine.resume(run);
  REQUIRE(run.state == RunState::AwaitingHumanFeedback);
  return run;
}

/// Replaces the judged records with n copies of the first one.
void resize_records(pipeline::PipelineRun& run, std::size_t n) {
  auto& set = std::get<pipeline::JudgedSet>(run.payload);
  const auto proto = set.items.front();
  set.items.clear();
  for (std::size_t i = 0; i < n; ++i) {
    auto r = proto;
    char id[16];
    std::snprintf(id, sizeof id, "i%04zu", i + 1);
    r.core().item_id = id;
    set.items.push_back(r);
  }
}

Decision verdict(const std::string& id, Verdict v, std::optional<json> patch = std::nullopt,
                 std::string note = {}) {
  return {id, v, std::move(patch), std::move(note)};
}

Decision missing_row(json record) { return {std::nullopt, Verdict::missing, std::move(record), {}}; }

}  // namespace

TEST_CASE("a paused run gets a session mirroring its judged records") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto run = paused(s);
  const auto sid = svc.add_run(run);
  REQUIRE(sid);
  const auto session = svc.session(*sid);
  const auto& judged = std::get<pipeline::JudgedSet>(run.payload).items;
  REQUIRE(session.items.size() == judged.size());
  for (std::size_t i = 0; i < judged.size(); ++i) {
    const auto& it = session.items[i];
    CHECK(it.item_id == judged[i].core().item_id);
    CHECK(it.label == judged[i].core().label);
    CHECK(it.entity_type == judged[i].core().entity_type);
    CHECK(it.chosen == judged[i].base.chosen);
    CHECK(it.judge_score == judged[i].judge_score);
    CHECK(it.source_sentence == judged[i].core().source_sentence);
    CHECK(it.section_id == judged[i].core().section_id);
    CHECK(it.verdict == Verdict::unreviewed);
  }
  CHECK(session.status == SessionStatus::open);
  CHECK(session.task_id == "ner-neuro");
  CHECK(svc.run("hil-run").state == RunState::AwaitingHumanFeedback);
}

TEST_CASE("five judged items give five unreviewed review items") {
  FixtureStack s;
  ReviewService svc(s.engine);
  auto run = paused(s);
  resize_records(run, 5);
  const auto session = svc.session(*svc.add_run(run));
  CHECK(session.items.size() == 5);
  CHECK(std::all_of(session.items.begin(), session.items.end(),
                    [](auto& i) { return i.verdict == Verdict::unreviewed; }));
}

TEST_CASE("session opening rules") {
  FixtureStack s;
  ReviewService svc(s.engine);
  svc.add_run(paused(s));
  CHECK(error_of([&] { svc.open_session("hil-run"); }).code() == Errc::session_exists);
  svc.add_run(s.start(true, "fresh"));
  CHECK(error_of([&] { svc.open_session("fresh"); }).code() == Errc::wrong_state);
  CHECK(error_of([&] { svc.open_session("ghost"); }).code() == Errc::unknown_run);
  CHECK(error_of([&] { svc.session("nope"); }).code() == Errc::session_not_found);
}

TEST_CASE("verdicts translate into corrections") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));

  auto all_correct = svc.session(sid);
  for (auto& i : all_correct.items) i.verdict = Verdict::correct;
  const auto approve = ReviewService::translate(all_correct, "", false);
  CHECK(approve.approve);
  CHECK(approve.corrections.empty());
  CHECK(approve.guidance.empty());

  auto one = all_correct;
  one.items[2].verdict = Verdict::incorrect;
  one.items[2].corrected_value = json{{"label", "hippocampal formation"}};
  const auto fb = ReviewService::translate(one, "", false);
  REQUIRE(fb.corrections.size() == 1);
  CHECK(fb.corrections[0].field_path == "records[2].label");
  CHECK(fb.corrections[0].new_value == "hippocampal formation");

  auto noted = all_correct;
  noted.items[5].verdict = Verdict::incorrect;
  noted.items[5].note = "not a behavior here";
  const auto g = ReviewService::translate(noted, "Be strict.", true);
  CHECK(g.corrections.empty());
  CHECK(g.guidance.find("Be strict.") == 0);
  CHECK(g.guidance.find("not a behavior here") != std::string::npos);
  CHECK_FALSE(g.approve);
}

TEST_CASE("bad decisions leave the session as it was") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  const auto before = svc.session(sid);
  CHECK(error_of([&] { svc.record_decisions(sid, {verdict("i0001", Verdict::correct), verdict("i9999", Verdict::correct)}); })
            .code() == Errc::unknown_item);
  CHECK(error_of([&] { svc.record_decisions(sid, {verdict("i0001", Verdict::incorrect)}); }).code() ==
        Errc::invalid_argument);
  CHECK(error_of([&] { svc.record_decisions(sid, {verdict("i0001", Verdict::missing)}); }).code() ==
        Errc::invalid_argument);
  CHECK(error_of([&] { svc.record_decisions(sid, {missing_row(json{{"label", "x"}})}); }).code() ==
        Errc::invalid_argument);
  CHECK(svc.session(sid) == before);
  CHECK(error_of([&] { svc.submit(sid, {{verdict("i0042", Verdict::correct)}, "", true, false}); }).code() ==
        Errc::unknown_item);
  CHECK(svc.session(sid).status == SessionStatus::open);
}

TEST_CASE("unreviewed items block submission unless the remainder is approved") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  CHECK(error_of([&] { svc.submit(sid, {}); }).code() == Errc::precondition);
  CHECK(svc.session(sid).status == SessionStatus::open);
  const auto result = svc.submit(sid, {{}, "", true, false});
  CHECK(result.run_state == RunState::Completed);
  CHECK(result.feedback.approve);
  CHECK(result.feedback.corrections.empty());
  CHECK(svc.session(sid).status == SessionStatus::submitted);
  const auto run = svc.run("hil-run");
  CHECK(std::get<agents::FinalOutput>(run.payload).hil_applied);
}

TEST_CASE("a submitted session resumes the run exactly once") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  svc.submit(sid, {{}, "", true, false});
  CHECK(error_of([&] { svc.submit(sid, {{}, "", true, false}); }).code() == Errc::session_closed);
  CHECK(error_of([&] { svc.record_decisions(sid, {verdict("i0001", Verdict::correct)}); }).code() ==
        Errc::session_closed);
  const auto run = svc.run("hil-run");
  CHECK(std::count(run.history.begin(), run.history.end(), RunState::FeedbackApplied) == 1);
}

TEST_CASE("concurrent submits on one session resume the run once") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  std::atomic<int> ok{0}, closed{0};
  std::vector<std::thread> ts;
  for (int i = 0; i < 6; ++i)
    ts.emplace_back([&] {
      try {
        svc.submit(sid, {{}, "", true, false});
        ++ok;
      } catch (const Error& e) {
        if (e.code() == Errc::session_closed) ++closed;
      }
    });
  for (auto& t : ts) t.join();
  CHECK(ok == 1);
  CHECK(closed == 5);
}

TEST_CASE("corrections and added rows reach the final output verbatim") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  svc.record_decisions(sid, {verdict("i0003", Verdict::incorrect, json{{"label", "hippocampal formation"}})});
  const auto result = svc.submit(
      sid, {{missing_row(json{{"label", "mice"}, {"entity_type", "SPECIES"}, {"section_id", "abs"},
                              {"chosen", "NCBITaxon:10090"}})},
            "",
            true,
            false});
  CHECK(result.run_state == RunState::Completed);
  const auto out = std::get<agents::FinalOutput>(svc.run("hil-run").payload);
  REQUIRE(out.records.size() == 8);
  CHECK(out.records[2].core().label == "hippocampal formation");
  CHECK(out.records[7].core().label == "mice");
  CHECK(out.records[7].base.chosen->curie == "NCBITaxon:10090");
}

TEST_CASE("asking for another round opens a second session") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s, "two-rounds", 2));
  const auto first = svc.submit(sid, {{verdict("i0001", Verdict::incorrect, std::nullopt, "check this")}, "", true, true});
  CHECK(first.run_state == RunState::AwaitingHumanFeedback);
  REQUIRE(first.next_session_id);
  CHECK(*first.next_session_id != sid);
  CHECK(svc.sessions(SessionStatus::open).size() == 1);
  const auto second = svc.submit(*first.next_session_id, {{}, "", true, false});
  CHECK(second.run_state == RunState::Completed);
  const auto run = svc.run("two-rounds");
  CHECK(run.feedback_rounds == 2);
}

TEST_CASE("export needs a submitted session") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  CHECK(error_of([&] { svc.export_review_file(sid); }).code() == Errc::session_open);
}

TEST_CASE("a 39-record all-correct session exports 39 correct rows") {
  FixtureStack s;
  ReviewService svc(s.engine);
  auto run = paused(s);
  resize_records(run, 39);
  const auto sid = *svc.add_run(run);
  svc.submit(sid, {{}, "", true, false});
  const auto bytes = svc.export_review_file(sid);
  const auto file = reviewfile::parse_review_file(bytes);
  CHECK(file.task_id == "ner-neuro");
  CHECK(file.run_id == "hil-run");
  CHECK(file.model_name == "openrouter/anthropic/claude-3.7-sonnet");
  REQUIRE(file.rows.size() == 39);
  for (const auto& r : file.rows) CHECK(r.verdict == Verdict::correct);
  CHECK(eval::counts_from_review(bytes) == eval::ConfusionCounts{39, 0, 0});
}

TEST_CASE("missing rows export without an original value and counts match the verdicts") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  svc.submit(sid, {{verdict("i0002", Verdict::incorrect, json{{"chosen", "UBERON:0000956"}}),
                    verdict("i0006", Verdict::incorrect, std::nullopt, "wrong sense"),
                    missing_row(json{{"label", "mice"}, {"entity_type", "SPECIES"}}),
                    missing_row(json{{"label", "silicon probes"}, {"entity_type", "CELL_TYPE"}})},
                   "",
                   true,
                   false});
  const auto bytes = svc.export_review_file(sid);
  const auto file = reviewfile::parse_review_file(bytes);
  std::size_t missing = 0;
  eval::ConfusionCounts direct;
  for (const auto& item : svc.session(sid).items) {
    direct.tp += item.verdict == Verdict::correct;
    direct.fp += item.verdict == Verdict::incorrect;
    direct.fn += item.verdict == Verdict::missing;
  }
  for (const auto& r : file.rows)
    if (r.verdict == Verdict::missing) {
      ++missing;
      CHECK(r.original_value.empty());
      CHECK_FALSE(r.judge_score);
    }
  CHECK(missing == 2);
  CHECK(eval::counts_from_review(bytes) == direct);
  CHECK(direct == eval::ConfusionCounts{5, 2, 2});
}

TEST_CASE("expired sessions let the run finish on its own") {
  FixtureStack s;
  std::int64_t now = 1000;
  ReviewService svc(s.engine, [&] { return now; });
  const auto sid = *svc.add_run(paused(s), 5000);
  CHECK(svc.expire_due().empty());
  now = 6000;
  CHECK(svc.expire_due() == std::vector<std::string>{sid});
  CHECK(svc.session(sid).status == SessionStatus::expired);
  CHECK(svc.run("hil-run").state == RunState::Completed);
  CHECK(error_of([&] { svc.submit(sid, {{}, "", true, false}); }).code() == Errc::session_closed);
}

TEST_CASE("wire forms of review items and requests") {
  const auto d = decision_from_json(json::parse(R"({"item_id": "i0001", "verdict": "incorrect", "corrected_value": {"label": "x"}, "note": "n"})"));
  CHECK(d.item_id == "i0001");
  CHECK(d.verdict == Verdict::incorrect);
  CHECK(decision_from_json(to_json(d)).corrected_value == d.corrected_value);
  CHECK(error_of([] { decision_from_json(json{{"verdict", "maybe"}}); }).code() == Errc::invalid_argument);
  const auto r = submit_request_from_json(json::parse(R"({"guidance": "g", "approve_remainder": true})"));
  CHECK(r.guidance == "g");
  CHECK(r.approve_remainder);
  CHECK_FALSE(r.request_another_round);
  CHECK(error_of([] { submit_request_from_json(json{{"approve_remainder", "yes"}}); }).code() ==
        Errc::invalid_argument);
}

TEST_CASE("error codes map to HTTP statuses") {
  CHECK(http_status(Errc::session_not_found) == 404);
  CHECK(http_status(Errc::unknown_item) == 422);
  CHECK(http_status(Errc::session_closed) == 409);
  CHECK(http_status(Errc::session_open) == 409);
  CHECK(http_status(Errc::syntax) == 400);
  CHECK(http_status(Errc::io) == 500);
}

TEST_CASE("HTTP endpoints") {
  FixtureStack s;
  ReviewService svc(s.engine);
  const auto sid = *svc.add_run(paused(s));
  ReviewServer server(svc, "secret");
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread th([&] { server.serve(); });
  httplib::Client cli("127.0.0.1", port);
  const httplib::Headers auth{{"Authorization", "Bearer secret"}};

  SUBCASE("token") {
    auto res = cli.Get("/sessions");
    REQUIRE(res);
    CHECK(res->status == 401);
    res = cli.Get("/sessions", {{"Authorization", "Bearer wrong"}});
    CHECK(res->status == 401);
  }
  SUBCASE("listing and reading sessions") {
    auto res = cli.Get("/sessions?status=open", auth);
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto list = json::parse(res->body)["sessions"];
    REQUIRE(list.size() == 1);
    CHECK(list[0]["session_id"] == sid);
    CHECK(list[0]["items"].size() == 7);
    for (const char* k : {"session_id", "run_id", "items", "status", "opened_at", "deadline"}) CHECK(list[0].contains(k));
    for (const char* k : {"item_id", "label", "entity_type", "chosen", "judge_score", "source_sentence", "section_id",
                          "verdict", "corrected_value"})
      CHECK(list[0]["items"][0].contains(k));
    CHECK(json::parse(cli.Get("/sessions?status=submitted", auth)->body)["sessions"].empty());
    CHECK(cli.Get("/sessions?status=bogus", auth)->status == 422);
    res = cli.Get("/sessions/" + sid, auth);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["run_id"] == "hil-run");
    res = cli.Get("/sessions/none", auth);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"]["code"] == "SessionNotFound");
  }
  SUBCASE("decisions, submit and export") {
    auto res = cli.Post("/sessions/" + sid + "/decisions", auth,
                        R"({"decisions": [{"item_id": "i0003", "verdict": "incorrect", "corrected_value": {"label": "hippocampal formation"}}]})",
                        "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["items"][2]["verdict"] == "incorrect");
    res = cli.Post("/sessions/" + sid + "/decisions", auth, R"({"decisions": [{"item_id": "zzz", "verdict": "correct"}]})",
                   "application/json");
    CHECK(res->status == 422);
    const auto err = json::parse(res->body)["error"];
    CHECK(err["code"] == "UnknownItem");
    CHECK(err["subject"] == "zzz");
    CHECK(cli.Post("/sessions/" + sid + "/decisions", auth, "not json", "application/json")->status == 400);
    CHECK(cli.Get("/sessions/" + sid + "/export", auth)->status == 409);
    res = cli.Post("/sessions/" + sid + "/submit", auth, R"({"approve_remainder": true})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["run_state"] == "Completed");
    CHECK(body["feedback"]["corrections"].size() == 1);
    CHECK(body["session"]["status"] == "submitted");
    CHECK(body["next_session_id"].is_null());
    CHECK(cli.Post("/sessions/" + sid + "/submit", auth, R"({"approve_remainder": true})", "application/json")->status ==
          409);
    res = cli.Get("/sessions/" + sid + "/export", auth);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type").find("text/csv") == 0);
    CHECK(eval::counts_from_review(res->body) == eval::ConfusionCounts{6, 1, 0});
  }
  server.stop();
  th.join();
}
