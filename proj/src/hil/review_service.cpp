#include "sie/hil/review_service.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "sie/common/error.hpp"

namespace sie::hil {

using nlohmann::json;
using pipeline::RunState;

std::string_view to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::open: return "open";
    case SessionStatus::submitted: return "submitted";
    case SessionStatus::expired: return "expired";
  }
  return "open";
}

std::optional<SessionStatus> parse_session_status(std::string_view s) noexcept {
  for (auto st : {SessionStatus::open, SessionStatus::submitted, SessionStatus::expired})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

json to_json(const ReviewItem& i) {
  return {{"item_id", i.item_id},
          {"label", i.label},
          {"entity_type", i.entity_type},
          {"chosen", i.chosen ? ontology::to_json(*i.chosen) : json(nullptr)},
          {"judge_score", i.judge_score ? json(*i.judge_score) : json(nullptr)},
          {"source_sentence", i.source_sentence},
          {"section_id", i.section_id},
          {"verdict", std::string(reviewfile::to_string(i.verdict))},
          {"corrected_value", i.corrected_value ? *i.corrected_value : json(nullptr)},
          {"note", i.note},
          {"added", i.added}};
}

json to_json(const ReviewSession& s) {
  json items = json::array();
  for (const auto& i : s.items) items.push_back(to_json(i));
  return {{"session_id", s.session_id},
          {"run_id", s.run_id},
          {"task_id", s.task_id},
          {"model_name", s.model_name},
          {"status", std::string(to_string(s.status))},
          {"opened_at", s.opened_at},
          {"deadline", s.deadline ? json(*s.deadline) : json(nullptr)},
          {"guidance", s.guidance},
          {"items", items}};
}

Decision decision_from_json(const json& j) {
  if (!j.is_object()) fail(Errc::invalid_argument, "a decision must be an object");
  Decision d;
  if (j.contains("item_id") && !j["item_id"].is_null()) {
    if (!j["item_id"].is_string()) fail(Errc::invalid_argument, "item_id must be a string");
    d.item_id = j["item_id"].get<std::string>();
  }
  if (!j.contains("verdict") || !j["verdict"].is_string())
    fail(Errc::invalid_argument, "a decision needs a verdict", "verdict");
  const auto v = reviewfile::parse_verdict(j["verdict"].get<std::string>());
  if (!v) fail(Errc::invalid_argument, "unknown verdict " + j["verdict"].get<std::string>(), "verdict");
  d.verdict = *v;
  if (j.contains("corrected_value") && !j["corrected_value"].is_null())
    d.corrected_value = j["corrected_value"];
  if (j.contains("note")) {
    if (!j["note"].is_string()) fail(Errc::invalid_argument, "note must be a string", "note");
    d.note = j["note"].get<std::string>();
  }
  return d;
}

json to_json(const Decision& d) {
  return {{"item_id", d.item_id ? json(*d.item_id) : json(nullptr)},
          {"verdict", std::string(reviewfile::to_string(d.verdict))},
          {"corrected_value", d.corrected_value ? *d.corrected_value : json(nullptr)},
          {"note", d.note}};
}

SubmitRequest submit_request_from_json(const json& j) {
  if (!j.is_object()) fail(Errc::invalid_argument, "submit body must be an object");
  SubmitRequest r;
  if (j.contains("decisions")) {
    if (!j["decisions"].is_array()) fail(Errc::invalid_argument, "decisions must be an array");
    for (const auto& d : j["decisions"]) r.decisions.push_back(decision_from_json(d));
  }
  auto flag = [&](const char* k) {
    if (!j.contains(k)) return false;
    if (!j[k].is_boolean()) fail(Errc::invalid_argument, std::string(k) + " must be a boolean", k);
    return j[k].get<bool>();
  };
  if (j.contains("guidance")) {
    if (!j["guidance"].is_string()) fail(Errc::invalid_argument, "guidance must be a string");
    r.guidance = j["guidance"].get<std::string>();
  }
  r.approve_remainder = flag("approve_remainder");
  r.request_another_round = flag("request_another_round");
  return r;
}

json to_json(const SubmitRequest& r) {
  json ds = json::array();
  for (const auto& d : r.decisions) ds.push_back(to_json(d));
  return {{"decisions", ds},
          {"guidance", r.guidance},
          {"approve_remainder", r.approve_remainder},
          {"request_another_round", r.request_another_round}};
}

// ------------------------------------------------------------------ service

ReviewService::ReviewService(const pipeline::Engine& engine, Clock clock)
    : engine_(engine), clock_(std::move(clock)) {}

ReviewSession ReviewService::make_session(const pipeline::PipelineRun& run,
                                          std::optional<std::int64_t> deadline) const {
  ReviewSession s;
  s.session_id = "s-" + run.run_id + "-" + std::to_string(run.feedback_rounds);
  s.run_id = run.run_id;
  s.task_id = run.spec.task_id;
  if (auto it = run.profiles.find(AgentRole::extractor); it != run.profiles.end())
    s.model_name = it->second.model.qualified();
  s.opened_at = clock_();
  s.deadline = deadline;
  for (const auto& r : std::get<pipeline::JudgedSet>(run.payload).items) {
    ReviewItem item;
    item.item_id = r.core().item_id;
    item.label = r.core().label;
    item.entity_type = r.core().entity_type;
    item.chosen = r.base.chosen;
    item.judge_score = r.judge_score;
    item.source_sentence = r.core().source_sentence;
    item.section_id = r.core().section_id;
    s.items.push_back(std::move(item));
  }
  return s;
}

std::optional<std::string> ReviewService::add_run(pipeline::PipelineRun run,
                                                  std::optional<std::int64_t> deadline) {
  const auto id = run.run_id;
  const bool waiting = run.state == RunState::AwaitingHumanFeedback;
  {
    std::lock_guard lock(mu_);
    runs_[id] = std::move(run);
  }
  if (!waiting) return std::nullopt;
  {
    std::lock_guard lock(mu_);
    if (auto it = open_by_run_.find(id); it != open_by_run_.end()) return it->second;
  }
  return open_session(id, deadline).session_id;
}

ReviewSession ReviewService::open_session(const std::string& run_id,
                                          std::optional<std::int64_t> deadline) {
  std::lock_guard lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(Errc::unknown_run, "no run " + run_id + " in the review service", run_id);
  if (it->second.state != RunState::AwaitingHumanFeedback)
    fail(Errc::wrong_state,
         "run " + run_id + " is " + std::string(pipeline::to_string(it->second.state)),
         std::string(pipeline::to_string(it->second.state)));
  if (open_by_run_.count(run_id))
    fail(Errc::session_exists, "run " + run_id + " already has open session " + open_by_run_[run_id],
         open_by_run_[run_id]);
  auto s = make_session(it->second, deadline);
  if (sessions_.count(s.session_id))
    fail(Errc::session_exists, "session " + s.session_id + " was already used", s.session_id);
  sessions_[s.session_id] = s;
  open_by_run_[run_id] = s.session_id;
  return s;
}

ReviewSession& ReviewService::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(Errc::session_not_found, "no session " + id, id);
  return it->second;
}

const ReviewSession& ReviewService::find_session(const std::string& id) const {
  return const_cast<ReviewService*>(this)->find_session(id);
}

ReviewSession ReviewService::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  return find_session(id);
}

std::vector<ReviewSession> ReviewService::sessions(std::optional<SessionStatus> status) const {
  std::lock_guard lock(mu_);
  std::vector<ReviewSession> out;
  for (const auto& [_, s] : sessions_)
    if (!status || s.status == *status) out.push_back(s);
  return out;
}

void ReviewService::validate_decisions(const ReviewSession& s,
                                       const std::vector<Decision>& decisions) const {
  if (s.status != SessionStatus::open)
    fail(Errc::session_closed, "session " + s.session_id + " is " + std::string(to_string(s.status)),
         s.session_id);
  for (const auto& d : decisions) {
    if (d.corrected_value && !d.corrected_value->is_object())
      fail(Errc::invalid_argument, "corrected_value must be an object of field values",
           d.item_id.value_or(""));
    if (!d.item_id) {
      if (d.verdict != Verdict::missing)
        fail(Errc::invalid_argument, "a new row must have verdict missing");
      if (!d.corrected_value || !d.corrected_value->contains("label") ||
          !d.corrected_value->contains("entity_type"))
        fail(Errc::invalid_argument, "a missing row needs a record with label and entity_type");
      continue;
    }
    auto it = std::find_if(s.items.begin(), s.items.end(),
                           [&](const auto& i) { return i.item_id == *d.item_id; });
    if (it == s.items.end())
      fail(Errc::unknown_item, "session " + s.session_id + " has no item " + *d.item_id, *d.item_id);
    if (it->added ? d.verdict != Verdict::missing && d.verdict != Verdict::unreviewed
                  : d.verdict == Verdict::missing)
      fail(Errc::invalid_argument,
           it->added ? "reviewer-added rows keep verdict missing"
                     : "verdict missing is only for rows the model did not produce",
           *d.item_id);
    if (d.verdict == Verdict::incorrect && !d.corrected_value && d.note.empty())
      fail(Errc::invalid_argument, "an incorrect verdict needs a correction or a note", *d.item_id);
    if (d.verdict == Verdict::incorrect && d.corrected_value && d.corrected_value->empty() &&
        d.note.empty())
      fail(Errc::invalid_argument, "an incorrect verdict needs a correction or a note", *d.item_id);
  }
}

void ReviewService::store_decisions(ReviewSession& s, const std::vector<Decision>& decisions) {
  for (const auto& d : decisions) {
    if (!d.item_id) {
      ReviewItem item;
      std::size_t n = 1;
      for (const auto& i : s.items) n += i.added ? 1 : 0;
      item.item_id = "new-" + std::to_string(n);
      item.added = true;
      item.verdict = Verdict::missing;
      item.corrected_value = d.corrected_value;
      item.note = d.note;
      const auto& v = *d.corrected_value;
      if (v["label"].is_string()) item.label = v["label"].get<std::string>();
      if (v["entity_type"].is_string()) item.entity_type = v["entity_type"].get<std::string>();
      if (v.contains("source_sentence") && v["source_sentence"].is_string())
        item.source_sentence = v["source_sentence"].get<std::string>();
      if (v.contains("section_id") && v["section_id"].is_string())
        item.section_id = v["section_id"].get<std::string>();
      s.items.push_back(std::move(item));
      continue;
    }
    auto& item = *std::find_if(s.items.begin(), s.items.end(),
                               [&](const auto& i) { return i.item_id == *d.item_id; });
    item.verdict = d.verdict;
    item.corrected_value = d.corrected_value;
    item.note = d.note;
  }
}

ReviewSession ReviewService::record_decisions(const std::string& session_id,
                                              const std::vector<Decision>& decisions) {
  std::lock_guard lock(mu_);
  auto& s = find_session(session_id);
  validate_decisions(s, decisions);
  store_decisions(s, decisions);
  return s;
}

agents::HumanFeedback ReviewService::translate(const ReviewSession& s, const std::string& guidance,
                                               bool request_another_round) {
  agents::HumanFeedback fb;
  fb.approve = !request_another_round;
  std::vector<std::string> lines;
  if (!guidance.empty()) lines.push_back(guidance);
  std::size_t index = 0;
  for (const auto& item : s.items) {
    if (item.added) {
      fb.corrections.push_back({"records[+]", *item.corrected_value});
      continue;
    }
    const auto path = "records[" + std::to_string(index++) + "]";
    if (item.verdict != Verdict::incorrect) continue;
    const bool has_patch = item.corrected_value && !item.corrected_value->empty();
    if (has_patch)
      for (const auto& [k, v] : item.corrected_value->items()) fb.corrections.push_back({path + "." + k, v});
    if (!has_patch && !item.note.empty())
      lines.push_back("Reviewer note on " + item.item_id + " (\"" + item.label + "\"): " + item.note);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) fb.guidance += (i ? "\n" : "") + lines[i];
  return fb;
}

SubmitResult ReviewService::submit(const std::string& session_id, const SubmitRequest& request) {
  agents::HumanFeedback fb;
  {
    std::lock_guard lock(mu_);
    auto& s = find_session(session_id);
    validate_decisions(s, request.decisions);
    auto draft = s;
    store_decisions(draft, request.decisions);
    std::size_t unreviewed = 0;
    for (auto& i : draft.items)
      if (i.verdict == Verdict::unreviewed) {
        if (request.approve_remainder)
          i.verdict = i.added ? Verdict::missing : Verdict::correct;
        else
          ++unreviewed;
      }
    if (unreviewed)
      fail(Errc::precondition,
           std::to_string(unreviewed) + " item(s) are unreviewed; review them or approve the remainder",
           session_id);
    fb = translate(draft, request.guidance, request.request_another_round);
    agents::validate(fb);
    draft.guidance = request.guidance;
    draft.status = SessionStatus::submitted;
    s = std::move(draft);
  }
  return hand_over(session_id, fb);
}

SubmitResult ReviewService::hand_over(const std::string& session_id, const agents::HumanFeedback& fb) {
  pipeline::PipelineRun run;
  std::string run_id;
  {
    std::lock_guard lock(mu_);
    run_id = find_session(session_id).run_id;
    run = runs_.at(run_id);
  }
  try {
    engine_.apply_human_feedback(run, fb);
  } catch (...) {
    std::lock_guard lock(mu_);
    find_session(session_id).status = SessionStatus::open;
    throw;
  }
  {
    std::lock_guard lock(mu_);
    open_by_run_.erase(run_id);
  }
  try {
    engine_.resume(run);
  } catch (const Error& e) {
    spdlog::error("run {} stopped after review: {}", run_id, e.what());
  }
  SubmitResult result{fb, run.state, std::nullopt};
  {
    std::lock_guard lock(mu_);
    runs_[run_id] = run;
  }
  if (run.state == RunState::AwaitingHumanFeedback) result.next_session_id = open_session(run_id).session_id;
  return result;
}

std::vector<std::string> ReviewService::expire_due() {
  std::vector<std::string> due;
  {
    std::lock_guard lock(mu_);
    const auto now = clock_();
    for (auto& [id, s] : sessions_)
      if (s.status == SessionStatus::open && s.deadline && *s.deadline <= now) {
        s.status = SessionStatus::expired;
        due.push_back(id);
        spdlog::warn("review session {} expired; run {} completes without reviewer input", id,
                     s.run_id);
      }
  }
  for (const auto& id : due) {
    try {
      hand_over(id, agents::HumanFeedback{});
    } catch (const Error& e) {
      spdlog::error("expired session {}: {}", id, e.what());
    }
    std::lock_guard lock(mu_);
    find_session(id).status = SessionStatus::expired;
  }
  return due;
}

std::string ReviewService::export_review_file(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto& s = find_session(session_id);
  if (s.status == SessionStatus::open)
    fail(Errc::session_open, "session " + session_id + " is still open", session_id);
  if (s.status == SessionStatus::expired)
    fail(Errc::precondition, "session " + session_id + " expired without verdicts", session_id);
  reviewfile::ReviewFile f{s.task_id, s.run_id, s.model_name, {}};
  std::size_t index = 0;
  for (const auto& item : s.items) {
    reviewfile::ReviewRow row;
    if (item.added) {
      row.field_path = "records[+]";
    } else {
      row.field_path = "records[" + std::to_string(index++) + "]";
      row.original_value = item.label;
      row.judge_score = item.judge_score;
    }
    row.verdict = item.verdict;
    if (item.corrected_value && !item.corrected_value->empty()) row.corrected_value = item.corrected_value->dump();
    f.rows.push_back(std::move(row));
  }
  return reviewfile::write_review_file(f);
}

pipeline::PipelineRun ReviewService::run(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) fail(Errc::unknown_run, "no run " + run_id, run_id);
  return it->second;
}

std::vector<std::string> ReviewService::run_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : runs_) ids.push_back(id);
  return ids;
}

}  // namespace sie::hil
