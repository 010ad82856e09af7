#include "sie/memory/memory.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "json.hpp"
#include "sie/common/envelope.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"
#include "sie/gateway/types.hpp"

namespace sie::memory {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "SSMEM";
constexpr int kVersion = 1;

AgentRole role_from(const std::string& s) {
  auto r = parse_role(s);
  if (!r) fail(Errc::corrupt_snapshot, "unknown stage in memory file: " + s, s);
  return *r;
}

}  // namespace

MemoryStore::MemoryStore(std::string workspace, Clock clock)
    : workspace_(std::move(workspace)), clock_(std::move(clock)) {}

void MemoryStore::open_run(const std::string& run_id) {
  if (run_id.empty()) fail(Errc::invalid_argument, "run id must not be empty");
  std::lock_guard lock(mu_);
  runs_[run_id] = RunScope{};
}

bool MemoryStore::has_run(std::string_view run_id) const {
  std::lock_guard lock(mu_);
  return runs_.find(run_id) != runs_.end();
}

void MemoryStore::close_run(std::string_view run_id) {
  std::lock_guard lock(mu_);
  if (auto it = runs_.find(run_id); it != runs_.end()) runs_.erase(it);
}

MemoryStore::RunScope& MemoryStore::scope(std::string_view run_id) {
  auto it = runs_.find(run_id);
  if (it == runs_.end())
    fail(Errc::unknown_run, "no memory scope for run " + std::string(run_id), std::string(run_id));
  return it->second;
}

const MemoryStore::RunScope& MemoryStore::scope(std::string_view run_id) const {
  return const_cast<MemoryStore*>(this)->scope(run_id);
}

void MemoryStore::put_context(const std::string& run_id, AgentRole stage, const std::string& key,
                              std::string value) {
  if (key.empty()) fail(Errc::invalid_argument, "context key must not be empty");
  const auto now = clock_();
  std::lock_guard lock(mu_);
  auto& s = scope(run_id);
  s.context[{stage, key}] = ContextEntry{run_id, stage, key, std::move(value), now};
}

std::vector<ContextEntry> MemoryStore::read_context(std::string_view run_id,
                                                    const ContextFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<ContextEntry> out;
  for (const auto& [k, e] : scope(run_id).context) {
    if (filter.stage && e.stage != *filter.stage) continue;
    if (filter.key && e.key != *filter.key) continue;
    out.push_back(e);
  }
  return out;
}

EntityRecord MemoryStore::upsert_entity(const std::string& run_id, std::string_view label,
                                        Occurrence occurrence,
                                        std::optional<ontology::ConceptRef> alignment) {
  auto key = text::normalize_key(label);
  if (key.empty()) fail(Errc::invalid_argument, "entity label must not be empty");
  std::lock_guard lock(mu_);
  auto& s = scope(run_id);
  auto [it, inserted] = s.entities.try_emplace(key);
  auto& rec = it->second;
  if (inserted) {
    rec.run_id = run_id;
    rec.canonical_key = key;
  }
  if (std::find(rec.occurrences.begin(), rec.occurrences.end(), occurrence) ==
      rec.occurrences.end())
    rec.occurrences.push_back(std::move(occurrence));
  if (alignment) rec.latest_alignment = std::move(alignment);
  return rec;
}

std::vector<EntityRecord> MemoryStore::entities(std::string_view run_id) const {
  std::lock_guard lock(mu_);
  std::vector<EntityRecord> out;
  for (const auto& [_, rec] : scope(run_id).entities) out.push_back(rec);
  return out;
}

void MemoryStore::put_longterm(const std::string& key, std::string value,
                               std::optional<gateway::Vector> embedding) {
  if (key.empty()) fail(Errc::invalid_argument, "long-term key must not be empty");
  if (embedding) {
    const double n = gateway::l2_norm(*embedding);
    if (n == 0.0) fail(Errc::invalid_argument, "embedding must be non-zero", key);
    for (auto& x : *embedding) x /= n;
  }
  const auto now = clock_();
  std::lock_guard lock(mu_);
  longterm_[key] = LongTermItem{key, std::move(value), std::move(embedding), now};
}

void MemoryStore::remember(const std::string& key, std::string value,
                           gateway::Embedder& embedder) {
  const std::string texts[] = {value};
  auto vecs = embedder.embed(texts);
  if (vecs.size() != 1) fail(Errc::embedder, "embedder returned no vector", key);
  put_longterm(key, std::move(value), std::move(vecs.front()));
}

std::size_t MemoryStore::longterm_size() const {
  std::lock_guard lock(mu_);
  return longterm_.size();
}

std::vector<LongTermItem> MemoryStore::recall_longterm(std::string_view query, std::size_t k,
                                                       gateway::Embedder* embedder) const {
  if (k == 0) fail(Errc::precondition, "k must be positive");
  std::vector<LongTermItem> items;
  {
    std::lock_guard lock(mu_);
    for (const auto& [_, it] : longterm_) items.push_back(it);
  }
  if (items.empty()) return {};

  const bool all_embedded =
      std::all_of(items.begin(), items.end(), [](const auto& i) { return i.embedding.has_value(); });
  std::vector<std::pair<double, std::size_t>> scored;
  if (embedder && all_embedded) {
    const std::string texts[] = {std::string(query)};
    auto q = embedder->embed(texts);
    if (q.size() != 1) fail(Errc::embedder, "embedder returned no vector for the query");
    const double qn = gateway::l2_norm(q.front());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& e = *items[i].embedding;
      if (e.size() != q.front().size())
        fail(Errc::dimension_mismatch, "query and stored embeddings differ in dimension");
      scored.emplace_back(qn == 0.0 ? 0.0 : gateway::dot(e, q.front()) / qn, i);
    }
  } else {
    auto qw = text::content_words(query);
    std::set<std::string> qset(qw.begin(), qw.end());
    if (qset.empty()) return {};
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto tw = text::content_words(items[i].key + " " + items[i].value);
      std::set<std::string> tset(tw.begin(), tw.end());
      std::size_t hits = 0;
      for (const auto& w : qset) hits += tset.count(w);
      if (hits > 0) scored.emplace_back(double(hits) / double(qset.size()), i);
    }
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return items[a.second].key < items[b.second].key;
  });
  std::vector<LongTermItem> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(items[scored[i].second]);
  return out;
}

std::string MemoryStore::snapshot() const {
  std::lock_guard lock(mu_);
  json runs = json::object();
  for (const auto& [id, s] : runs_) {
    json ctx = json::array();
    for (const auto& [_, e] : s.context)
      ctx.push_back({{"stage", std::string(to_string(e.stage))},
                     {"key", e.key},
                     {"value", e.value},
                     {"created_at", e.created_at}});
    json ents = json::array();
    for (const auto& [_, r] : s.entities) {
      json occ = json::array();
      for (const auto& o : r.occurrences)
        occ.push_back({{"section_id", o.section_id}, {"sentence", o.sentence}});
      json je = {{"canonical_key", r.canonical_key}, {"occurrences", occ}};
      if (r.latest_alignment) je["latest_alignment"] = ontology::to_json(*r.latest_alignment);
      ents.push_back(std::move(je));
    }
    runs[id] = {{"context", ctx}, {"entities", ents}};
  }
  json lt = json::array();
  for (const auto& [_, i] : longterm_) {
    json ji = {{"key", i.key}, {"value", i.value}, {"created_at", i.created_at}};
    if (i.embedding) ji["embedding"] = *i.embedding;
    lt.push_back(std::move(ji));
  }
  const json body = {{"workspace", workspace_}, {"runs", runs}, {"longterm", lt}};
  return seal(kMagic, kVersion, body.dump());
}

void MemoryStore::load_snapshot(std::string_view bytes) {
  const auto body = unseal(kMagic, kVersion, bytes);
  decltype(runs_) runs;
  decltype(longterm_) longterm;
  std::string workspace;
  try {
    const auto j = json::parse(body);
    workspace = j.at("workspace").get<std::string>();
    for (const auto& [id, js] : j.at("runs").items()) {
      RunScope s;
      for (const auto& e : js.at("context")) {
        ContextEntry c{id, role_from(e.at("stage").get<std::string>()),
                       e.at("key").get<std::string>(), e.at("value").get<std::string>(),
                       e.at("created_at").get<std::int64_t>()};
        s.context[{c.stage, c.key}] = std::move(c);
      }
      for (const auto& e : js.at("entities")) {
        EntityRecord r;
        r.run_id = id;
        r.canonical_key = e.at("canonical_key").get<std::string>();
        for (const auto& o : e.at("occurrences"))
          r.occurrences.push_back(
              {o.at("section_id").get<std::string>(), o.at("sentence").get<std::string>()});
        if (e.contains("latest_alignment"))
          r.latest_alignment = ontology::concept_from_json(e["latest_alignment"]);
        s.entities[r.canonical_key] = std::move(r);
      }
      runs[id] = std::move(s);
    }
    for (const auto& e : j.at("longterm")) {
      LongTermItem i{e.at("key").get<std::string>(), e.at("value").get<std::string>(),
                     std::nullopt, e.at("created_at").get<std::int64_t>()};
      if (e.contains("embedding")) i.embedding = e["embedding"].get<gateway::Vector>();
      longterm[i.key] = std::move(i);
    }
  } catch (const json::exception& e) {
    fail(Errc::corrupt_snapshot, std::string("malformed memory file: ") + e.what());
  }
  std::lock_guard lock(mu_);
  workspace_ = std::move(workspace);
  runs_ = std::move(runs);
  longterm_ = std::move(longterm);
}

}  // namespace sie::memory
