#include "sie/ontology/store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>

#include "json.hpp"
#include "sie/common/envelope.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::ontology {

using nlohmann::json;

namespace {

constexpr std::string_view kIndexMagic = "SSIDX";
constexpr int kIndexVersion = 1;

std::vector<std::string> unique_sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<std::string> term_tokens(const OntologyTerm& t) {
  auto toks = text::content_words(t.label);
  for (const auto& s : t.synonyms) {
    auto more = text::content_words(s);
    toks.insert(toks.end(), more.begin(), more.end());
  }
  auto def = text::content_words(t.definition);
  toks.insert(toks.end(), def.begin(), def.end());
  return unique_sorted(std::move(toks));
}

std::vector<std::string> query_tokens(std::string_view q) {
  auto toks = text::content_words(q);
  if (toks.empty()) toks = text::words(q);
  return unique_sorted(std::move(toks));
}

bool hit_before(const SearchHit& a, double sa, const SearchHit& b, double sb) {
  if (sa != sb) return sa > sb;
  return a.term.curie < b.term.curie;
}

}  // namespace

double fuse(double lexical_score, double vector_score, double alpha) noexcept {
  return alpha * vector_score + (1.0 - alpha) * lexical_score;
}

std::vector<std::size_t> rank_fused(std::span<const ScoredCandidate> candidates, double alpha,
                                    std::size_t k) {
  std::vector<double> fused(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    fused[i] = fuse(candidates[i].lexical_score, candidates[i].vector_score, alpha);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fused[a] != fused[b]) return fused[a] > fused[b];
    return candidates[a].curie < candidates[b].curie;
  });
  if (order.size() > k) order.resize(k);
  return order;
}

std::string OntologyStore::indexed_text(const OntologyTerm& term) {
  if (term.definition.empty()) return term.label;
  return term.label + ". " + term.definition;
}

std::size_t OntologyStore::ingest(std::vector<OntologyTerm> terms, gateway::Embedder& embedder) {
  if (terms.empty()) fail(Errc::precondition, "ingest() needs at least one term");
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (!seen.insert(t.curie).second)
      fail(Errc::duplicate_in_batch, "curie " + t.curie + " appears twice in the batch", t.curie);
    validate(t);
  }
  {
    std::shared_lock lock(mu_);
    if (!embedder_id_.empty() && !entries_.empty() && embedder_id_ != embedder.model_id())
      fail(Errc::embedder,
           "index was built with " + embedder_id_ + ", not " + embedder.model_id(),
           embedder.model_id());
  }

  std::vector<std::string> texts;
  texts.reserve(terms.size());
  for (const auto& t : terms) texts.push_back(indexed_text(t));
  std::vector<gateway::Vector> vectors;
  try {
    vectors = embedder.embed(texts);
  } catch (const Error& e) {
    fail(Errc::embedder, std::string("embedding the batch failed: ") + e.what(),
         embedder.model_id());
  }
  if (vectors.size() != terms.size())
    fail(Errc::embedder, "embedder returned the wrong number of vectors", embedder.model_id());

  std::unique_lock lock(mu_);
  embedder_id_ = embedder.model_id();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Entry e{std::move(terms[i]), std::move(vectors[i]), {}};
    e.tokens = term_tokens(e.term);
    auto key = e.term.curie;
    entries_.insert_or_assign(std::move(key), std::move(e));
  }
  rebuild_document_frequencies();
  return seen.size();
}

void OntologyStore::rebuild_document_frequencies() {
  df_.clear();
  for (const auto& [_, e] : entries_)
    for (const auto& tok : e.tokens) ++df_[tok];
}

void OntologyStore::require_nonempty() const {
  if (entries_.empty()) fail(Errc::empty_index, "the ontology index holds no terms");
}

void OntologyStore::check_query(std::string_view query, std::size_t k) const {
  if (text::collapse_whitespace(query).empty())
    fail(Errc::precondition, "search query must be non-empty");
  if (k == 0) fail(Errc::precondition, "k must be at least 1");
}

void OntologyStore::check_embedder(const gateway::Embedder& embedder) const {
  if (embedder.model_id() != embedder_id_)
    fail(Errc::embedder,
         "index was built with " + embedder_id_ + ", query embedder is " + embedder.model_id(),
         embedder.model_id());
}

gateway::Vector OntologyStore::embed_query(std::string_view query,
                                           gateway::Embedder& embedder) const {
  const std::string q(query);
  try {
    auto v = embedder.embed(std::span<const std::string>(&q, 1));
    if (v.size() != 1) fail(Errc::embedder, "embedder returned no vector for the query");
    return std::move(v.front());
  } catch (const Error& e) {
    if (e.code() == Errc::embedder) throw;
    fail(Errc::embedder, std::string("embedding the query failed: ") + e.what(),
         embedder.model_id());
  }
}

std::vector<double> OntologyStore::lexical_raw(std::string_view query) const {
  const auto q = query_tokens(query);
  const double n = static_cast<double>(entries_.size());
  const auto idf = [&](const std::string& tok) {
    const auto it = df_.find(tok);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((n + 1.0) / (df + 0.5));
  };
  double denom = 0.0;
  for (const auto& tok : q) denom += idf(tok);
  const auto qkey = text::normalize_key(query);

  std::vector<double> raw;
  raw.reserve(entries_.size());
  for (const auto& [_, e] : entries_) {
    double shared = 0.0;
    bool any = false;
    for (const auto& tok : q)
      if (std::binary_search(e.tokens.begin(), e.tokens.end(), tok)) {
        shared += idf(tok);
        any = true;
      }
    if (!any) {
      raw.push_back(0.0);
      continue;
    }
    double score = denom > 0.0 ? shared / denom : 0.0;
    if (text::normalize_key(e.term.label) == qkey) {
      score += 1.0;
    } else {
      for (const auto& s : e.term.synonyms)
        if (text::normalize_key(s) == qkey) {
          score += 0.5;
          break;
        }
    }
    raw.push_back(std::max(score, 1e-12));
  }
  return raw;
}

std::vector<SearchHit> OntologyStore::lexical_search(std::string_view query,
                                                     std::size_t k) const {
  check_query(query, k);
  std::shared_lock lock(mu_);
  require_nonempty();
  const auto raw = lexical_raw(query);
  const double best = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  std::vector<SearchHit> hits;
  std::size_t i = 0;
  for (const auto& [_, e] : entries_) {
    if (raw[i] > 0.0) {
      const double s = raw[i] / best;
      hits.push_back({e.term, s, 0.0, s});
    }
    ++i;
  }
  std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return hit_before(a, a.lexical_score, b, b.lexical_score);
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<SearchHit> OntologyStore::vector_search(std::string_view query, std::size_t k,
                                                    gateway::Embedder& embedder) const {
  check_query(query, k);
  {
    std::shared_lock lock(mu_);
    require_nonempty();
    check_embedder(embedder);
  }
  const auto qv = embed_query(query, embedder);
  std::shared_lock lock(mu_);
  std::vector<SearchHit> hits;
  hits.reserve(entries_.size());
  for (const auto& [_, e] : entries_) {
    const double s = std::clamp((gateway::dot(qv, e.embedding) + 1.0) / 2.0, 0.0, 1.0);
    hits.push_back({e.term, 0.0, s, s});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return hit_before(a, a.vector_score, b, b.vector_score);
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<SearchHit> OntologyStore::hybrid_search(std::string_view query, std::size_t k,
                                                    double alpha,
                                                    gateway::Embedder& embedder) const {
  check_query(query, k);
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(Errc::precondition, "alpha must lie in [0, 1]");
  {
    std::shared_lock lock(mu_);
    require_nonempty();
    check_embedder(embedder);
  }
  const auto qv = embed_query(query, embedder);
  std::shared_lock lock(mu_);
  const auto raw = lexical_raw(query);
  const double best = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());

  std::vector<ScoredCandidate> cands;
  std::vector<const Entry*> refs;
  cands.reserve(entries_.size());
  std::size_t i = 0;
  for (const auto& [curie, e] : entries_) {
    const double lex = best > 0.0 ? raw[i] / best : 0.0;
    const double vec = std::clamp((gateway::dot(qv, e.embedding) + 1.0) / 2.0, 0.0, 1.0);
    cands.push_back({curie, lex, vec});
    refs.push_back(&e);
    ++i;
  }
  std::vector<SearchHit> hits;
  for (auto idx : rank_fused(cands, alpha, k)) {
    const auto& c = cands[idx];
    hits.push_back({refs[idx]->term, c.lexical_score, c.vector_score,
                    fuse(c.lexical_score, c.vector_score, alpha)});
  }
  return hits;
}

OntologyTerm OntologyStore::get(std::string_view curie) const {
  if (auto t = find(curie)) return *t;
  fail(Errc::not_found, "no term with curie '" + std::string(curie) + "'", std::string(curie));
}

std::optional<OntologyTerm> OntologyStore::find(std::string_view curie) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(curie);
  if (it == entries_.end()) return std::nullopt;
  return it->second.term;
}

std::size_t OntologyStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string OntologyStore::embedder_id() const {
  std::shared_lock lock(mu_);
  return embedder_id_;
}

std::string OntologyStore::snapshot() const {
  std::shared_lock lock(mu_);
  json terms = json::array();
  for (const auto& [_, e] : entries_) {
    auto j = to_json(e.term);
    j["embedding"] = e.embedding;
    terms.push_back(std::move(j));
  }
  const json body = {{"embedder", embedder_id_}, {"terms", std::move(terms)}};
  return seal(kIndexMagic, kIndexVersion, body.dump());
}

void OntologyStore::load_snapshot(std::string_view bytes) {
  const auto body = unseal(kIndexMagic, kIndexVersion, bytes);
  std::map<std::string, Entry, std::less<>> entries;
  std::string embedder;
  try {
    const auto j = json::parse(body);
    embedder = j.at("embedder").get<std::string>();
    for (const auto& t : j.at("terms")) {
      Entry e{term_from_json(t), t.at("embedding").get<gateway::Vector>(), {}};
      e.tokens = term_tokens(e.term);
      auto key = e.term.curie;
      entries.insert_or_assign(std::move(key), std::move(e));
    }
  } catch (const json::exception& e) {
    fail(Errc::corrupt_snapshot, std::string("index body is unreadable: ") + e.what(), "SSIDX");
  }
  std::unique_lock lock(mu_);
  entries_ = std::move(entries);
  embedder_id_ = std::move(embedder);
  rebuild_document_frequencies();
}

}  // namespace sie::ontology
