#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sie/gateway/provider.hpp"
#include "sie/ontology/term.hpp"

namespace sie::ontology {

struct SearchHit {
  OntologyTerm term;
  double lexical_score = 0.0;
  double vector_score = 0.0;
  double fused_score = 0.0;
};

/// Per-candidate scores entering fusion.
struct ScoredCandidate {
  std::string curie;
  double lexical_score = 0.0;
  double vector_score = 0.0;
};

/// alpha * vector + (1 - alpha) * lexical
double fuse(double lexical_score, double vector_score, double alpha) noexcept;

/// Indices of the top-k candidates by fused score, ties broken by curie
/// ascending.
std::vector<std::size_t> rank_fused(std::span<const ScoredCandidate> candidates, double alpha,
                                    std::size_t k);

/// In-process concept store with keyword, vector and fused retrieval.
///
/// Lexical relevance of a term is the IDF-weighted share of the query's
/// content words found in its label, synonyms and definition, plus a bonus
/// for an exact label (+1) or synonym (+0.5) match. Scores are divided by
/// the best score so the top hit gets 1 and a term sharing no words gets 0.
/// Vector relevance is (cos + 1) / 2 between the query embedding and the
/// embedding of "label. definition".
///
/// Reads run concurrently; ingest() computes embeddings first and swaps the
/// batch in under an exclusive lock, so searches never see half a batch.
class OntologyStore {
 public:
  OntologyStore() = default;
  OntologyStore(const OntologyStore&) = delete;
  OntologyStore& operator=(const OntologyStore&) = delete;

  /// Returns the number of terms in the batch. Re-ingesting a curie
  /// replaces it. Throws Errc::precondition (empty batch),
  /// Errc::duplicate_in_batch, Errc::invalid_argument (bad term) or
  /// Errc::embedder.
  std::size_t ingest(std::vector<OntologyTerm> terms, gateway::Embedder& embedder);

  std::vector<SearchHit> lexical_search(std::string_view query, std::size_t k) const;
  std::vector<SearchHit> vector_search(std::string_view query, std::size_t k,
                                       gateway::Embedder& embedder) const;
  std::vector<SearchHit> hybrid_search(std::string_view query, std::size_t k, double alpha,
                                       gateway::Embedder& embedder) const;

  /// Case-sensitive lookup; Errc::not_found otherwise.
  OntologyTerm get(std::string_view curie) const;
  std::optional<OntologyTerm> find(std::string_view curie) const;

  std::size_t size() const;
  std::string embedder_id() const;

  /// "SSIDX" envelope around the terms and their embeddings.
  std::string snapshot() const;
  void load_snapshot(std::string_view bytes);

  static std::string indexed_text(const OntologyTerm& term);

 private:
  struct Entry {
    OntologyTerm term;
    gateway::Vector embedding;
    std::vector<std::string> tokens;  ///< unique, sorted
  };

  void require_nonempty() const;
  void check_query(std::string_view query, std::size_t k) const;
  void check_embedder(const gateway::Embedder& embedder) const;
  gateway::Vector embed_query(std::string_view query, gateway::Embedder& embedder) const;
  /// Raw lexical relevance per entry (0 for no shared word). Caller holds the lock.
  std::vector<double> lexical_raw(std::string_view query) const;
  void rebuild_document_frequencies();

  mutable std::shared_mutex mu_;
  std::map<std::string, Entry, std::less<>> entries_;  ///< ordered by curie
  std::map<std::string, std::size_t, std::less<>> df_;
  std::string embedder_id_;
};

}  // namespace sie::ontology
