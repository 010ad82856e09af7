#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>
#include <string>
#include <string_view>
#include <vector>

#include "sie/common/clock.hpp"
#include "sie/common/role.hpp"
#include "sie/gateway/provider.hpp"
#include "sie/ontology/term.hpp"

namespace sie::memory {

struct ContextEntry {
  std::string run_id;
  AgentRole stage = AgentRole::extractor;
  std::string key;
  std::string value;
  std::int64_t created_at = 0;

  bool operator==(const ContextEntry&) const = default;
};

struct ContextFilter {
  std::optional<AgentRole> stage;
  std::optional<std::string> key;
};

struct Occurrence {
  std::string section_id;
  std::string sentence;

  bool operator==(const Occurrence&) const = default;
};

struct EntityRecord {
  std::string run_id;
  std::string canonical_key;  ///< casefolded, whitespace-collapsed label
  std::vector<Occurrence> occurrences;
  std::optional<ontology::ConceptRef> latest_alignment;

  bool operator==(const EntityRecord&) const = default;
};

struct LongTermItem {
  std::string key;
  std::string value;
  std::optional<gateway::Vector> embedding;  ///< unit norm when present
  std::int64_t created_at = 0;

  bool operator==(const LongTermItem&) const = default;
};

/// Shared agent memory. Contextual and entity memory are scoped to a run;
/// long-term memory belongs to the store's workspace and is shared by every
/// run. All operations are thread-safe.
class MemoryStore {
 public:
  explicit MemoryStore(std::string workspace = "default", Clock clock = system_clock());

  MemoryStore(const MemoryStore&) = delete;
  MemoryStore& operator=(const MemoryStore&) = delete;

  const std::string& workspace() const noexcept { return workspace_; }

  /// Creates (or resets) the run's scope.
  void open_run(const std::string& run_id);
  bool has_run(std::string_view run_id) const;
  void close_run(std::string_view run_id);

  /// Last write wins per (run, stage, key). Errc::unknown_run for a run
  /// without an open scope.
  void put_context(const std::string& run_id, AgentRole stage, const std::string& key,
                   std::string value);
  /// Entries in stage order, then key order.
  std::vector<ContextEntry> read_context(std::string_view run_id,
                                         const ContextFilter& filter = {}) const;

  EntityRecord upsert_entity(const std::string& run_id, std::string_view label,
                             Occurrence occurrence,
                             std::optional<ontology::ConceptRef> alignment = std::nullopt);
  std::vector<EntityRecord> entities(std::string_view run_id) const;

  void put_longterm(const std::string& key, std::string value,
                    std::optional<gateway::Vector> embedding = std::nullopt);
  /// Stores the item with an embedding of its value.
  void remember(const std::string& key, std::string value, gateway::Embedder& embedder);

  /// Cosine ranking when an embedder is given and every item carries an
  /// embedding; otherwise ranking by the share of query words found in the
  /// item's key and value (items sharing none are left out). Ties go to the
  /// smaller key. Errc::precondition when k is 0.
  std::vector<LongTermItem> recall_longterm(std::string_view query, std::size_t k,
                                            gateway::Embedder* embedder = nullptr) const;
  std::size_t longterm_size() const;

  /// "SSMEM" envelope holding every run scope and the long-term items.
  std::string snapshot() const;
  void load_snapshot(std::string_view bytes);

 private:
  struct RunScope {
    std::map<std::tuple<AgentRole, std::string>, ContextEntry> context;
    std::map<std::string, EntityRecord> entities;
  };

  RunScope& scope(std::string_view run_id);
  const RunScope& scope(std::string_view run_id) const;

  std::string workspace_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, RunScope, std::less<>> runs_;
  std::map<std::string, LongTermItem> longterm_;
};

}  // namespace sie::memory
