#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sie/common/role.hpp"
#include "sie/gateway/types.hpp"

namespace sie::config {

struct AgentProfile {
  AgentRole role = AgentRole::extractor;
  gateway::ModelRef model;
  gateway::Decoding decoding;
  std::string credential_ref;  ///< name of the environment variable holding the key

  bool operator==(const AgentProfile& o) const {
    return role == o.role && model == o.model && decoding.temperature == o.decoding.temperature &&
           decoding.max_output_tokens == o.decoding.max_output_tokens &&
           credential_ref == o.credential_ref;
  }
};

using ProfileSet = std::map<AgentRole, AgentProfile>;

/// Throws Errc::invalid_argument for a negative temperature or a zero token
/// limit.
void validate(const AgentProfile& profile);

enum class ProviderKind { scripted, http };

struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::scripted;
  std::string base_url;
  std::string chat_path = "/v1/chat/completions";
  std::string embed_path = "/v1/embeddings";
  std::string credential_ref;
};

/// Everything a profiles file declares.
struct ProfilesFile {
  std::map<std::string, ProviderConfig> providers;
  gateway::ModelRef embedding_model{"scripted", "hash-256", 0.0, 0.0};
  ProfileSet agents;
};

/// YAML:
///
///   providers:
///     scripted: {kind: scripted}
///     openrouter: {kind: http, base_url: https://openrouter.ai/api,
///                  credential_ref: OPENROUTER_API_KEY}
///   embedding: {model: scripted/hash-256}
///   agents:
///     extractor: {model: openrouter/anthropic/claude-3.7-sonnet,
///                 temperature: 0, max_output_tokens: 4096,
///                 credential_ref: OPENROUTER_API_KEY}
///     ...
///
/// Agents may be partial here; start_run reports a missing role. Throws
/// Errc::syntax or Errc::schema.
ProfilesFile load_profiles(std::string_view source);

nlohmann::json to_json(const AgentProfile& profile);
AgentProfile profile_from_json(const nlohmann::json& j);

struct RunOptions {
  bool hil_enabled = false;
  int max_repair_attempts = 2;
  int max_feedback_rounds = 1;
  std::size_t alignment_top_k = 5;
  double hybrid_alpha = 0.5;
  std::size_t chunk_max_units = 1500;
  /// Concurrent item calls within the alignment and judge stages.
  std::size_t fan_out = 1;
  bool longterm_memory = false;

  bool operator==(const RunOptions&) const = default;
};

/// Throws Errc::invalid_argument naming the offending field.
void validate(const RunOptions& options);

nlohmann::json to_json(const RunOptions& options);
RunOptions run_options_from_json(const nlohmann::json& j);

}  // namespace sie::config
