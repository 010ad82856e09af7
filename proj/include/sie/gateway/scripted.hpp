#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sie/gateway/provider.hpp"

namespace sie::gateway {

/// Fixture key for a chat request: sha256 over the model name, every
/// message (role and content) and the temperature.
std::string request_digest(std::string_view model_name, std::span<const Message> messages,
                           double temperature);

/// One scripted reply. Matched either by exact request digest or, failing
/// that, by the first rule whose model filter and substring list all match
/// the request (rules are tried in file order).
struct ScriptedResponse {
  std::optional<std::string> digest;
  std::optional<std::string> model;     ///< model_name filter for rules
  std::vector<std::string> contains;    ///< substrings that must all occur
  std::vector<std::string> excludes;    ///< substrings that must not occur
  std::string text;
  std::optional<std::uint64_t> input_tokens;
  std::optional<std::uint64_t> output_tokens;
  double latency_seconds = 0.0;
};

/// Deterministic stand-in for a live chat model. The same request always
/// yields the same reply. A request with no matching fixture raises
/// ProviderError(404) carrying the digest so it can be pinned.
class ScriptedChatProvider final : public ChatProvider {
 public:
  ScriptedChatProvider() = default;
  explicit ScriptedChatProvider(std::vector<ScriptedResponse> responses);

  /// {"responses": [{"digest"|"model"/"contains"/"excludes", "text", ...}]}
  static ScriptedChatProvider from_json(std::string_view bytes);
  static std::vector<ScriptedResponse> parse_script(std::string_view bytes);

  void add(ScriptedResponse response);

  ProviderReply chat(const ModelRef& model, std::span<const Message> messages,
                     const Decoding& decoding, const CallLimits& limits) override;

  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<ScriptedResponse> responses_;
  std::size_t calls_ = 0;
};

/// Signed feature hashing of content words into a fixed dimension. Fully
/// deterministic and offline; texts sharing words land near each other.
class HashingEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dim = 256) : dim_(dim) {}

  std::vector<Vector> embed(const ModelRef& model, std::span<const std::string> texts,
                            const CallLimits& limits) override;

  Vector embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
};

/// Explicit text-to-vector fixtures with hashing fallback for anything not
/// listed. Lets tests construct exact geometries.
class ScriptedEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit ScriptedEmbeddingProvider(std::map<std::string, Vector> fixtures = {},
                                     std::size_t fallback_dim = 0);

  /// {"dim": N, "vectors": {"text": [..], ...}}
  static ScriptedEmbeddingProvider from_json(std::string_view bytes);

  void set(std::string text, Vector v);

  std::vector<Vector> embed(const ModelRef& model, std::span<const std::string> texts,
                            const CallLimits& limits) override;

 private:
  std::map<std::string, Vector> fixtures_;
  HashingEmbeddingProvider fallback_;
  std::size_t dim_;
};

}  // namespace sie::gateway
