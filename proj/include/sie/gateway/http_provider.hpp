#pragma once

#include <string>

#include "sie/gateway/provider.hpp"

namespace sie::gateway {

/// Endpoint description for an OpenAI-compatible HTTP service (OpenRouter,
/// Ollama's /v1 surface, vLLM, ...). Paths are configuration, not code.
struct HttpEndpoint {
  std::string base_url;  ///< scheme://host[:port]
  std::string chat_path = "/v1/chat/completions";
  std::string embed_path = "/v1/embeddings";
  std::string api_key;   ///< sent as a bearer token when non-empty
};

/// Resolves an API key from the environment variable named by
/// credential_ref. Empty when the variable is unset.
std::string resolve_credential(const std::string& credential_ref);

class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  ProviderReply chat(const ModelRef& model, std::span<const Message> messages,
                     const Decoding& decoding, const CallLimits& limits) override;

 private:
  HttpEndpoint endpoint_;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::vector<Vector> embed(const ModelRef& model, std::span<const std::string> texts,
                            const CallLimits& limits) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace sie::gateway
