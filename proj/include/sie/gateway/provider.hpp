#pragma once

#include <span>
#include <string>
#include <vector>

#include "sie/gateway/types.hpp"

namespace sie::gateway {

/// Chat-completion backend. Implementations throw Error(Errc::transport)
/// for failures worth retrying (connection errors, 408/429/5xx) and
/// ProviderError for everything else.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ProviderReply chat(const ModelRef& model, std::span<const Message> messages,
                             const Decoding& decoding, const CallLimits& limits) = 0;
};

/// Embedding backend; returns raw (not necessarily normalized) vectors,
/// one per input text.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Vector> embed(const ModelRef& model, std::span<const std::string> texts,
                                    const CallLimits& limits) = 0;
};

/// Text-to-unit-vector contract consumed by the ontology store and memory.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
  /// Identifies the embedding space; indexes built with one id must be
  /// queried with the same id.
  virtual std::string model_id() const = 0;
};

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& v);

}  // namespace sie::gateway
