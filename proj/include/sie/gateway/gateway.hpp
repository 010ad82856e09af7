#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sie/gateway/ledger.hpp"
#include "sie/gateway/provider.hpp"
#include "sie/gateway/types.hpp"

namespace sie::gateway {

struct GatewayOptions {
  /// Retries after the first attempt for transient failures.
  int retry_bound = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds timeout{120'000};
  /// Per-run spend cap in the price table's currency.
  std::optional<double> run_cost_cap;
  std::size_t per_provider_concurrency = 4;
};

/// Attribution for ledger events.
struct CallContext {
  std::string run_id;
  std::string agent_role;
};

/// Uniform entry point to chat and embedding providers. Thread-safe.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<UsageLedger> ledger = std::make_shared<UsageLedger>(),
                   GatewayOptions options = {});
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void register_chat(const std::string& provider, std::shared_ptr<ChatProvider> impl);
  void register_embedding(const std::string& provider, std::shared_ptr<EmbeddingProvider> impl);

  /// Routes to the provider named by model.provider, retrying transient
  /// failures with exponential backoff, and records one ledger event.
  /// Throws Errc::precondition (no messages), Errc::transport (retries
  /// exhausted), ProviderError, or Errc::budget_exceeded when the event
  /// would push the run past its cost cap (the event is then not recorded).
  Completion complete(const CallContext& ctx, const ModelRef& model,
                      std::span<const Message> messages, const Decoding& decoding);

  /// Unit-norm vectors, one per text, all the same dimension.
  std::vector<Vector> embed(const ModelRef& model, std::span<const std::string> texts);

  UsageLedger& ledger() noexcept { return *ledger_; }
  std::shared_ptr<UsageLedger> shared_ledger() const noexcept { return ledger_; }
  const GatewayOptions& options() const noexcept { return options_; }

 private:
  class Limiter;

  Limiter& limiter_for(const std::string& provider);
  template <typename F>
  auto with_retries(const std::string& what, F&& attempt);

  std::shared_ptr<UsageLedger> ledger_;
  GatewayOptions options_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<ChatProvider>> chat_;
  std::map<std::string, std::shared_ptr<EmbeddingProvider>> embedding_;
  std::map<std::string, std::unique_ptr<Limiter>> limiters_;
};

/// Binds a gateway to one embedding model.
class GatewayEmbedder final : public Embedder {
 public:
  GatewayEmbedder(Gateway& gateway, ModelRef model) : gateway_(gateway), model_(std::move(model)) {}

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    return gateway_.embed(model_, texts);
  }
  std::string model_id() const override { return model_.qualified(); }

 private:
  Gateway& gateway_;
  ModelRef model_;
};

}  // namespace sie::gateway
