#include "sie/gateway/gateway.hpp"

#include <spdlog/spdlog.h>

#include <condition_variable>
#include <thread>

#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::gateway {

class Gateway::Limiter {
 public:
  explicit Limiter(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_use_ < limit_; });
    ++in_use_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --in_use_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_use_ = 0;
  std::size_t limit_;
};

namespace {

struct SlotGuard {
  explicit SlotGuard(auto& l) : release([&l] { l.release(); }) { l.acquire(); }
  ~SlotGuard() { release(); }
  std::function<void()> release;
};

}  // namespace

Gateway::Gateway(std::shared_ptr<UsageLedger> ledger, GatewayOptions options)
    : ledger_(ledger ? std::move(ledger) : std::make_shared<UsageLedger>()),
      options_(options) {}

Gateway::~Gateway() = default;

void Gateway::register_chat(const std::string& provider, std::shared_ptr<ChatProvider> impl) {
  std::lock_guard lock(mu_);
  chat_[provider] = std::move(impl);
}

void Gateway::register_embedding(const std::string& provider,
                                 std::shared_ptr<EmbeddingProvider> impl) {
  std::lock_guard lock(mu_);
  embedding_[provider] = std::move(impl);
}

Gateway::Limiter& Gateway::limiter_for(const std::string& provider) {
  std::lock_guard lock(mu_);
  auto& slot = limiters_[provider];
  if (!slot) slot = std::make_unique<Limiter>(options_.per_provider_concurrency);
  return *slot;
}

template <typename F>
auto Gateway::with_retries(const std::string& what, F&& attempt) {
  for (int i = 0;; ++i) {
    try {
      return attempt();
    } catch (const Error& e) {
      if (e.code() != Errc::transport) throw;
      if (i >= options_.retry_bound)
        fail(Errc::transport,
             what + " failed after " + std::to_string(i + 1) + " attempts: " + e.what(),
             e.subject());
      const auto delay = options_.backoff_base * (1LL << std::min(i, 16));
      spdlog::warn("{}: transient failure ({}), retrying in {} ms", what, e.what(),
                   delay.count());
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
    }
  }
}

Completion Gateway::complete(const CallContext& ctx, const ModelRef& model,
                             std::span<const Message> messages, const Decoding& decoding) {
  if (messages.empty()) fail(Errc::precondition, "complete() needs at least one message");
  std::shared_ptr<ChatProvider> provider;
  {
    std::lock_guard lock(mu_);
    const auto it = chat_.find(model.provider);
    if (it == chat_.end())
      fail(Errc::invalid_argument, "no chat provider registered for '" + model.provider + "'",
           model.provider);
    provider = it->second;
  }
  if (options_.run_cost_cap && ledger_->total_cost(ctx.run_id) > *options_.run_cost_cap)
    fail(Errc::budget_exceeded, "run " + ctx.run_id + " is already over its cost cap",
         ctx.run_id);

  const CallLimits limits{options_.timeout};
  auto& limiter = limiter_for(model.provider);
  const auto started = std::chrono::steady_clock::now();
  ProviderReply reply = [&] {
    SlotGuard slot(limiter);
    return with_retries(model.qualified(),
                        [&] { return provider->chat(model, messages, decoding, limits); });
  }();
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  Completion c;
  c.text = std::move(reply.text);
  c.input_tokens = reply.input_tokens;
  c.output_tokens = reply.output_tokens;
  c.latency_seconds = reply.latency_seconds.value_or(elapsed);
  c.model = model;

  const double cost = cost_of(model, c.input_tokens, c.output_tokens);
  if (options_.run_cost_cap) {
    const double spent = ledger_->total_cost(ctx.run_id);
    if (spent + cost > *options_.run_cost_cap)
      fail(Errc::budget_exceeded,
           "call would cost " + std::to_string(cost) + " and cross the run cap of " +
               std::to_string(*options_.run_cost_cap),
           ctx.run_id);
  }
  ledger_->append({ctx.run_id, ctx.agent_role, model.qualified(), c.input_tokens,
                   c.output_tokens, c.latency_seconds, cost});
  return c;
}

std::vector<Vector> Gateway::embed(const ModelRef& model, std::span<const std::string> texts) {
  if (texts.empty()) fail(Errc::precondition, "embed() needs at least one text");
  for (const auto& t : texts)
    if (text::collapse_whitespace(t).empty())
      fail(Errc::precondition, "cannot embed an empty text");
  std::shared_ptr<EmbeddingProvider> provider;
  {
    std::lock_guard lock(mu_);
    const auto it = embedding_.find(model.provider);
    if (it == embedding_.end())
      fail(Errc::invalid_argument,
           "no embedding provider registered for '" + model.provider + "'", model.provider);
    provider = it->second;
  }
  const CallLimits limits{options_.timeout};
  auto& limiter = limiter_for(model.provider);
  auto vectors = [&] {
    SlotGuard slot(limiter);
    return with_retries(model.qualified(),
                        [&] { return provider->embed(model, texts, limits); });
  }();

  if (vectors.size() != texts.size())
    fail(Errc::dimension_mismatch,
         "provider returned " + std::to_string(vectors.size()) + " vectors for " +
             std::to_string(texts.size()) + " texts");
  const std::size_t dim = vectors.front().size();
  for (auto& v : vectors) {
    if (v.size() != dim || dim == 0)
      fail(Errc::dimension_mismatch, "provider returned ragged or empty vectors");
    const double n = l2_norm(v);
    if (!(n > 0.0)) throw ProviderError(200, "provider returned a zero vector");
    for (auto& x : v) x /= n;
  }
  return vectors;
}

}  // namespace sie::gateway
