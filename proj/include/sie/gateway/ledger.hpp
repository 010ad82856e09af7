#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sie/gateway/types.hpp"

namespace sie::gateway {

struct UsageEvent {
  std::string run_id;
  std::string agent_role;
  std::string model;  ///< provider-qualified name
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double latency_seconds = 0.0;
  double cost = 0.0;

  bool operator==(const UsageEvent&) const = default;
};

/// input_tokens * price_in / 1e6 + output_tokens * price_out / 1e6
double cost_of(const ModelRef& model, std::uint64_t input_tokens, std::uint64_t output_tokens);

/// Append-only, thread-safe event log.
class UsageLedger {
 public:
  UsageLedger() = default;
  explicit UsageLedger(std::vector<UsageEvent> events) : events_(std::move(events)) {}

  void append(UsageEvent event);
  std::vector<UsageEvent> events() const;
  std::size_t size() const;
  double total_cost(std::string_view run_id) const;

  /// One JSON object per line.
  std::string to_jsonl() const;
  static UsageLedger from_jsonl(std::string_view bytes);

 private:
  mutable std::mutex mu_;
  std::vector<UsageEvent> events_;
};

enum class UsageGroup { run, agent_role, model, all };

std::optional<UsageGroup> parse_usage_group(std::string_view s);

struct UsageRow {
  std::string key;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::uint64_t total_tokens = 0;
  double total_cost = 0.0;
  double total_latency_seconds = 0.0;
  /// sum(output_tokens) / sum(latency); empty when the group's latency is 0.
  std::optional<double> tokens_per_second;
};

/// Rows sorted by key. UsageGroup::all yields a single row keyed "*" (or no
/// rows for an empty ledger).
std::vector<UsageRow> summarize_usage(const std::vector<UsageEvent>& events, UsageGroup group_by);

}  // namespace sie::gateway
