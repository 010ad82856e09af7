#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sie::gateway {

using Vector = std::vector<double>;

/// A provider-qualified model and its price per 1M tokens.
struct ModelRef {
  std::string provider;
  std::string model_name;
  double price_in = 0.0;
  double price_out = 0.0;

  /// "provider/model_name"
  std::string qualified() const { return provider + "/" + model_name; }
  bool operator==(const ModelRef&) const = default;
};

/// Splits "provider/model/name" at the first slash.
ModelRef parse_model_ref(std::string_view qualified);

enum class MessageRole { system, user, assistant };

std::string_view to_string(MessageRole role) noexcept;

struct Message {
  MessageRole role = MessageRole::user;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct Decoding {
  double temperature = 0.0;
  std::uint32_t max_output_tokens = 4096;
};

struct Completion {
  std::string text;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double latency_seconds = 0.0;
  ModelRef model;
};

/// What a provider hands back before the gateway stamps it. Providers that
/// know their own latency (scripted ones) report it; otherwise the gateway
/// measures wall time.
struct ProviderReply {
  std::string text;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::optional<double> latency_seconds;
};

struct CallLimits {
  std::chrono::milliseconds timeout{120'000};
};

/// ceil(bytes / 4); used when a provider does not report token counts.
std::uint64_t estimate_tokens(std::string_view text) noexcept;

}  // namespace sie::gateway
