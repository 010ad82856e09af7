#include <cmath>

#include "sie/common/error.hpp"
#include "sie/gateway/provider.hpp"
#include "sie/gateway/types.hpp"

namespace sie::gateway {

ModelRef parse_model_ref(std::string_view qualified) {
  const auto slash = qualified.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == qualified.size())
    fail(Errc::invalid_argument,
         "model must be provider-qualified as provider/model, got '" + std::string(qualified) + "'",
         std::string(qualified));
  ModelRef m;
  m.provider = std::string(qualified.substr(0, slash));
  m.model_name = std::string(qualified.substr(slash + 1));
  return m;
}

std::string_view to_string(MessageRole role) noexcept {
  switch (role) {
    case MessageRole::system: return "system";
    case MessageRole::user: return "user";
    case MessageRole::assistant: return "assistant";
  }
  return "user";
}

std::uint64_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

double dot(const Vector& a, const Vector& b) {
  const auto n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Vector& v) { return std::sqrt(dot(v, v)); }

}  // namespace sie::gateway
