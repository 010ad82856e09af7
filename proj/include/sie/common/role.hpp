#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace sie {

/// The four pipeline roles, in stage order.
enum class AgentRole { extractor, alignment, judge, feedback };

inline constexpr std::array<AgentRole, 4> kAllRoles = {AgentRole::extractor, AgentRole::alignment,
                                                       AgentRole::judge, AgentRole::feedback};

constexpr std::string_view to_string(AgentRole role) noexcept {
  switch (role) {
    case AgentRole::extractor: return "extractor";
    case AgentRole::alignment: return "alignment";
    case AgentRole::judge: return "judge";
    case AgentRole::feedback: return "feedback";
  }
  return "extractor";
}

constexpr std::optional<AgentRole> parse_role(std::string_view s) noexcept {
  for (auto r : kAllRoles)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

}  // namespace sie
