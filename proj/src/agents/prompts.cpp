#include "sie/agents/prompts.hpp"

#include <filesystem>

#include "sie/common/io.hpp"

namespace sie::agents {

Prompts Prompts::load_dir(const std::string& dir) {
  auto p = defaults();
  for (auto role : kAllRoles) {
    const auto path = std::filesystem::path(dir) / (std::string(to_string(role)) + ".txt");
    if (!std::filesystem::exists(path)) continue;
    auto text = read_file(path.string());
    switch (role) {
      case AgentRole::extractor: p.extractor = std::move(text); break;
      case AgentRole::alignment: p.alignment = std::move(text); break;
      case AgentRole::judge: p.judge = std::move(text); break;
      case AgentRole::feedback: p.feedback = std::move(text); break;
    }
  }
  return p;
}

const std::string& Prompts::for_role(AgentRole role) const noexcept {
  switch (role) {
    case AgentRole::extractor: return extractor;
    case AgentRole::alignment: return alignment;
    case AgentRole::judge: return judge;
    case AgentRole::feedback: return feedback;
  }
  return extractor;
}

}  // namespace sie::agents
