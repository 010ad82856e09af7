#pragma once

#include <string>

#include "sie/common/role.hpp"

namespace sie::agents {

/// Base system prompt per role. The task's instruction block for the role
/// is appended to it at call time.
struct Prompts {
  std::string extractor;
  std::string alignment;
  std::string judge;
  std::string feedback;

  /// The assets/prompts/*.txt files compiled into the binary.
  static Prompts defaults();
  /// Reads <dir>/<role>.txt; roles without a file keep the default.
  static Prompts load_dir(const std::string& dir);

  const std::string& for_role(AgentRole role) const noexcept;
};

}  // namespace sie::agents
