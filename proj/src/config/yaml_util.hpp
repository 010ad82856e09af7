#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

namespace sie::config::detail {

/// Parses a YAML document; Errc::syntax for empty or malformed input.
YAML::Node parse_yaml(std::string_view source, std::string_view what);

nlohmann::json yaml_to_json(const YAML::Node& node);

/// Appends "<prefix><key>" for every key of `node` not in `allowed`.
void unknown_keys(const YAML::Node& node, const std::vector<std::string>& allowed,
                  const std::string& prefix, std::vector<std::string>& out);

/// Scalar as a string; Errc::schema naming path when it is not a scalar.
std::string scalar(const YAML::Node& node, const std::string& path);
double number(const YAML::Node& node, const std::string& path);
bool boolean(const YAML::Node& node, const std::string& path);

/// Throws Errc::schema listing all paths, subject = first.
[[noreturn]] void schema_failure(std::string_view what, const std::vector<std::string>& paths);

}  // namespace sie::config::detail
