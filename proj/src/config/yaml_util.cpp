#include "yaml_util.hpp"

#include <cerrno>
#include <cstdlib>
#include <algorithm>

#include "sie/common/error.hpp"

namespace sie::config::detail {

YAML::Node parse_yaml(std::string_view source, std::string_view what) {
  if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
    fail(Errc::syntax, std::string(what) + " is empty");
  try {
    auto node = YAML::Load(std::string(source));
    if (!node.IsMap()) fail(Errc::syntax, std::string(what) + " must be a mapping at top level");
    return node;
  } catch (const YAML::Exception& e) {
    fail(Errc::syntax, std::string(what) + ": " + e.what());
  }
}

nlohmann::json yaml_to_json(const YAML::Node& node) {
  using nlohmann::json;
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& n : node) arr.push_back(yaml_to_json(n));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const auto& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  if (!s.empty()) {
    errno = 0;
    char* end = nullptr;
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (errno == 0 && end == s.c_str() + s.size()) return i;
    end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return d;
  }
  return s;
}

void unknown_keys(const YAML::Node& node, const std::vector<std::string>& allowed,
                  const std::string& prefix, std::vector<std::string>& out) {
  if (!node.IsMap()) return;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      out.push_back(prefix + key);
  }
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (node.IsNull()) return {};
  if (!node.IsScalar()) fail(Errc::schema, path + " must be a scalar", path);
  return node.Scalar();
}

double number(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(Errc::schema, path + " must be a number", path);
  }
}

bool boolean(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(Errc::schema, path + " must be true or false", path);
  }
}

void schema_failure(std::string_view what, const std::vector<std::string>& paths) {
  std::string msg = std::string(what) + " has missing or unknown keys:";
  for (const auto& p : paths) msg += " " + p;
  fail(Errc::schema, msg, paths.front());
}

}  // namespace sie::config::detail
