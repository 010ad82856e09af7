#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = SIE_SOURCE_DIR;

// Module -> modules its headers and sources may include.
const std::map<std::string, std::set<std::string>> kAllowed = {
    {"common", {}},
    {"ingestion", {"common"}},
    {"gateway", {"common"}},
    {"ontology", {"common", "gateway"}},
    {"memory", {"common", "gateway", "ontology"}},
    {"config", {"common", "gateway"}},
    {"agents", {"common", "config", "gateway", "ingestion", "ontology", "memory"}},
    {"pipeline", {"common", "config", "ingestion", "gateway", "ontology", "memory", "agents"}},
    {"reviewfile", {"common"}},
    {"hil", {"common", "agents", "pipeline", "reviewfile", "config", "gateway", "ingestion", "ontology",
             "memory"}},
    {"eval", {"common", "reviewfile", "gateway"}},
};

// Third-party headers and the modules allowed to see them.
const std::map<std::string, std::set<std::string>> kVendor = {
    {"httplib.h", {"gateway", "hil"}},
    {"yaml-cpp", {"config"}},
    {"openssl", {"common"}},
    {"CLI11.hpp", {}},
    {"doctest.h", {}},
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> includes_of(const fs::path& p) {
  static const std::regex re(R"re(^\s*#\s*include\s*[<"]([^>"]+)[>"])re");
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  std::string line;
  std::smatch m;
  while (std::getline(in, line))
    if (std::regex_search(line, m, re)) out.push_back(m[1]);
  return out;
}

std::vector<fs::path> files_of(const std::string& module) {
  std::vector<fs::path> out;
  for (const auto& dir : {kRoot / "include" / "sie" / module, kRoot / "src" / module})
    if (fs::exists(dir))
      for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && (e.path().extension() == ".hpp" || e.path().extension() == ".cpp"))
          out.push_back(e.path());
  return out;
}

}  // namespace

TEST_CASE("every module directory is known") {
  for (const auto& e : fs::directory_iterator(kRoot / "include" / "sie"))
    CHECK_MESSAGE(kAllowed.count(e.path().filename().string()), e.path());
  for (const auto& e : fs::directory_iterator(kRoot / "src"))
    if (e.is_directory()) CHECK_MESSAGE(kAllowed.count(e.path().filename().string()), e.path());
}

TEST_CASE("modules include only their declared dependencies") {
  static const std::regex sie_re(R"(^sie/([a-z]+)/)");
  std::size_t checked = 0;
  for (const auto& [module, allowed] : kAllowed) {
    for (const auto& file : files_of(module)) {
      for (const auto& inc : includes_of(file)) {
        const std::string where = file.string() + " includes " + inc;
        std::smatch m;
        if (std::regex_search(inc, m, sie_re)) {
          const std::string dep = m[1];
          CHECK_MESSAGE((dep == module || allowed.count(dep)), where);
        }
        for (const auto& [vendor, users] : kVendor)
          if (inc.rfind(vendor, 0) == 0)
            CHECK_MESSAGE(users.count(module), where);
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("the command line tool holds no metric logic") {
  const auto cli = slurp(kRoot / "tools" / "sie_cli.cpp");
  REQUIRE_FALSE(cli.empty());
  for (const char* pattern : {R"(std::log\s*\()", R"(std::sqrt\s*\()", R"(\.tp\s*[/+])", R"(/\s*\(?\s*\w*\.?tp\b)",
                              R"(\bharmonic)", R"(\bcosine\b)", R"(alpha\s*\*)"}) {
    const std::regex re(pattern);
    CHECK_MESSAGE(!std::regex_search(cli, re), pattern);
  }
}
