#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sie/eval/metrics.hpp"
#include "sie/gateway/ledger.hpp"

namespace sie::eval {

/// Counts for one (task, model, HIL setting) condition.
struct PrfEntry {
  std::string task;
  std::string model;
  std::optional<bool> hil;
  ConfusionCounts counts;
};

struct AlignmentEntry {
  std::string task;
  std::string model;
  std::optional<bool> hil;
  AlignmentResult result;
};

struct DiversityEntry {
  std::string model;
  std::optional<bool> hil;
  std::map<std::string, std::uint64_t> type_counts;
};

struct JudgeEntry {
  std::string model;
  std::optional<bool> hil;
  std::vector<double> scores;
};

struct SectionEntry {
  std::string model;
  std::vector<std::string> headings;
};

struct UsageEntry {
  std::string task;
  std::string model;
  bool hil = false;
  std::vector<gateway::UsageEvent> events;
};

/// Inputs to one report; every part may be empty.
struct ReportBundle {
  std::vector<PrfEntry> prf;
  std::vector<AlignmentEntry> alignment;
  std::map<std::string, std::set<std::string>> coverage;
  std::vector<DiversityEntry> diversity;
  std::vector<JudgeEntry> judge;
  std::vector<SectionEntry> sections;
  SectionAliases section_aliases = default_section_aliases();
  std::vector<UsageEntry> usage;
};

/// Machine-readable report with keys prf, alignment_rate, coverage,
/// diversity, judge_stats, section_distribution, usage and plots. Empty
/// inputs give empty arrays.
///
/// plots.cost_speed has one row per usage entry; plots.hil_vs_non_hil
/// pairs prf rows of the same task and model; plots.hil_cost_pairs pairs
/// usage rows the same way and reports whether the HIL run cost more.
nlohmann::json report(const ReportBundle& bundle);

struct PlotTable {
  std::string name;  ///< file stem, e.g. "cost_speed"
  std::string csv;
};

/// The report's plot arrays as CSV tables.
std::vector<PlotTable> plot_tables(const nlohmann::json& report);

}  // namespace sie::eval
