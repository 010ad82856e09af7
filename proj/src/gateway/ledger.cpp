#include "sie/gateway/ledger.hpp"

#include <map>
#include <sstream>

#include "json.hpp"
#include "sie/common/error.hpp"

namespace sie::gateway {

using nlohmann::json;

double cost_of(const ModelRef& model, std::uint64_t input_tokens, std::uint64_t output_tokens) {
  return static_cast<double>(input_tokens) * model.price_in / 1e6 +
         static_cast<double>(output_tokens) * model.price_out / 1e6;
}

void UsageLedger::append(UsageEvent event) {
  std::lock_guard lock(mu_);
  events_.push_back(std::move(event));
}

std::vector<UsageEvent> UsageLedger::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t UsageLedger::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

double UsageLedger::total_cost(std::string_view run_id) const {
  std::lock_guard lock(mu_);
  double sum = 0.0;
  for (const auto& e : events_)
    if (e.run_id == run_id) sum += e.cost;
  return sum;
}

std::string UsageLedger::to_jsonl() const {
  std::ostringstream out;
  for (const auto& e : events()) {
    json j = {{"run_id", e.run_id},
              {"agent_role", e.agent_role},
              {"model", e.model},
              {"input_tokens", e.input_tokens},
              {"output_tokens", e.output_tokens},
              {"latency_seconds", e.latency_seconds},
              {"cost", e.cost}};
    out << j.dump() << '\n';
  }
  return out.str();
}

UsageLedger UsageLedger::from_jsonl(std::string_view bytes) {
  std::vector<UsageEvent> events;
  std::istringstream in{std::string(bytes)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      events.push_back({j.at("run_id").get<std::string>(), j.at("agent_role").get<std::string>(),
                        j.at("model").get<std::string>(), j.at("input_tokens").get<std::uint64_t>(),
                        j.at("output_tokens").get<std::uint64_t>(),
                        j.at("latency_seconds").get<double>(), j.at("cost").get<double>()});
    } catch (const json::exception& e) {
      fail(Errc::format, "ledger line " + std::to_string(lineno) + ": " + e.what(),
           std::to_string(lineno));
    }
  }
  return UsageLedger(std::move(events));
}

std::optional<UsageGroup> parse_usage_group(std::string_view s) {
  if (s == "run") return UsageGroup::run;
  if (s == "agent_role" || s == "role") return UsageGroup::agent_role;
  if (s == "model") return UsageGroup::model;
  if (s == "all") return UsageGroup::all;
  return std::nullopt;
}

std::vector<UsageRow> summarize_usage(const std::vector<UsageEvent>& events, UsageGroup group_by) {
  std::map<std::string, UsageRow> groups;
  for (const auto& e : events) {
    std::string key;
    switch (group_by) {
      case UsageGroup::run: key = e.run_id; break;
      case UsageGroup::agent_role: key = e.agent_role; break;
      case UsageGroup::model: key = e.model; break;
      case UsageGroup::all: key = "*"; break;
    }
    auto& row = groups[key];
    row.key = key;
    row.input_tokens += e.input_tokens;
    row.output_tokens += e.output_tokens;
    row.total_cost += e.cost;
    row.total_latency_seconds += e.latency_seconds;
  }
  std::vector<UsageRow> rows;
  rows.reserve(groups.size());
  for (auto& [_, row] : groups) {
    row.total_tokens = row.input_tokens + row.output_tokens;
    if (row.total_latency_seconds > 0.0)
      row.tokens_per_second = static_cast<double>(row.output_tokens) / row.total_latency_seconds;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sie::gateway
