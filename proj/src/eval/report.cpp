#include "sie/eval/report.hpp"

#include "sie/reviewfile/review_file.hpp"

namespace sie::eval {

using nlohmann::json;

namespace {

json hil_json(const std::optional<bool>& hil) { return hil ? json(*hil) : json(nullptr); }

std::string cell(const json& v) {
  if (v.is_string()) return reviewfile::csv_escape(v.get<std::string>());
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

json report(const ReportBundle& b) {
  json out;

  json prf_rows = json::array();
  for (const auto& e : b.prf) {
    const auto s = prf(e.counts);
    prf_rows.push_back({{"task", e.task},
                        {"model", e.model},
                        {"hil", hil_json(e.hil)},
                        {"tp", e.counts.tp},
                        {"fp", e.counts.fp},
                        {"fn", e.counts.fn},
                        {"precision", s.precision},
                        {"recall", s.recall},
                        {"f1", s.f1}});
  }
  out["prf"] = prf_rows;

  json align = json::array();
  for (const auto& e : b.alignment)
    align.push_back({{"task", e.task},
                     {"model", e.model},
                     {"hil", hil_json(e.hil)},
                     {"aligned", e.result.aligned},
                     {"total", e.result.total},
                     {"rate_percent", e.result.rate_percent},
                     {"mismatched_rows", e.result.mismatched}});
  out["alignment_rate"] = align;

  json cov = json::array();
  if (!b.coverage.empty())
    for (const auto& [model, row] : detection_coverage(b.coverage))
      cov.push_back({{"model", model}, {"found", row.found}, {"pool", row.pool}, {"fraction", row.fraction}});
  out["coverage"] = cov;

  json div = json::array();
  for (const auto& e : b.diversity) {
    std::size_t types = 0;
    for (const auto& [_, c] : e.type_counts) types += c > 0;
    div.push_back({{"model", e.model},
                   {"hil", hil_json(e.hil)},
                   {"types", types},
                   {"shannon_h", shannon_diversity(e.type_counts)}});
  }
  out["diversity"] = div;

  json judge = json::array();
  for (const auto& e : b.judge) {
    const auto s = judge_stats(e.scores);
    judge.push_back({{"model", e.model}, {"hil", hil_json(e.hil)}, {"n", s.n}, {"mean", s.mean}, {"std", s.std}});
  }
  out["judge_stats"] = judge;

  json sections = json::array();
  for (const auto& e : b.sections)
    sections.push_back({{"model", e.model},
                        {"percent", section_distribution(e.headings, b.section_aliases)}});
  out["section_distribution"] = sections;

  json usage = json::array();
  json cost_speed = json::array();
  for (const auto& e : b.usage) {
    const auto rows = gateway::summarize_usage(e.events, gateway::UsageGroup::all);
    gateway::UsageRow r;
    if (!rows.empty()) r = rows.front();
    const json tps = r.tokens_per_second ? json(*r.tokens_per_second) : json(nullptr);
    usage.push_back({{"task", e.task},
                     {"model", e.model},
                     {"hil", e.hil},
                     {"events", e.events.size()},
                     {"input_tokens", r.input_tokens},
                     {"output_tokens", r.output_tokens},
                     {"total_tokens", r.total_tokens},
                     {"total_cost", r.total_cost},
                     {"total_latency_seconds", r.total_latency_seconds},
                     {"tokens_per_second", tps}});
    cost_speed.push_back({{"task", e.task},
                          {"model", e.model},
                          {"hil", e.hil},
                          {"total_cost", r.total_cost},
                          {"tokens_per_second", tps},
                          {"total_tokens", r.total_tokens}});
  }
  out["usage"] = usage;

  json hil_pairs = json::array();
  for (const auto& h : prf_rows) {
    if (h["hil"] != json(true)) continue;
    for (const auto& n : prf_rows)
      if (n["hil"] == json(false) && n["task"] == h["task"] && n["model"] == h["model"])
        hil_pairs.push_back({{"task", h["task"]},
                             {"model", h["model"]},
                             {"hil_precision", h["precision"]},
                             {"hil_recall", h["recall"]},
                             {"hil_f1", h["f1"]},
                             {"non_hil_precision", n["precision"]},
                             {"non_hil_recall", n["recall"]},
                             {"non_hil_f1", n["f1"]}});
  }
  json cost_pairs = json::array();
  for (const auto& h : usage) {
    if (h["hil"] != json(true)) continue;
    for (const auto& n : usage)
      if (n["hil"] == json(false) && n["task"] == h["task"] && n["model"] == h["model"])
        cost_pairs.push_back({{"task", h["task"]},
                              {"model", h["model"]},
                              {"hil_cost", h["total_cost"]},
                              {"non_hil_cost", n["total_cost"]},
                              {"hil_tokens", h["total_tokens"]},
                              {"non_hil_tokens", n["total_tokens"]},
                              {"hil_costlier",
                               h["total_cost"].get<double>() >= n["total_cost"].get<double>()}});
  }
  out["plots"] = {{"cost_speed", cost_speed}, {"hil_vs_non_hil", hil_pairs}, {"hil_cost_pairs", cost_pairs}};
  return out;
}

std::vector<PlotTable> plot_tables(const json& rep) {
  std::vector<PlotTable> out;
  if (!rep.contains("plots")) return out;
  for (const auto& [name, rows] : rep["plots"].items()) {
    PlotTable t{name, {}};
    if (rows.empty()) {
      out.push_back(std::move(t));
      continue;
    }
    std::vector<std::string> cols;
    for (const auto& [k, _] : rows.front().items()) cols.push_back(k);
    for (std::size_t i = 0; i < cols.size(); ++i) t.csv += (i ? "," : "") + cols[i];
    t.csv += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < cols.size(); ++i) t.csv += (i ? "," : "") + cell(r[cols[i]]);
      t.csv += "\n";
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace sie::eval
