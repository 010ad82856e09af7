#include "sie/eval/metrics.hpp"

#include <cctype>
#include <cmath>

#include "sie/common/error.hpp"
#include "sie/common/io.hpp"
#include "sie/common/text.hpp"

namespace sie::eval {

ConfusionCounts counts_from_review(const reviewfile::ReviewFile& file) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    switch (file.rows[i].verdict) {
      case reviewfile::Verdict::correct: ++c.tp; break;
      case reviewfile::Verdict::incorrect: ++c.fp; break;
      case reviewfile::Verdict::missing: ++c.fn; break;
      case reviewfile::Verdict::unreviewed:
        fail(Errc::format, "row " + std::to_string(i + 1) + " is unreviewed", std::to_string(i + 1));
    }
  }
  return c;
}

ConfusionCounts counts_from_review(std::string_view bytes) {
  std::vector<std::size_t> lines;
  const auto file = reviewfile::parse_review_file(bytes, &lines);
  for (std::size_t i = 0; i < file.rows.size(); ++i)
    if (file.rows[i].verdict == reviewfile::Verdict::unreviewed)
      fail(Errc::format, "review file line " + std::to_string(lines[i]) + ": unreviewed row",
           std::to_string(lines[i]));
  return counts_from_review(file);
}

double harmonic_f1(double p, double r) noexcept { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

PRF prf(const ConfusionCounts& c) noexcept {
  PRF out;
  const double tp = static_cast<double>(c.tp);
  if (c.tp + c.fp) out.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn) out.recall = tp / static_cast<double>(c.tp + c.fn);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

MicroAverage micro_average(std::span<const std::string> files) {
  if (files.empty()) fail(Errc::empty_input, "micro-averaging needs at least one review file");
  MicroAverage m;
  for (const auto& f : files) m.counts += counts_from_review(read_file(f));
  m.scores = prf(m.counts);
  return m;
}

std::string to_curie(std::string_view id) {
  if (id.find("://") == std::string_view::npos) return std::string(id);
  auto tail = id;
  if (auto cut = tail.find_last_of("/#"); cut != std::string_view::npos) tail.remove_prefix(cut + 1);
  const auto us = tail.find('_');
  if (us == std::string_view::npos || us == 0 || us + 1 == tail.size()) return std::string(id);
  return std::string(tail.substr(0, us)) + ":" + std::string(tail.substr(us + 1));
}

bool same_curie(std::string_view a, std::string_view b) {
  const auto ca = to_curie(a), cb = to_curie(b);
  const auto pa = ca.find(':'), pb = cb.find(':');
  if (pa == std::string::npos || pb == std::string::npos) return ca == cb;
  return text::casefold(ca.substr(0, pa)) == text::casefold(cb.substr(0, pb)) &&
         ca.substr(pa + 1) == cb.substr(pb + 1);
}

AlignmentResult concept_alignment_rate(std::span<const ConceptRow> predicted,
                                       std::span<const ConceptRow> gold) {
  if (predicted.size() != gold.size())
    fail(Errc::length_mismatch, "predicted has " + std::to_string(predicted.size()) +
                                    " rows, gold has " + std::to_string(gold.size()));
  if (gold.empty()) fail(Errc::empty_input, "alignment rate needs at least one row");
  AlignmentResult r;
  r.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = predicted[i];
    const auto& g = gold[i];
    if (same_curie(p.curie, g.curie) && p.label == g.label && p.ontology_name == g.ontology_name)
      ++r.aligned;
    else
      r.mismatched.push_back(i);
  }
  r.rate_percent = 100.0 * static_cast<double>(r.aligned) / static_cast<double>(r.total);
  return r;
}

std::map<std::string, CoverageRow> detection_coverage(
    const std::map<std::string, std::set<std::string>>& per_model) {
  if (per_model.empty()) fail(Errc::empty_input, "coverage needs at least one model");
  std::map<std::string, std::set<std::string>> normalized;
  std::set<std::string> pool;
  for (const auto& [model, labels] : per_model) {
    auto& set = normalized[model];
    for (const auto& l : labels) {
      auto key = text::normalize_key(l);
      if (key.empty()) continue;
      set.insert(key);
      pool.insert(std::move(key));
    }
  }
  std::map<std::string, CoverageRow> out;
  for (const auto& [model, set] : normalized) {
    CoverageRow row{set.size(), pool.size(), 0.0};
    if (!pool.empty()) row.fraction = static_cast<double>(set.size()) / static_cast<double>(pool.size());
    out[model] = row;
  }
  return out;
}

double shannon_diversity(const std::map<std::string, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) fail(Errc::empty_distribution, "type counts sum to zero");
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

JudgeStats judge_stats(std::span<const double> scores) {
  if (scores.empty()) fail(Errc::empty_input, "judge statistics need at least one score");
  JudgeStats s;
  s.n = scores.size();
  for (double x : scores) {
    if (!(x >= 0.0 && x <= 1.0)) fail(Errc::invalid_argument, "judge score outside [0, 1]");
    s.mean += x;
  }
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : scores) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

SectionAliases default_section_aliases() {
  return {{"summary", "Abstract"},
          {"background", "Introduction"},
          {"materials and methods", "Methods"},
          {"methods and materials", "Methods"},
          {"method", "Methods"},
          {"methodology", "Methods"},
          {"experimental procedures", "Methods"},
          {"materials", "Methods"},
          {"findings", "Results"},
          {"result", "Results"},
          {"conclusion", "Discussion"},
          {"conclusions", "Discussion"},
          {"discussion and conclusions", "Discussion"}};
}

std::string canonical_section(std::string_view heading, const SectionAliases& aliases) {
  auto h = text::normalize_key(heading);
  std::size_t i = 0;
  while (i < h.size() && (std::isdigit(static_cast<unsigned char>(h[i])) || h[i] == '.' || h[i] == ' '))
    ++i;
  h.erase(0, i);
  for (const char* c : kCanonicalSections)
    if (h == text::casefold(c) && std::string_view(c) != "Other") return c;
  if (auto it = aliases.find(h); it != aliases.end()) return it->second;
  return "Other";
}

std::map<std::string, double> section_distribution(std::span<const std::string> headings,
                                                   const SectionAliases& aliases) {
  if (headings.empty()) fail(Errc::empty_input, "section distribution needs at least one item");
  std::map<std::string, std::size_t> counts;
  for (const auto& h : headings) ++counts[canonical_section(h, aliases)];
  std::map<std::string, double> out;
  for (const char* c : kCanonicalSections)
    out[c] = 100.0 * static_cast<double>(counts[c]) / static_cast<double>(headings.size());
  return out;
}

bool phrase_equivalent(std::string_view a, std::string_view b) {
  return text::content_words(a) == text::content_words(b);
}

}  // namespace sie::eval
