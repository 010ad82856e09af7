#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sie/reviewfile/review_file.hpp"

namespace sie::eval {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// correct -> tp, incorrect -> fp, missing -> fn. An unreviewed row raises
/// Errc::format naming its line.
ConfusionCounts counts_from_review(std::string_view bytes);
ConfusionCounts counts_from_review(const reviewfile::ReviewFile& file);

/// A ratio with a zero denominator is 0.
PRF prf(const ConfusionCounts& counts) noexcept;

/// 2PR / (P + R), or 0 when P + R is 0.
double harmonic_f1(double precision, double recall) noexcept;

struct MicroAverage {
  ConfusionCounts counts;
  PRF scores;
};

/// Reads each review file path, sums counts over all files, then scores
/// once. Errc::empty_input for no files; io and format errors propagate.
MicroAverage micro_average(std::span<const std::string> review_files);

struct ConceptRow {
  std::string curie;  ///< CURIE or full IRI
  std::string label;
  std::string ontology_name;
};

/// "http://purl.obolibrary.org/obo/UBERON_0000956" -> "UBERON:0000956".
/// CURIEs pass through; anything else is returned unchanged.
std::string to_curie(std::string_view id);

/// Same concept id: prefixes compared case-insensitively, local ids exactly,
/// IRIs converted first.
bool same_curie(std::string_view a, std::string_view b);

struct AlignmentResult {
  std::size_t aligned = 0;
  std::size_t total = 0;
  double rate_percent = 0.0;
  /// Indexes of rows that did not match, for manual inspection.
  std::vector<std::size_t> mismatched;
};

/// A row is aligned when id, label and ontology name all match. Throws
/// Errc::length_mismatch or Errc::empty_input.
AlignmentResult concept_alignment_rate(std::span<const ConceptRow> predicted,
                                       std::span<const ConceptRow> gold);

struct CoverageRow {
  std::size_t found = 0;
  std::size_t pool = 0;
  double fraction = 0.0;
};

/// Each model's share of the union of all models' labels, after casefolding
/// and whitespace collapsing. Errc::empty_input for no models.
std::map<std::string, CoverageRow> detection_coverage(
    const std::map<std::string, std::set<std::string>>& per_model);

/// -sum p ln p over types with a positive count. Errc::empty_distribution
/// when the counts sum to 0.
double shannon_diversity(const std::map<std::string, std::uint64_t>& type_counts);

struct JudgeStats {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for one score
  std::size_t n = 0;
};

/// Errc::empty_input for no scores, Errc::invalid_argument for a score
/// outside [0, 1].
JudgeStats judge_stats(std::span<const double> scores);

inline constexpr const char* kCanonicalSections[] = {"Abstract", "Introduction", "Methods",
                                                     "Results",  "Discussion",   "Other"};

/// Lower-cased heading -> canonical section.
using SectionAliases = std::map<std::string, std::string>;
SectionAliases default_section_aliases();

/// Canonical section for a heading: leading numbering is dropped, then the
/// heading is matched case-insensitively against canonical names and
/// aliases; anything else is "Other".
std::string canonical_section(std::string_view heading, const SectionAliases& aliases);

/// Percent of items per canonical section (all six keys present). Errc::empty_input
/// for no items.
std::map<std::string, double> section_distribution(std::span<const std::string> headings,
                                                   const SectionAliases& aliases);

/// Phrase equivalence used as the automatic tier when comparing free-text
/// values: equal after casefolding and dropping stop words.
bool phrase_equivalent(std::string_view a, std::string_view b);

}  // namespace sie::eval
