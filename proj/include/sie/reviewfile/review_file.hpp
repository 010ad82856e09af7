#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sie::reviewfile {

enum class Verdict { correct, incorrect, missing, unreviewed };

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view s) noexcept;

struct ReviewRow {
  std::string field_path;
  std::string original_value;   ///< empty for missing rows
  Verdict verdict = Verdict::unreviewed;
  std::string corrected_value;  ///< compact JSON patch, or empty
  std::optional<double> judge_score;

  bool operator==(const ReviewRow&) const = default;
};

/// Exported reviewer verdicts for one run. CSV layout:
///
///   task_id,run_id,model_name
///   <task>,<run>,<model>
///   field_path,original_value,verdict,corrected_value,judge_score
///   <one row per reviewed field>
///
/// Fields follow RFC 4180 quoting.
struct ReviewFile {
  std::string task_id;
  std::string run_id;
  std::string model_name;
  std::vector<ReviewRow> rows;

  bool operator==(const ReviewFile&) const = default;
};

std::string write_review_file(const ReviewFile& file);

/// Throws Errc::format with the 1-based line number as subject for a
/// wrong header, a wrong column count, an unknown verdict or a score that
/// is not a number in [0, 1].
/// Rows are returned with their source line numbers when `lines` is given.
ReviewFile parse_review_file(std::string_view bytes, std::vector<std::size_t>* lines = nullptr);

/// RFC 4180 records. Throws Errc::format on an unterminated quote. Each
/// record's starting line number goes to `lines` when given.
std::vector<std::vector<std::string>> parse_csv(std::string_view bytes,
                                                std::vector<std::size_t>* lines = nullptr);
std::string csv_escape(std::string_view field);

}  // namespace sie::reviewfile
