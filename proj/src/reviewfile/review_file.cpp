#include "sie/reviewfile/review_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "sie/common/error.hpp"

namespace sie::reviewfile {

namespace {

constexpr std::string_view kHeader1 = "task_id,run_id,model_name";
constexpr std::string_view kHeader3 = "field_path,original_value,verdict,corrected_value,judge_score";

[[noreturn]] void format_error(std::size_t line, const std::string& why) {
  fail(Errc::format, "review file line " + std::to_string(line) + ": " + why, std::to_string(line));
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::missing: return "missing";
    case Verdict::unreviewed: return "unreviewed";
  }
  return "unreviewed";
}

std::optional<Verdict> parse_verdict(std::string_view s) noexcept {
  for (auto v : {Verdict::correct, Verdict::incorrect, Verdict::missing, Verdict::unreviewed})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::string csv_escape(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string s = "\"";
  for (char c : f) {
    if (c == '"') s += '"';
    s += c;
  }
  return s + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view bytes,
                                                std::vector<std::size_t>* lines) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1, record_line = 1;
  bool in_quotes = false, any = false;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    out.push_back(std::move(record));
    record.clear();
    if (lines) lines->push_back(record_line);
    any = false;
  };
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const char c = bytes[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (!any) record_line = line;
    if (c == '"' && field.empty()) {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' && i + 1 < bytes.size() && bytes[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      field += c;
      any = true;
    }
  }
  if (in_quotes) format_error(record_line, "unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return out;
}

std::string write_review_file(const ReviewFile& f) {
  std::string s;
  s += std::string(kHeader1) + "\n";
  s += csv_escape(f.task_id) + "," + csv_escape(f.run_id) + "," + csv_escape(f.model_name) + "\n";
  s += std::string(kHeader3) + "\n";
  for (const auto& r : f.rows) {
    std::string score;
    if (r.judge_score) {
      char buf[32];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *r.judge_score);
      score.assign(buf, p);
    }
    s += csv_escape(r.field_path) + "," + csv_escape(r.original_value) + "," +
         std::string(to_string(r.verdict)) + "," + csv_escape(r.corrected_value) + "," + score +
         "\n";
  }
  return s;
}

ReviewFile parse_review_file(std::string_view bytes, std::vector<std::size_t>* row_lines) {
  std::vector<std::size_t> lines;
  auto records = parse_csv(bytes, &lines);
  // Blank lines parse as a single empty field; drop them.
  std::vector<std::vector<std::string>> recs;
  std::vector<std::size_t> recl;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].size() == 1 && records[i][0].empty()) continue;
    recs.push_back(std::move(records[i]));
    recl.push_back(lines[i]);
  }
  if (recs.empty() || join(recs[0]) != kHeader1)
    format_error(recs.empty() ? 1 : recl[0], "expected header \"" + std::string(kHeader1) + "\"");
  if (recs.size() < 2 || recs[1].size() != 3)
    format_error(recs.size() < 2 ? recl[0] + 1 : recl[1], "expected task_id,run_id,model_name values");
  if (recs.size() < 3 || join(recs[2]) != kHeader3)
    format_error(recs.size() < 3 ? recl[1] + 1 : recl[2],
                 "expected header \"" + std::string(kHeader3) + "\"");
  ReviewFile f{recs[1][0], recs[1][1], recs[1][2], {}};
  for (std::size_t i = 3; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const auto line = recl[i];
    if (r.size() != 5) format_error(line, "expected 5 columns, found " + std::to_string(r.size()));
    const auto v = parse_verdict(r[2]);
    if (!v) format_error(line, "unknown verdict \"" + r[2] + "\"");
    ReviewRow row{r[0], r[1], *v, r[3], std::nullopt};
    if (!r[4].empty()) {
      double d = 0.0;
      auto [p, ec] = std::from_chars(r[4].data(), r[4].data() + r[4].size(), d);
      if (ec != std::errc{} || p != r[4].data() + r[4].size() || !std::isfinite(d) ||
          d < 0.0 || d > 1.0)
        format_error(line, "bad judge_score \"" + r[4] + "\"");
      row.judge_score = d;
    }
    f.rows.push_back(std::move(row));
    if (row_lines) row_lines->push_back(line);
  }
  return f;
}

}  // namespace sie::reviewfile
