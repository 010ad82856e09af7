#include <random>

#include "doctest.h"
#include "sie/common/error.hpp"
#include "sie/reviewfile/review_file.hpp"

using namespace sie;
using namespace sie::reviewfile;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(Errc::syntax, "");
}

std::string nasty(std::mt19937& rng) {
  static const char* parts[] = {"cortex", ",", "\"", "\n", "\r\n", " ", "é", "{\"a\":1}", "", "x"};
  std::string s;
  for (int i = 0, n = rng() % 6; i < n; ++i) s += parts[rng() % 10];
  return s;
}

const char* kHeader = "task_id,run_id,model_name\n";
const char* kColumns = "field_path,original_value,verdict,corrected_value,judge_score\n";

}  // namespace

TEST_CASE("verdict names") {
  for (auto v : {Verdict::correct, Verdict::incorrect, Verdict::missing, Verdict::unreviewed})
    CHECK(parse_verdict(to_string(v)) == v);
  CHECK_FALSE(parse_verdict("Correct"));
  CHECK_FALSE(parse_verdict("wrong"));
}

TEST_CASE("a written review file parses back to itself") {
  ReviewFile f{"ner", "run-1", "anthropic/claude-3.7-sonnet",
               {{"records[0].label", "\"cortex\"", Verdict::correct, "", 0.98},
                {"records[+]", "", Verdict::missing, "{\"label\":\"mice\"}", std::nullopt}}};
  const auto bytes = write_review_file(f);
  CHECK(bytes.rfind(kHeader, 0) == 0);
  std::vector<std::size_t> lines;
  CHECK(parse_review_file(bytes, &lines) == f);
  CHECK(lines == std::vector<std::size_t>{4, 5});
}

TEST_CASE("random rows with quotes, commas and newlines round-trip") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    ReviewFile f{"task" + nasty(rng), nasty(rng), nasty(rng), {}};
    for (int i = 0, n = rng() % 8; i < n; ++i) {
      ReviewRow r;
      r.field_path = "records[" + std::to_string(i) + "]." + nasty(rng);
      r.original_value = nasty(rng);
      r.verdict = static_cast<Verdict>(rng() % 4);
      r.corrected_value = nasty(rng);
      if (rng() % 2) r.judge_score = (rng() % 1001) / 1000.0;
      f.rows.push_back(r);
    }
    CHECK(parse_review_file(write_review_file(f)) == f);
  }
}

TEST_CASE("format errors carry the failing line") {
  auto line_of = [](const std::string& bytes) {
    const auto e = error_of([&] { parse_review_file(bytes); });
    CHECK(e.code() == Errc::format);
    return e.subject();
  };
  CHECK(line_of("task,run,model\nner,r,m\n") == "1");
  CHECK(line_of(std::string(kHeader) + "ner,r\n" + kColumns) == "2");
  CHECK(line_of(std::string(kHeader) + "ner,r,m\nfield,verdict\n") == "3");
  CHECK(line_of(std::string(kHeader) + "ner,r,m\n" + kColumns + "a,b,correct,,\na,b,maybe,,\n") == "5");
  CHECK(line_of(std::string(kHeader) + "ner,r,m\n" + kColumns + "a,b,correct,,high\n") == "4");
  CHECK(line_of(std::string(kHeader) + "ner,r,m\n" + kColumns + "a,b,correct,,1.5\n") == "4");
  CHECK(line_of(std::string(kHeader) + "ner,r,m\n" + kColumns + "a,b,correct\n") == "4");
  CHECK(line_of("") == "1");
}

TEST_CASE("a file with no rows is valid") {
  const auto f = parse_review_file(std::string(kHeader) + "ner,r,m\n" + kColumns);
  CHECK(f.rows.empty());
  CHECK(f.task_id == "ner");
}

TEST_CASE("CSV records") {
  std::vector<std::size_t> lines;
  const auto recs = parse_csv("a,\"b,c\"\r\n\"multi\nline\",\"q\"\"uote\"\nlast", &lines);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0] == std::vector<std::string>{"a", "b,c"});
  CHECK(recs[1] == std::vector<std::string>{"multi\nline", "q\"uote"});
  CHECK(recs[2] == std::vector<std::string>{"last"});
  CHECK(lines == std::vector<std::size_t>{1, 2, 4});
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto e = error_of([] { parse_csv("a,\"open\n"); });
  CHECK(e.code() == Errc::format);
}
