#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sie/common/error.hpp"
#include "sie/common/io.hpp"
#include "sie/eval/inputs.hpp"
#include "sie/eval/metrics.hpp"
#include "sie/eval/report.hpp"
#include "sie/gateway/ledger.hpp"

using namespace sie;
using namespace sie::eval;
namespace fs = std::filesystem;

namespace {

const fs::path kEval = fs::path(SIE_FIXTURE_DIR) / "eval";

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(Errc::syntax, "");
}

std::string review_name(const char* model, bool hil) {
  return std::string(model) + (hil ? "_hil" : "_plain");
}

std::vector<std::string> resource_files(const char* model, bool hil) {
  std::vector<std::string> out;
  for (int p = 1; p <= 3; ++p)
    out.push_back((kEval / "resource_extraction" / (review_name(model, hil) + "_doc" + std::to_string(p) + ".csv")).string());
  return out;
}

std::string review_csv(const std::vector<std::string>& verdicts) {
  std::string s = "task_id,run_id,model_name\nt,r,m\nfield_path,original_value,verdict,corrected_value,judge_score\n";
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    s += "records[" + std::to_string(i) + "].label,v,"+ verdicts[i] + ",,\n";
  return s;
}

// PREFIX:ID with an upper-cased prefix, from either form.
std::string norm_id(std::string id) {
  const std::string obo = "http://purl.obolibrary.org/obo/";
  if (id.rfind(obo, 0) == 0) {
    id = id.substr(obo.size());
    id[id.find('_')] = ':';
  }
  for (std::size_t i = 0; i < id.find(':'); ++i) id[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(id[i])));
  return id;
}

std::set<std::string> label_file(const char* dir, const char* model) {
  return parse_label_set(read_file(kEval / "coverage" / dir / (std::string(model) + ".txt")));
}

}  // namespace

TEST_CASE("schema extraction review files reproduce the printed scores") {
  for (const auto& row : testing::kSchemaExtraction) {
    const auto path = kEval / "schema_extraction" / (review_name(row.model, row.hil) + ".csv");
    const auto counts = counts_from_review(read_file(path));
    const auto t = testing::tally_verdicts(path);
    CHECK(t.other == 0);
    CHECK(counts == ConfusionCounts{t.correct, t.incorrect, t.missing});
    const auto s = prf(counts);
    CHECK(testing::round_to(s.precision, 2) == doctest::Approx(row.precision));
    CHECK(testing::round_to(s.recall, 2) == doctest::Approx(row.recall));
    CHECK(testing::round_to(s.f1, 2) == doctest::Approx(row.f1));
  }
}

TEST_CASE("reconstructed schema extraction counts") {
  struct Case {
    ConfusionCounts c;
    double p, r, f;
  };
  for (const auto& k : {Case{{39, 0, 0}, 1.0, 1.0, 1.0}, Case{{9, 0, 30}, 1.0, 0.2308, 0.3750},
                        Case{{34, 0, 5}, 1.0, 0.8718, 0.9315}, Case{{7, 0, 32}, 1.0, 0.1795, 0.3043}}) {
    const auto s = prf(k.c);
    CHECK(s.precision == doctest::Approx(k.p).epsilon(1e-4));
    CHECK(std::abs(s.recall - k.r) < 5e-5);
    CHECK(std::abs(s.f1 - k.f) < 5e-5);
  }
}

TEST_CASE("resource extraction micro-average matches the printed table") {
  for (const auto& row : testing::kResourceExtraction) {
    const auto files = resource_files(row.model, row.hil);
    const auto m = micro_average(files);
    ConfusionCounts brute;
    for (const auto& f : files) {
      const auto t = testing::tally_verdicts(f);
      brute += ConfusionCounts{t.correct, t.incorrect, t.missing};
    }
    CHECK(m.counts == brute);
    CHECK(std::abs(m.scores.precision - row.precision) <= 0.00005);
    CHECK(std::abs(m.scores.recall - row.recall) <= 0.00005);
    CHECK(std::abs(m.scores.f1 - row.f1) <= 0.0005);
    CHECK(std::abs(harmonic_f1(row.precision, row.recall) - row.f1) <= 0.001);
  }
}

TEST_CASE("micro-average sums counts before scoring") {
  const auto dir = fs::path(SIE_SCRATCH_DIR) / "eval_micro";
  fs::create_directories(dir);
  write_file_atomic(dir / "a.csv", review_csv({"correct", "correct", "correct", "incorrect"}));
  write_file_atomic(dir / "b.csv", review_csv({"correct", "incorrect", "missing", "missing"}));
  const std::vector<std::string> files{(dir / "a.csv").string(), (dir / "b.csv").string()};
  const auto m = micro_average(files);
  CHECK(m.counts == ConfusionCounts{4, 2, 2});
  CHECK(m.scores.precision == doctest::Approx(4.0 / 6));
  CHECK(m.scores.recall == doctest::Approx(4.0 / 6));
  CHECK(error_of([] { micro_average(std::vector<std::string>{}); }).code() == Errc::empty_input);
}

TEST_CASE("unreviewed rows are a format error naming the line") {
  const auto e = error_of([] { counts_from_review(review_csv({"correct", "unreviewed"})); });
  CHECK(e.code() == Errc::format);
  CHECK(e.subject() == "5");
}

TEST_CASE("prf edge cases") {
  const auto z = prf({0, 0, 0});
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(prf({0, 3, 0}).f1 == 0.0);
  CHECK(harmonic_f1(0.0, 0.0) == 0.0);
}

TEST_CASE("harmonic identity and monotonicity on random counts") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    ConfusionCounts c{rng() % 200, rng() % 200, rng() % 200};
    const auto s = prf(c);
    if (s.precision + s.recall == 0) {
      CHECK(s.f1 == 0.0);
    } else {
      CHECK(std::abs(s.f1 - 2 * s.precision * s.recall / (s.precision + s.recall)) <= 1e-12);
    }
    CHECK(s.f1 <= std::max(s.precision, s.recall) + 1e-15);
    CHECK(s.f1 >= std::min(s.precision, s.recall) - 1e-15);
    auto more = c;
    ++more.tp;
    const auto s2 = prf(more);
    CHECK(s2.precision >= s.precision);
    CHECK(s2.recall >= s.recall);
  }
}

TEST_CASE("printed alignment rates come from 24-row fractions") {
  const auto hi = testing::fractions_rounding_to(91.6667, 4, 24);
  const auto lo = testing::fractions_rounding_to(37.5, 4, 24);
  CHECK(std::find(hi.begin(), hi.end(), std::pair{22, 24}) != hi.end());
  CHECK(std::find(lo.begin(), lo.end(), std::pair{9, 24}) != lo.end());
  for (auto [k, n] : hi) CHECK(k * 12 == n * 11);
  for (auto [k, n] : lo) CHECK(k * 8 == n * 3);
}

TEST_CASE("concept alignment over the fixtures") {
  const auto gold = parse_concept_rows(read_file(kEval / "alignment" / "gold.csv"));
  REQUIRE(gold.size() == 24);
  for (const auto& row : testing::kAlignmentRates) {
    const auto pred = parse_concept_rows(read_file(kEval / "alignment" / (std::string(row.model) + ".csv")));
    const auto r = concept_alignment_rate(pred, gold);
    CHECK(r.total == 24);
    CHECK(r.rate_percent == 100.0 * r.aligned / 24);
    CHECK(testing::round_to(r.rate_percent, 4) == row.percent);
    CHECK(r.mismatched.size() == 24 - r.aligned);
    std::size_t brute = 0;
    for (std::size_t i = 0; i < 24; ++i)
      brute += norm_id(pred[i].curie) == norm_id(gold[i].curie) &&
               pred[i].label == gold[i].label && pred[i].ontology_name == gold[i].ontology_name;
    CHECK(brute == r.aligned);
  }
}

TEST_CASE("alignment rate errors") {
  const std::vector<ConceptRow> one{{"UBERON:1", "a", "UBERON"}};
  const std::vector<ConceptRow> two{{"UBERON:1", "a", "UBERON"}, {"PO:1", "b", "PO"}};
  CHECK(error_of([&] { concept_alignment_rate(one, two); }).code() == Errc::length_mismatch);
  CHECK(error_of([] { concept_alignment_rate({}, {}); }).code() == Errc::empty_input);
  const auto e = error_of([] { parse_concept_rows("curie,label,ontology_name\nA:1,x\n"); });
  CHECK(e.code() == Errc::format);
  CHECK(e.subject() == "2");
}

TEST_CASE("curie conversion") {
  CHECK(to_curie("http://purl.obolibrary.org/obo/UBERON_0000956") == "UBERON:0000956");
  CHECK(to_curie("NCBITaxon:7898") == "NCBITaxon:7898");
  CHECK(to_curie("fish") == "fish");
  CHECK(same_curie("NCBITAXON:7898", "NCBITaxon:7898"));
  CHECK(same_curie("http://purl.obolibrary.org/obo/NCBITaxon_7898", "ncbitaxon:7898"));
  CHECK_FALSE(same_curie("NCBITaxon:7896", "NCBITaxon:7898"));
}

TEST_CASE("detection coverage reproduces the printed percentages") {
  std::map<std::string, std::map<std::string, std::set<std::string>>> settings;
  for (const char* dir : {"hil", "plain"})
    for (const char* m : {"claude", "deepseek", "gpt4omini"}) settings[dir][m] = label_file(dir, m);
  const auto hil = detection_coverage(settings["hil"]);
  const auto plain = detection_coverage(settings["plain"]);
  for (const auto& row : testing::kCoverage) {
    const auto& r = (row.hil ? hil : plain).at(row.model);
    CHECK(r.found == row.found);
    CHECK(r.pool == row.pool);
    CHECK(std::abs(100.0 * r.fraction - row.percent) <= 0.05);
  }
  CHECK(error_of([] { detection_coverage({}); }).code() == Errc::empty_input);
}

TEST_CASE("coverage normalises labels and partitions the pool") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, std::set<std::string>> per;
    std::set<std::string> pool;
    const int models = 1 + rng() % 4;
    for (int m = 0; m < models; ++m) {
      auto& s = per["m" + std::to_string(m)];
      for (int i = 0, n = rng() % 12; i < n; ++i) {
        const int id = rng() % 20;
        pool.insert("term " + std::to_string(id));
        s.insert(rng() % 2 ? "term " + std::to_string(id) : "  TERM\t" + std::to_string(id) + " ");
      }
    }
    const auto cov = detection_coverage(per);
    for (const auto& [m, r] : cov) {
      CHECK(r.pool == pool.size());
      CHECK(r.found <= r.pool);
      std::set<std::string> own;
      for (const auto& l : per[m]) {
        std::string n;
        for (char c : l) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::string collapsed;
        bool space = false;
        for (char c : n) {
          if (std::isspace(static_cast<unsigned char>(c))) {
            space = !collapsed.empty();
          } else {
            if (space) collapsed += ' ';
            space = false;
            collapsed += c;
          }
        }
        own.insert(collapsed);
      }
      CHECK(r.found == own.size());
    }
  }
}

TEST_CASE("shannon index of a uniform distribution is ln n") {
  for (std::uint64_t n = 2; n <= 64; ++n) {
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < n; ++i) counts["t" + std::to_string(i)] = 3;
    CHECK(std::abs(shannon_diversity(counts) - std::log(static_cast<double>(n))) <= 1e-12);
  }
}

TEST_CASE("printed shannon values respect the type-count bound") {
  for (auto [h, types] : testing::kShannon) CHECK(h <= std::log(static_cast<double>(types)));
}

TEST_CASE("shannon bounds on random distributions") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::map<std::string, std::uint64_t> counts;
    std::size_t positive = 0;
    for (int i = 0, n = 1 + rng() % 30; i < n; ++i) {
      const auto c = rng() % 4 == 0 ? 0u : 1 + rng() % 50;
      counts["t" + std::to_string(i)] = c;
      positive += c > 0;
    }
    if (positive == 0) {
      CHECK(error_of([&] { shannon_diversity(counts); }).code() == Errc::empty_distribution);
      continue;
    }
    const double h = shannon_diversity(counts);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(positive)) + 1e-12);
  }
  CHECK(shannon_diversity({{"a", 9}}) == 0.0);
}

TEST_CASE("judge statistics") {
  const auto scores = parse_scores(read_file(kEval / "judge_scores.txt"));
  const auto s = judge_stats(scores);
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(0.995));
  CHECK(s.std == doctest::Approx(0.01));
  CHECK(judge_stats(std::vector<double>{0.7}).std == 0.0);
  CHECK(error_of([] { judge_stats(std::vector<double>{}); }).code() == Errc::empty_input);
  CHECK(error_of([] { judge_stats(std::vector<double>{0.5, 1.2}); }).code() == Errc::invalid_argument);
  CHECK(parse_scores("0.5, 0.25\n1") == std::vector<double>{0.5, 0.25, 1.0});
}

TEST_CASE("section distribution") {
  const auto aliases = default_section_aliases();
  const auto h = parse_lines(read_file(kEval / "section_headings.txt"));
  REQUIRE(h.size() == 95);
  const auto d = section_distribution(h, aliases);
  CHECK(d.size() == 6);
  CHECK(d.at("Results") == doctest::Approx(100.0 * 51 / 95));
  CHECK(testing::round_to(d.at("Results"), 2) == 53.68);
  CHECK(d.at("Methods") == doctest::Approx(100.0 * 16 / 95));
  CHECK(d.at("Abstract") == doctest::Approx(100.0 * 8 / 95));
  CHECK(d.at("Other") == doctest::Approx(100.0 * 4 / 95));
  CHECK(std::accumulate(d.begin(), d.end(), 0.0, [](double a, const auto& kv) { return a + kv.second; }) ==
        doctest::Approx(100.0));

  const std::vector<std::string> odd{"Figure 3", "References", "Supplementary"};
  CHECK(section_distribution(odd, aliases).at("Other") == 100.0);
  CHECK(section_distribution(std::vector<std::string>{"3.1 Methods"}, aliases).at("Methods") == 100.0);
  CHECK(canonical_section("  2 Materials and Methods", aliases) == "Methods");
  CHECK(canonical_section("ABSTRACT", aliases) == "Abstract");
  CHECK(error_of([&] { section_distribution(std::vector<std::string>{}, aliases); }).code() == Errc::empty_input);
}

TEST_CASE("phrase equivalence") {
  CHECK(phrase_equivalent("the fish dataset", "Fish  dataset"));
  CHECK(phrase_equivalent("A Mouse", "mouse"));
  CHECK_FALSE(phrase_equivalent("fish schooling dataset", "fish dataset"));
}

TEST_CASE("usage ledger speed") {
  const auto events = gateway::UsageLedger::from_jsonl(read_file(kEval / "ledger_plain.jsonl")).events();
  const auto rows = gateway::summarize_usage(events, gateway::UsageGroup::all);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].output_tokens == 1565);
  REQUIRE(rows[0].tokens_per_second);
  CHECK(std::abs(*rows[0].tokens_per_second - 78.25) <= 1e-6);
}

TEST_CASE("report over an empty bundle") {
  const auto r = report(ReportBundle{});
  for (const char* k : {"prf", "alignment_rate", "coverage", "diversity", "judge_stats", "section_distribution", "usage"}) {
    REQUIRE(r.contains(k));
    CHECK(r[k].is_array());
    CHECK(r[k].empty());
  }
  CHECK(r["plots"]["cost_speed"].empty());
  CHECK(r["plots"]["hil_vs_non_hil"].empty());
  CHECK(r["plots"]["hil_cost_pairs"].empty());
}

TEST_CASE("report over the fixtures") {
  ReportBundle b;
  for (const auto& row : testing::kResourceExtraction) {
    ConfusionCounts c;
    for (const auto& f : resource_files(row.model, row.hil)) c += counts_from_review(read_file(f));
    b.prf.push_back({"resource-extraction", row.model, row.hil, c});
  }
  b.usage.push_back({"ner", "claude", false,
                     gateway::UsageLedger::from_jsonl(read_file(kEval / "ledger_plain.jsonl")).events()});
  b.usage.push_back({"ner", "claude", true,
                     gateway::UsageLedger::from_jsonl(read_file(kEval / "ledger_hil.jsonl")).events()});
  b.judge.push_back({"gpt4omini", false, parse_scores(read_file(kEval / "judge_scores.txt"))});
  b.diversity.push_back({"claude", true, {{"a", 2}, {"b", 2}}});
  const auto r = report(b);

  REQUIRE(r["prf"].size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(std::abs(r["prf"][i]["f1"].get<double>() - testing::kResourceExtraction[i].f1) <= 0.0005);
  CHECK(r["plots"]["hil_vs_non_hil"].size() == 3);
  REQUIRE(r["usage"].size() == 2);
  CHECK(r["usage"][0]["tokens_per_second"].get<double>() == doctest::Approx(78.25));
  REQUIRE(r["plots"]["hil_cost_pairs"].size() == 1);
  const auto& pair = r["plots"]["hil_cost_pairs"][0];
  CHECK(pair["hil_costlier"].get<bool>() == (pair["hil_cost"].get<double>() > pair["non_hil_cost"].get<double>()));
  CHECK(pair["hil_costlier"].get<bool>());
  CHECK(r["judge_stats"][0]["mean"].get<double>() == doctest::Approx(0.995));
  CHECK(r["diversity"][0]["shannon_h"].get<double>() == doctest::Approx(std::log(2.0)));

  const auto tables = plot_tables(r);
  std::set<std::string> names;
  for (const auto& t : tables) {
    names.insert(t.name);
    CHECK_FALSE(t.csv.empty());
  }
  CHECK(names.count("cost_speed"));
  CHECK(names.count("hil_vs_non_hil"));
  CHECK(names.count("hil_cost_pairs"));
}
