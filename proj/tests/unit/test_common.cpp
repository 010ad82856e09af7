#include <random>
#include <string>

#include "doctest.h"
#include "sie/common/digest.hpp"
#include "sie/common/envelope.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

using namespace sie;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::syntax;
}

std::string random_bytes(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(0, 255);
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(d(rng));
  return s;
}

}  // namespace

TEST_CASE("envelope round-trips arbitrary bodies") {
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto body = random_bytes(rng, rng() % 300);
    const auto sealed = seal("SSTST", 3, body);
    CHECK(unseal("SSTST", 3, sealed) == body);
    CHECK(peek_version("SSTST", sealed) == 3);
  }
}

TEST_CASE("envelope rejects damage, foreign magic and other versions") {
  const auto sealed = seal("SSRUN", 1, "{\"a\":1}");
  CHECK(code_of([&] { unseal("SSIDX", 1, sealed); }) == Errc::corrupt_snapshot);
  CHECK(code_of([&] { unseal("SSRUN", 2, sealed); }) == Errc::version_mismatch);
  auto flipped = sealed;
  flipped.back() = flipped.back() == '1' ? '2' : '1';
  CHECK(code_of([&] { unseal("SSRUN", 1, flipped); }) == Errc::corrupt_snapshot);
  CHECK(code_of([&] { unseal("SSRUN", 1, sealed.substr(0, sealed.size() - 1)); }) ==
        Errc::corrupt_snapshot);
  CHECK(code_of([&] { unseal("SSRUN", 1, ""); }) == Errc::corrupt_snapshot);
}

TEST_CASE("digests match published vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("whitespace collapsing and casefolding") {
  CHECK(text::collapse_whitespace("  a \t\n b  ") == "a b");
  CHECK(text::normalize_key("  Cerebral   CORTEX ") == "cerebral cortex");
  CHECK(text::strip_controls(std::string("a\x01" "b\x7f" "c")) == "abc");
  CHECK(text::strip_controls("a\xc2\x85z") == "az");
  CHECK(text::strip_controls("caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("content words drop stop words") {
  const auto w = text::content_words("The cortex of the brain");
  CHECK(w == std::vector<std::string>{"cortex", "brain"});
}

TEST_CASE("sentence split covers the input exactly") {
  std::mt19937 rng(11);
  const char* parts[] = {"Alpha beta.", " ", "Gamma?", "  ", "3 items!", "e.g. x", "\n", "Done"};
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (int k = 0; k < 8; ++k) s += parts[rng() % 8];
    std::string joined;
    for (auto v : text::split_sentences(s)) joined += v;
    CHECK(joined == s);
  }
  const auto two = text::split_sentences("One here. Two there.");
  REQUIRE(two.size() == 2);
  CHECK(two[1] == "Two there.");
}

TEST_CASE("utf8_floor never splits a code point") {
  const std::string s = "a\xc3\xa9\xe2\x82\xac";  // a é €
  CHECK(text::utf8_floor(s, 2) == 1);
  CHECK(text::utf8_floor(s, 3) == 3);
  CHECK(text::utf8_floor(s, 5) == 3);
  CHECK(text::utf8_floor(s, 6) == 6);
}
