#include <doctest.h>

#include <set>

#include "autodp/text.hpp"
#include "support.hpp"

using namespace autodp;
using namespace autodp::testing;

TEST_CASE("special char ratio") {
  CHECK(text::special_char_ratio("") == 0.0);
  CHECK(text::special_char_ratio("hello") == 0.0);
  CHECK(text::special_char_ratio("ab#$") == doctest::Approx(0.5));
  CHECK(text::special_char_ratio("Hi, you (there)! \"ok\"; a-b: c? d.") == 0.0);
  CHECK(text::special_char_ratio("数据清洗") == 0.0);
  CHECK(text::special_char_ratio("<b>") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("token count") {
  CHECK(text::token_count("hello world") == 2);
  CHECK(text::token_count("") == 0);
  CHECK(text::token_count("数据") == 2);
  CHECK(text::token_count("  a\tb\n c  ") == 3);
  CHECK(text::token_count("ab数据cd") == 4);
  CHECK(text::tokenize("ab数据cd") == std::vector<std::string>{"ab", "数", "据", "cd"});
}

/// 1 - distinct/total over whitespace word n-grams, computed directly.
double ngram_oracle(const std::string& s, std::size_t n) {
  std::vector<std::string> w;
  std::istringstream in(s);
  for (std::string t; in >> t;) w.push_back(t);
  if (w.size() < n) return 0.0;
  std::set<std::vector<std::string>> distinct;
  const std::size_t total = w.size() - n + 1;
  for (std::size_t i = 0; i < total; ++i) distinct.insert({w.begin() + i, w.begin() + i + n});
  return 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(total);
}

TEST_CASE("ngram repetition ratio") {
  CHECK(text::ngram_repetition_ratio("a b a b a b", 2) == doctest::Approx(0.6));
  CHECK(text::ngram_repetition_ratio("a b c", 5) == 0.0);
  CHECK(text::ngram_repetition_ratio("one two three four five six", 3) == 0.0);
  CHECK_THROWS_AS(text::ngram_repetition_ratio("a", 0), std::invalid_argument);

  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    const auto words = uniform(rng, 0, 25);
    for (std::size_t k = 0; k < words; ++k) s += std::string(1, static_cast<char>('a' + uniform(rng, 0, 3))) + " ";
    const auto n = uniform(rng, 1, 6);
    CHECK(text::ngram_repetition_ratio(s, n) == doctest::Approx(ngram_oracle(s, n)));
  }
}

TEST_CASE("strip noise") {
  CHECK(text::strip_noise("<b>hi</b>") == "hi");
  CHECK(text::strip_noise("plain text") == "plain text");
  CHECK(text::strip_noise(std::string("a\0  b&amp;c", 11)) == "a b&c");
  CHECK(text::strip_noise("x<!-- hidden -->y") == "xy");
  CHECK(text::strip_noise("&#65;&#x42;") == "AB");
  CHECK(text::strip_noise("&bogus; stays") == "&bogus; stays");
}

TEST_CASE("strip noise is idempotent on random markup") {
  Rng rng(9);
  static const std::vector<std::string> kParts = {"<p>", "</p>", "&amp;", "&lt;b&gt;", "  ", "\t", "\x01",
                                                  "word", "数据", "<", ">", "&", ";", "&#60;i&#62;"};
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto n = uniform(rng, 0, 12);
    for (std::size_t k = 0; k < n; ++k) s += kParts[uniform(rng, 0, kParts.size() - 1)];
    const auto once = text::strip_noise(s);
    CHECK(text::strip_noise(once) == once);
  }
}

TEST_CASE("utf8 round trip and malformed input") {
  const std::string s = "aé数😀";
  CHECK(text::encode_utf8(text::decode_utf8(s)) == s);
  CHECK(text::decode_utf8("\xff") == std::u32string(1, 0xFFFD));
}
