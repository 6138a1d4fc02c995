#include <doctest.h>

#include <map>
#include <random>
#include <string>

#include "oracles.hpp"
#include "surpdec/distortion.hpp"
#include "surpdec/error.hpp"

using namespace surpdec;

namespace {

struct TableEmbedder : Embedder {
  std::map<std::string, std::vector<double>> table;
  std::vector<double> embed(std::string_view text) const override {
    auto it = table.find(std::string(text));
    if (it == table.end()) throw Error(ErrorCode::MissingEntry, std::string(text));
    return it->second;
  }
};

std::string random_string(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len, const std::string& alpha) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> ch(0, alpha.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alpha[ch(rng)];
  return s;
}

}  // namespace

TEST_CASE("char_dl_distance examples") {
  CHECK(char_dl_distance("book", "book") == 0);
  CHECK(char_dl_distance("hook", "book") == 1);
  CHECK(oracle::dl_recurrence(std::string("antidote"), std::string("anecdote")) == 2);
  CHECK(char_dl_distance("antidote", "anecdote") == 2);
  CHECK(char_dl_distance("", "abc") == 3);
  CHECK(char_dl_distance("ab", "ba") == 1);
  CHECK(char_dl_distance("ca", "abc") == 2);  // unrestricted: transpose then insert
  CHECK(char_dl_distance("anecdote.", "anecdotes.") == 1);
}

TEST_CASE("char_dl_distance compares code points, not bytes") {
  CHECK(char_dl_distance("café", "cafe") == 1);
  CHECK(char_dl_distance("naïve", "naive") == 1);
  CHECK(char_dl_distance("ü", "ö") == 1);
  CHECK(char_dl_distance("ab€", "a€b") == 1);
}

TEST_CASE("char_dl_distance agrees with breadth-first edit search on short strings") {
  oracle::EditGraph graph("abc", 5);
  const auto& all = graph.strings();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    const auto& a = all[pick(rng)];
    const auto dist = graph.distances_from(graph.id(a));
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (all[j].size() > 4) continue;
      REQUIRE(char_dl_distance(a, all[j]) == static_cast<std::size_t>(dist[j]));
    }
  }
}

TEST_CASE("char_dl_distance agrees with the defining recurrence on random pairs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_string(rng, 0, 10, "abcd");
    const auto b = random_string(rng, 0, 10, "abcd");
    REQUIRE(char_dl_distance(a, b) == oracle::dl_recurrence(a, b));
  }
}

TEST_CASE("char_dl_distance is a metric on random strings up to 12 characters") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_string(rng, 0, 12, "abc");
    const auto b = random_string(rng, 0, 12, "abc");
    const auto c = random_string(rng, 0, 12, "abc");
    const auto ab = char_dl_distance(a, b);
    REQUIRE(ab == char_dl_distance(b, a));
    REQUIRE((ab == 0) == (a == b));
    REQUIRE(char_dl_distance(a, c) <= ab + char_dl_distance(b, c));
  }
}

TEST_CASE("form_distance examples") {
  CHECK(form_distance("the cat sat", "the cat sat") == 0.0);
  CHECK(form_distance("which customer the waitress had", "which waitress the customer had") == 2.0);
  CHECK(form_distance("the victims reported robbery to the police.", "the victims reported robbery to the markets.") ==
        static_cast<double>(oracle::dl_recurrence(std::string("police."), std::string("markets."))));
  CHECK(form_distance("a b", "b a") == 1.0);
  // A swap beyond the memory span is not available; plain edits are used instead.
  const std::string w = "x one two three four five six seven y";
  const std::string x = "y one two three four five six seven x";
  CHECK(form_distance(w, x) == static_cast<double>(char_dl_distance(w, x)));
}

TEST_CASE("form_distance never exceeds plain character distance and allows two swaps") {
  CHECK(form_distance("a b c d", "b a d c") == 2.0);
  // Three separate adjacent swaps: only two can be word moves, the third costs char edits.
  const double three = form_distance("aa bb cc dd ee ff", "bb aa dd cc ff ee");
  CHECK(three == 2.0 + static_cast<double>(char_dl_distance("ee ff", "ff ee")));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_string(rng, 1, 14, "ab ");
    const auto b = random_string(rng, 1, 14, "ab ");
    REQUIRE(form_distance(a, b) <= static_cast<double>(char_dl_distance(a, b)));
  }
}

TEST_CASE("form_distance is symmetric on single-swap pairs") {
  std::mt19937_64 rng(23);
  const std::vector<std::string> vocab = {"the", "cat", "dog", "chased", "a", "mouse", "quickly", "ran"};
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<std::size_t> len(2, 9);
    std::vector<std::string> ws(len(rng));
    for (auto& s : ws) s = vocab[word(rng)];
    std::uniform_int_distribution<std::size_t> pos(0, ws.size() - 1);
    std::size_t i = pos(rng), j = pos(rng);
    if (i == j) continue;
    auto swapped = ws;
    std::swap(swapped[i], swapped[j]);
    const auto a = join_words(ws), b = join_words(swapped);
    REQUIRE(form_distance(a, b) == form_distance(b, a));
    if (ws[i] != ws[j] && (i > j ? i - j : j - i) <= kMemorySpan) {
      REQUIRE(form_distance(a, b) <= static_cast<double>(i > j ? i - j : j - i));
    }
  }
}

TEST_CASE("semantic_distance examples") {
  TableEmbedder e;
  e.table = {{"u", {1, 0}}, {"v", {0, 1}}, {"n", {-1, 0}}, {"z", {0, 0}},
             {"the u", {1, 1}}, {"the v", {1, 1}}, {"x", {0.6, 0.8}}};
  CHECK(semantic_distance("the u", "the u", e) == 0.0);
  CHECK(semantic_distance("the u", "the v", e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(semantic_distance("u", "n", e) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(semantic_distance("u", "x", e) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_THROWS_AS(semantic_distance("u", "z", e), Error);
  try {
    semantic_distance("u", "z", e);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ZeroNormEmbedding);
  }
}

TEST_CASE("align_for_semantics picks the single differing word, else whole sentences") {
  CHECK(align_for_semantics("the cat sat", "the dog sat") == std::pair<std::string, std::string>{"cat", "dog"});
  CHECK(align_for_semantics("the cat sat", "a dog sat") ==
        std::pair<std::string, std::string>{"the cat sat", "a dog sat"});
  CHECK(align_for_semantics("the cat", "the cat sat") == std::pair<std::string, std::string>{"the cat", "the cat sat"});
}

TEST_CASE("total_distortion arithmetic and monotonicity in gamma") {
  TableEmbedder e;
  // cos = 0.75 gives semantic distance 0.25
  e.table = {{"hook", {0.75, std::sqrt(1 - 0.75 * 0.75)}}, {"book", {1, 0}}, {"took", {1, 0}}};
  CHECK(total_distortion("a hook", "a book", 8.0, e) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(total_distortion("a book", "a book", 8.0, e) == 0.0);
  CHECK(total_distortion("a took", "a book", 8.0, e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total_distortion("x", "x", 3.0, e) == 0.0);
  double prev = -1;
  for (double g = 0; g <= 10; g += 0.5) {
    const double d = total_distortion("a hook", "a book", g, e);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("utf8 decoding rejects malformed input") {
  CHECK(decode_utf8("h\xc3\xa9").size() == 2);
  CHECK_THROWS_AS(decode_utf8("\xc3"), Error);
  CHECK_THROWS_AS(decode_utf8("\xff"), Error);
}
