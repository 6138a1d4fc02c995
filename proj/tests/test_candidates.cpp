#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "surpdec/candidates.hpp"
#include "surpdec/experiment.hpp"
#include "test_util.hpp"

using namespace surpdec;
using testutil::code_of;

namespace {

Stimulus stim(std::string id, std::string cond, std::string context, std::string cont, bool control,
              std::optional<std::string> control_id = std::nullopt) {
  Stimulus s;
  s.experiment_id = "T";
  s.item_id = std::move(id);
  s.condition = std::move(cond);
  s.context = std::move(context);
  s.continuation = cont;
  s.target = std::move(cont);
  s.is_control = control;
  s.control_item_id = std::move(control_id);
  return s;
}

const char* kBookTable = R"({
  "conditional": {
    "I read a": {"book.": -0.5, "look.": -4.0, "hook.": -5.0, "sofa.": -6.0, "novel.": -1.5}
  },
  "topk": {"I read a": [["book.", -0.5], ["novel.", -1.5], [" and", -3.0], ["!!", -3.5]]},
  "embeddings": {
    "book": [1, 0, 0], "look": [0, 1, 0], "hook": [0, 0.9, 0.1], "sofa": [0.9, 0.1, 0],
    "novel": [0.95, 0, 0.05]
  }
})";

Lexicon book_lexicon() {
  return Lexicon::from_tsv_text("# word\trank\nlook\t1\nhook\t2\nsofa\t3\nbook\t4\n");
}

const Candidate* find(const CandidateSet& set, const std::string& text) {
  for (const auto& c : set.candidates) {
    if (c.text == text) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("external ingestion builds corrections plus the veridical input") {
  const auto lm = MockLm::from_json_text(R"({"embeddings": {"w": [1, 0]}})");
  const std::vector<Stimulus> stimuli{stim("i1", "S", "the", "w0.", true)};
  CorrectionsMap corr;
  for (int i = 1; i <= 10; ++i) corr["i1"].push_back("the w" + std::to_string(i) + ".");
  // Embeddings fall back to the mean of word vectors, so give each word one.
  std::string table = R"({"embeddings": {"the": [0, 1])";
  for (int i = 0; i <= 10; ++i) table += ", \"w" + std::to_string(i) + "\": [1, " + std::to_string(i) + "]";
  table += "}}";
  const auto mock = MockLm::from_json_text(table);
  const auto out = ingest_external(corr, stimuli, mock, 2);
  REQUIRE(out.failures.empty());
  REQUIRE(out.sets.size() == 1);
  CHECK(out.sets[0].size() == 11);
  CHECK(out.sets[0].candidates[out.sets[0].veridical_index()].text == "the w0.");
  CHECK(out.sets[0].generator == Generator::External);

  corr["i1"].push_back("the w0.");
  corr["i1"].push_back("the w3");  // punctuation completed, then merged with "the w3."
  const auto dedup = ingest_external(corr, stimuli, mock, 1);
  REQUIRE(dedup.sets.size() == 1);
  CHECK(dedup.sets[0].size() == 11);
  CHECK(std::count_if(dedup.sets[0].candidates.begin(), dedup.sets[0].candidates.end(),
                      [](const Candidate& c) { return c.is_veridical; }) == 1);

  CorrectionsMap unknown{{"nope", {"x"}}};
  CHECK(code_of([&] { ingest_external(unknown, stimuli, lm); }) == ErrorCode::UnknownItemId);
}

TEST_CASE("external ingestion on the bundled fixture matches the edit-distance oracle") {
  const auto ds = load_stimuli(testutil::source_path("data/ryskin21.json"));
  const auto lm = MockLm::from_file(testutil::source_path("data/ryskin21_mock_lm.json"));
  const auto corr = load_corrections(testutil::source_path("data/ryskin21_corrections.json"));
  const auto out = ingest_external(corr, ds.stimuli, lm, 4);
  CHECK(out.failures.empty());
  CHECK(out.sets.size() == ds.stimuli.size());
  const auto it = std::find_if(out.sets.begin(), out.sets.end(), [](const CandidateSet& s) {
    return s.item_id == "r01-recoverable";
  });
  REQUIRE(it != out.sets.end());
  const std::string ctx = "The storyteller could turn any incident into an amusing ";
  const auto* c = find(*it, ctx + "anecdote.");
  REQUIRE(c != nullptr);
  CHECK(c->form_distance == static_cast<double>(oracle::dl_recurrence(ctx + "antidote.", ctx + "anecdote.")));
  CHECK(c->form_distance == 2.0);
  CHECK(it->candidates[it->veridical_index()].text == ctx + "antidote.");
}

TEST_CASE("complete_punctuation appends missing final punctuation") {
  CHECK(complete_punctuation("the cat sat", "the dog sat.") == "the cat sat.");
  CHECK(complete_punctuation("the cat sat!", "the dog sat.") == "the cat sat!");
  CHECK(complete_punctuation("  the cat sat ", "the dog sat?!") == "the cat sat?!");
  CHECK(complete_punctuation("the cat", "no punctuation") == "the cat");
}

TEST_CASE("corrections file parsing") {
  const auto m = parse_corrections(R"({"a": ["x", "y"], "b": []})");
  CHECK(m.at("a").size() == 2);
  CHECK(code_of([] { parse_corrections("[1, 2]"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { parse_corrections(R"({"a": "x"})"); }) == ErrorCode::SchemaError);
}

TEST_CASE("control counterpart pairs experimental and control sentences") {
  const auto lm = MockLm::from_json_text(R"({
    "conditional": {"The hearty meal was": {"devoured.": -2.0, "devouring.": -9.0}},
    "embeddings": {"devoured": [1, 0], "devouring": [0.8, 0.6]}
  })");
  const std::vector<Stimulus> stimuli{
      stim("k1-c", "Control", "The hearty meal was", "devoured.", true),
      stim("k1-x", "Attraction", "The hearty meal was", "devouring.", false, "k1-c"),
  };
  const auto out = control_counterpart(stimuli, lm, 2);
  REQUIRE(out.failures.empty());
  REQUIRE(out.sets.size() == 2);
  const auto& control = out.sets[0];
  const auto& exp = out.sets[1];
  REQUIRE(exp.item_id == "k1-x");
  REQUIRE(exp.size() == 2);
  CHECK(exp.candidates[exp.veridical_index()].text == "The hearty meal was devouring.");
  const auto* counterpart = find(exp, "The hearty meal was devoured.");
  REQUIRE(counterpart != nullptr);
  CHECK(counterpart->prior_logprob == -2.0);
  CHECK(counterpart->form_distance ==
        static_cast<double>(oracle::dl_recurrence(std::string("devouring."), std::string("devoured."))));
  CHECK(counterpart->semantic_distance == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(exp.generator == Generator::ControlCounterpart);

  REQUIRE(control.item_id == "k1-c");
  CHECK(control.candidates[control.veridical_index()].text == "The hearty meal was devoured.");
  CHECK(find(control, "The hearty meal was devouring.") != nullptr);
}

TEST_CASE("control counterpart of a control collects every experimental partner") {
  const auto ds = load_stimuli(testutil::source_path("data/ryskin21.json"));
  const auto lm = MockLm::from_file(testutil::source_path("data/ryskin21_mock_lm.json"));
  const auto out = control_counterpart(ds.stimuli, lm, 3);
  CHECK(out.failures.empty());
  for (const auto& set : out.sets) {
    const bool is_control = set.item_id.find("control") != std::string::npos;
    CHECK(set.size() == (is_control ? 4u : 2u));
  }
}

TEST_CASE("control counterpart failures are reported per item") {
  const auto lm = MockLm::from_json_text(R"({"embeddings": {"a": [1, 0], "b": [0, 1]}})");
  const std::vector<Stimulus> mismatch{
      stim("c", "Control", "one context", "a.", true),
      stim("x", "Exp", "another context", "b.", false, "c"),
  };
  const auto out = control_counterpart(mismatch, lm, 1);
  REQUIRE(out.failures.size() == 2);
  CHECK(out.failures[0].code == ErrorCode::ContextMismatch);
  CHECK(out.failures[1].code == ErrorCode::ContextMismatch);
  CHECK(out.sets.empty());

  const std::vector<Stimulus> lonely{stim("c", "Control", "ctx", "a.", true), stim("x", "Exp", "ctx", "b.", false)};
  const auto out2 = control_counterpart(lonely, lm, 1);
  REQUIRE(out2.failures.size() == 2);
  CHECK(out2.failures[0].code == ErrorCode::UnpairedItem);
  CHECK(out2.failures[1].code == ErrorCode::UnpairedItem);
}

TEST_CASE("lexicon parsing") {
  const auto lex = Lexicon::from_tsv_text("# comment\nThe\t1\ncat\t2\n\n");
  REQUIRE(lex.size() == 2);
  CHECK(lex.entries()[0].word == "the");
  CHECK(code_of([] { Lexicon::from_tsv_text("cat 1\n"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { Lexicon::from_tsv_text("cat\tx\n"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { Lexicon::from_tsv_text("cat\t1\ndog\t1\n"); }) == ErrorCode::SchemaError);
  CHECK(Lexicon::from_tsv(testutil::source_path("data/lexicon_sample.tsv")).size() == 25);
  CHECK(code_of([] { Lexicon::from_tsv("/nonexistent.tsv"); }) == ErrorCode::IoError);
}

TEST_CASE("phonological neighbors rank by edit distance, then frequency, then spelling") {
  const auto lex = book_lexicon();
  CHECK(phonological_neighbors(lex, "book", 1) == std::vector<std::string>{"look"});
  CHECK(phonological_neighbors(lex, "book", 3) == std::vector<std::string>{"look", "hook", "sofa"});
  const auto tie = Lexicon::from_tsv_text("bb\t5\nab\t5000\naa\t7\n");
  CHECK(phonological_neighbors(tie, "ac", 3) == std::vector<std::string>{"aa", "ab", "bb"});
}

TEST_CASE("target substitution keeps everything but the target word") {
  const auto s = stim("i", "S", "I read a", "book.", false);
  CHECK(target_word(s) == "book");
  CHECK(substitute_target(s, "hook") == "I read a hook.");
  auto quoted = stim("q", "S", "He said", "\"hello!\"", false);
  CHECK(target_word(quoted) == "hello");
  CHECK(substitute_target(quoted, "bye") == "He said \"bye!\"");
}

TEST_CASE("multiple sampler pools phonological, semantic and contextual competitors") {
  const auto lm = MockLm::from_json_text(kBookTable);
  const auto lex = book_lexicon();
  const auto index = SemanticIndex::build(lex, lm);
  const auto s = stim("i", "S", "I read a", "book.", false);

  CHECK(index.nearest("book", 1) == std::vector<std::string>{"sofa"});
  CHECK(contextual_words(s, lm, 4) == std::vector<std::string>{"book", "novel", "and"});

  const auto set = multiple_sampler(s, lex, index, lm, {1, 1, 1});
  // look (phonological), sofa (semantic), book (contextual, merged into veridical)
  CHECK(set.size() <= 4);
  CHECK(set.size() == 3);
  CHECK(find(set, "I read a look.") != nullptr);
  CHECK(find(set, "I read a sofa.") != nullptr);
  CHECK(set.candidates[set.veridical_index()].text == "I read a book.");
  CHECK(set.generator == Generator::MultipleSampler);

  const auto big = multiple_sampler(s, lex, index, lm, {2, 2, 2});
  CHECK(big.size() <= 7);
  for (const auto& c : big.candidates) {
    CHECK(c.text.rfind("I read a ", 0) == 0);
    CHECK(c.text.back() == '.');
  }
  CHECK(code_of([&] { multiple_sampler(s, lex, index, lm, {0, 1, 1}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("multiple sampler output is always a valid, bounded set") {
  const auto ds = load_stimuli(testutil::source_path("data/ryskin21.json"));
  const auto lm = MockLm::from_file(testutil::source_path("data/ryskin21_mock_lm.json"));
  const auto lex = Lexicon::from_tsv(testutil::source_path("data/lexicon_sample.tsv"));
  const auto index = SemanticIndex::build(lex, lm);
  for (std::size_t n : {1u, 3u, 10u}) {
    const SamplerConfig cfg{n, n, n};
    const auto out = multiple_sampler_all(ds.stimuli, lex, index, lm, cfg, 4);
    CHECK(out.failures.empty());
    for (const auto& set : out.sets) {
      CHECK(set.size() <= 3 * n + 1);
      CHECK_NOTHROW(validate_candidate_set(set));
      const auto& v = set.candidates[set.veridical_index()].text;
      const auto prefix = v.substr(0, v.rfind(' ') + 1);
      for (const auto& c : set.candidates) CHECK(c.text.rfind(prefix, 0) == 0);
    }
  }
}
