#include <doctest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "surpdec/json_io.hpp"
#include "surpdec/report.hpp"
#include "surpdec/types.hpp"
#include "test_util.hpp"

using namespace surpdec;
using nlohmann::json;
using testutil::code_of;

TEST_CASE("stimulus sentence and target context") {
  Stimulus s;
  s.item_id = "a";
  s.context = "The cat";
  s.continuation = "sat on the mat.";
  s.target = "mat.";
  s.is_control = true;
  CHECK(s.sentence() == "The cat sat on the mat.");
  CHECK(s.target_context() == "The cat sat on the");
  CHECK_NOTHROW(validate_stimulus(s));
  s.context.clear();
  CHECK(s.sentence() == "sat on the mat.");
  s.target = "dog.";
  CHECK(code_of([&] { validate_stimulus(s); }) == ErrorCode::SchemaError);
  s.target = "mat.";
  s.control_item_id = "x";
  CHECK(code_of([&] { validate_stimulus(s); }) == ErrorCode::SchemaError);
}

TEST_CASE("candidate set validation") {
  CandidateSet s;
  s.item_id = "i";
  s.candidates = {{"x", -1.0, 0, 0.3, false}, {"w", -2.0, 1, 0.5, false}, {"w", -0.5, 1, 0.5, false}};
  const auto v = validate_candidate_set(s);
  REQUIRE(v.size() == 2);
  CHECK(v.veridical_index() == 0);
  CHECK(v.candidates[0].semantic_distance == 0.0);
  CHECK(v.candidates[1].prior_logprob == -0.5);

  CandidateSet missing;
  missing.candidates = {{"w", -1.0, 1, 0, false}, {"u", -1.0, 2, 0, false}};
  CHECK(code_of([&] { validate_candidate_set(missing); }) == ErrorCode::MissingVeridical);
  CandidateSet single;
  single.candidates = {{"x", -1.0, 0, 0, true}};
  CHECK(code_of([&] { validate_candidate_set(single); }) == ErrorCode::EmptySet);
  CandidateSet two_zero;
  two_zero.candidates = {{"x", -1.0, 0, 0, true}, {"y", -1.0, 0, 0, false}};
  CHECK(code_of([&] { validate_candidate_set(two_zero); }) == ErrorCode::SchemaError);
  CandidateSet bad_sem;
  bad_sem.candidates = {{"x", -1.0, 0, 0, true}, {"y", -1.0, 1, 2.5, false}};
  CHECK(code_of([&] { validate_candidate_set(bad_sem); }) == ErrorCode::SchemaError);
  CandidateSet nan_prior;
  nan_prior.candidates = {{"x", std::nan(""), 0, 0, true}, {"y", -1.0, 1, 0, false}};
  CHECK(code_of([&] { validate_candidate_set(nan_prior); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { CandidateSet{}.veridical_index(); }) == ErrorCode::MissingVeridical);
}

TEST_CASE("parameter validation and ERP prediction") {
  CHECK_NOTHROW(validate_params({0.0, 0.0}));
  CHECK(code_of([] { validate_params({-1.0, 8.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { validate_params({1.0, std::numeric_limits<double>::infinity()}); }) ==
        ErrorCode::InvalidArgument);
  DecompositionResult r;
  r.shallow = 1.5;
  r.deep = 0.5;
  const auto e = predict_erp(r, 2.0, 4.0);
  CHECK(e.n400 == 3.0);
  CHECK(e.p600 == 2.0);
  CHECK(code_of([&] { predict_erp(r, 0.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("generator names round-trip") {
  for (auto g : {Generator::External, Generator::ControlCounterpart, Generator::MultipleSampler}) {
    CHECK(parse_generator(generator_name(g)) == g);
  }
  CHECK(code_of([] { parse_generator("gpt"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("json round-trips") {
  Stimulus s;
  s.experiment_id = "E";
  s.item_id = "i";
  s.condition = "C";
  s.context = "ctx";
  s.continuation = "w.";
  s.target = "w.";
  s.control_item_id = "c";
  const auto s2 = json(s).get<Stimulus>();
  CHECK(s2.item_id == s.item_id);
  CHECK(s2.control_item_id == s.control_item_id);
  CHECK(s2.sentence() == s.sentence());

  CandidateSet set;
  set.item_id = "i";
  set.generator = Generator::MultipleSampler;
  set.candidates = {{"ctx w.", -0.25, 0, 0, true},
                    {"ctx v.", -std::numeric_limits<double>::infinity(), 1, 0.125, false},
                    {"ctx \"q\".", -3.0, 4, 1.5, false}};
  const auto text = candidate_sets_to_json({set});
  CHECK(json::parse(text)["candidate_sets"][0]["candidates"][1]["prior_logprob"].is_null());
  const auto back = candidate_sets_from_json(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].generator == Generator::MultipleSampler);
  REQUIRE(back[0].size() == 3);
  CHECK(std::isinf(back[0].candidates[1].prior_logprob));
  CHECK(back[0].candidates[2].text == "ctx \"q\".");
  CHECK(candidate_sets_to_json(back) == text);

  DecompositionResult r;
  r.item_id = "i";
  r.condition = "C";
  r.shallow = 0.1;
  r.deep = 0.2;
  r.veridical = 0.30000000000000004;
  r.lm_surprisal = 7;
  r.params = {1.5, 8};
  const auto r2 = json(r).get<DecompositionResult>();
  CHECK(r2.veridical == r.veridical);
  CHECK(r2.params.lambda == 1.5);

  PolicyDistribution d{{-0.5, -std::numeric_limits<double>::infinity()}, 0.25, 2.0};
  const auto d2 = json(d).get<PolicyDistribution>();
  CHECK(d2.log_probs[0] == -0.5);
  CHECK(std::isinf(d2.log_probs[1]));
  const FrontierPoint p{1.0, 2.0, 3.0};
  const auto p2 = json(p).get<FrontierPoint>();
  CHECK(p2.expected_distortion == 2.0);
}

TEST_CASE("candidate file errors") {
  CHECK(code_of([] { candidate_sets_from_json("{"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { candidate_sets_from_json(R"({"schema_version": 2, "candidate_sets": []})"); }) ==
        ErrorCode::SchemaError);
  CHECK(code_of([] {
          candidate_sets_from_json(R"({"candidate_sets": [{"item_id": "i", "generator": "llm", "candidates": []}]})");
        }) == ErrorCode::SchemaError);
  CHECK(code_of([] {
          candidate_sets_from_json(R"({"candidate_sets": [{"item_id": "i", "candidates": [
            {"text": "a", "prior_logprob": -1, "form_distance": 1, "semantic_distance": 0}]}]})");
        }) == ErrorCode::MissingVeridical);
  CHECK(code_of([] { read_text_file("/nonexistent/file"); }) == ErrorCode::IoError);
  CHECK(code_of([] { write_text_file("/nonexistent/dir/file", "x"); }) == ErrorCode::IoError);
}

TEST_CASE("report formatting is fixed-precision") {
  CHECK(format_number(1.0) == "1.0000000000");
  CHECK(format_number(-0.0) == "0.0000000000");
  CHECK(format_number(-1e-12) == "-0.0000000000");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");

  std::vector<DecompositionResult> rs(1);
  rs[0].item_id = "i,1";
  rs[0].condition = "C";
  rs[0].params = {1, 8};
  CHECK(items_csv(rs) ==
        "item_id,condition,A,B,veridical,lm_surprisal,lambda,gamma\n"
        "\"i,1\",C,0.0000000000,0.0000000000,0.0000000000,0.0000000000,1.0000000000,8.0000000000\n");
  const std::vector<FrontierPoint> pts{{0, 1, 0}, {0.5, 0.25, 1}};
  CHECK(frontier_csv(pts) == "lambda,depth,expected_distortion\n0.0000000000,0.0000000000,1.0000000000\n"
                             "1.0000000000,0.5000000000,0.2500000000\n");
  const auto svg = frontier_svg(pts, "t<1>");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
  CHECK(svg.find("processing depth") != std::string::npos);
}
