#include "surpdec/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "surpdec/error.hpp"

namespace surpdec {

using nlohmann::json;

namespace {

// JSON has no infinities; zero-probability priors travel as null.
json log_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_log_value(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

void to_json(json& j, const Stimulus& s) {
  j = json{{"experiment_id", s.experiment_id}, {"item_id", s.item_id},       {"condition", s.condition},
           {"context", s.context},             {"continuation", s.continuation}, {"target", s.target},
           {"is_control", s.is_control}};
  if (s.control_item_id) j["control_item_id"] = *s.control_item_id;
}

void from_json(const json& j, Stimulus& s) {
  s.experiment_id = j.value("experiment_id", std::string());
  s.item_id = j.at("item_id").get<std::string>();
  s.condition = j.at("condition").get<std::string>();
  s.context = j.at("context").get<std::string>();
  s.continuation = j.at("continuation").get<std::string>();
  s.target = j.at("target").get<std::string>();
  s.is_control = j.value("is_control", false);
  s.control_item_id.reset();
  if (j.contains("control_item_id") && !j["control_item_id"].is_null()) {
    s.control_item_id = j["control_item_id"].get<std::string>();
  }
}

void to_json(json& j, const Candidate& c) {
  j = json{{"text", c.text},
           {"prior_logprob", log_value(c.prior_logprob)},
           {"form_distance", c.form_distance},
           {"semantic_distance", c.semantic_distance},
           {"is_veridical", c.is_veridical}};
}

void from_json(const json& j, Candidate& c) {
  c.text = j.at("text").get<std::string>();
  c.prior_logprob = read_log_value(j.at("prior_logprob"));
  c.form_distance = j.at("form_distance").get<double>();
  c.semantic_distance = j.at("semantic_distance").get<double>();
  c.is_veridical = j.value("is_veridical", false);
}

void to_json(json& j, const CandidateSet& s) {
  j = json{{"item_id", s.item_id}, {"generator", generator_name(s.generator)}, {"candidates", s.candidates}};
}

void from_json(const json& j, CandidateSet& s) {
  s.item_id = j.at("item_id").get<std::string>();
  s.generator = parse_generator(j.value("generator", std::string("external")));
  s.candidates = j.at("candidates").get<std::vector<Candidate>>();
}

void to_json(json& j, const DecompositionResult& r) {
  j = json{{"item_id", r.item_id},     {"condition", r.condition},       {"shallow", r.shallow},
           {"deep", r.deep},           {"veridical", r.veridical},       {"lm_surprisal", r.lm_surprisal},
           {"lambda", r.params.lambda}, {"gamma", r.params.gamma}};
}

void from_json(const json& j, DecompositionResult& r) {
  r.item_id = j.at("item_id").get<std::string>();
  r.condition = j.value("condition", std::string());
  r.shallow = j.at("shallow").get<double>();
  r.deep = j.at("deep").get<double>();
  r.veridical = j.at("veridical").get<double>();
  r.lm_surprisal = j.at("lm_surprisal").get<double>();
  r.params.lambda = j.at("lambda").get<double>();
  r.params.gamma = j.at("gamma").get<double>();
}

void to_json(json& j, const PolicyDistribution& d) {
  json lps = json::array();
  for (double v : d.log_probs) lps.push_back(log_value(v));
  j = json{{"log_probs", lps}, {"log_z", d.log_z}, {"lambda", d.lambda}};
}

void from_json(const json& j, PolicyDistribution& d) {
  d.log_probs.clear();
  for (const auto& v : j.at("log_probs")) d.log_probs.push_back(read_log_value(v));
  d.log_z = j.at("log_z").get<double>();
  d.lambda = j.at("lambda").get<double>();
}

void to_json(json& j, const FrontierPoint& p) {
  j = json{{"depth", p.depth}, {"expected_distortion", p.expected_distortion}, {"lambda", p.lambda}};
}

void from_json(const json& j, FrontierPoint& p) {
  p.depth = j.at("depth").get<double>();
  p.expected_distortion = j.at("expected_distortion").get<double>();
  p.lambda = j.at("lambda").get<double>();
}

std::string candidate_sets_to_json(const std::vector<CandidateSet>& sets) {
  json j = {{"schema_version", kCandidateSchemaVersion}, {"candidate_sets", sets}};
  return j.dump(2) + "\n";
}

std::vector<CandidateSet> candidate_sets_from_json(std::string_view text) {
  std::vector<CandidateSet> sets;
  try {
    const auto j = json::parse(text);
    if (j.value("schema_version", kCandidateSchemaVersion) != kCandidateSchemaVersion) {
      throw Error(ErrorCode::SchemaError, "unsupported candidate schema_version");
    }
    sets = j.at("candidate_sets").get<std::vector<CandidateSet>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed candidate file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    throw Error(ErrorCode::SchemaError, std::string("malformed candidate file: ") + e.what());
  }
  for (auto& s : sets) s = validate_candidate_set(std::move(s));
  return sets;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace surpdec
