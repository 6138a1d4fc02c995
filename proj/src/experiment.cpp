#include "surpdec/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "surpdec/error.hpp"
#include "surpdec/json_io.hpp"
#include "surpdec/parallel.hpp"
#include "surpdec/policy.hpp"

namespace surpdec {

using nlohmann::json;

Dataset parse_stimuli(std::string_view json_text) {
  if (std::all_of(json_text.begin(), json_text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    throw Error(ErrorCode::SchemaError, "stimulus file is empty");
  }
  Dataset ds;
  try {
    const auto j = json::parse(json_text);
    const json* items = &j;
    if (j.is_object()) {
      items = &j.at("stimuli");
      ds.name = j.value("name", std::string());
      if (j.contains("expected_pattern")) ds.expected_pattern = j["expected_pattern"].get<std::vector<std::string>>();
      if (j.contains("lambda") && !j["lambda"].is_null()) ds.lambda = j["lambda"].get<double>();
      if (j.contains("gamma") && !j["gamma"].is_null()) ds.gamma = j["gamma"].get<double>();
    }
    if (!items->is_array()) throw Error(ErrorCode::SchemaError, "stimuli must be a JSON array");
    ds.stimuli = items->get<std::vector<Stimulus>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed stimulus file: ") + e.what());
  }
  if (ds.stimuli.empty()) throw Error(ErrorCode::SchemaError, "stimulus file contains no items");

  std::unordered_map<std::string, const Stimulus*> by_id;
  for (const auto& s : ds.stimuli) {
    validate_stimulus(s);
    if (!by_id.emplace(s.item_id, &s).second) {
      throw Error(ErrorCode::SchemaError, "duplicate item_id '" + s.item_id + "'");
    }
  }
  for (const auto& s : ds.stimuli) {
    if (!s.control_item_id) continue;
    auto it = by_id.find(*s.control_item_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::DanglingControlRef,
                  "item '" + s.item_id + "' references missing control '" + *s.control_item_id + "'");
    }
    if (!it->second->is_control) {
      throw Error(ErrorCode::SchemaError, "item '" + s.item_id + "' references non-control item '" +
                                              *s.control_item_id + "' as its control");
    }
  }
  for (const auto& p : ds.expected_pattern) PatternConstraint::parse(p);
  if (ds.name.empty()) ds.name = ds.stimuli.front().experiment_id;
  return ds;
}

Dataset load_stimuli(const std::string& path) { return parse_stimuli(read_text_file(path)); }

GenerationOutcome generate_candidates(std::span<const Stimulus> stimuli, const GeneratorConfig& config,
                                      const LanguageModel& lm, std::size_t jobs) {
  switch (config.kind) {
    case Generator::External: {
      if (!config.corrections_path) {
        throw Error(ErrorCode::InvalidArgument, "the external generator needs a corrections file");
      }
      return ingest_external(load_corrections(*config.corrections_path), stimuli, lm, jobs);
    }
    case Generator::ControlCounterpart:
      return control_counterpart(stimuli, lm, jobs);
    case Generator::MultipleSampler: {
      if (!config.lexicon_path) throw Error(ErrorCode::InvalidArgument, "the sampler generator needs a lexicon");
      const auto lexicon = Lexicon::from_tsv(*config.lexicon_path);
      std::optional<WordVectors> vectors;
      if (config.word_vectors_path) vectors = WordVectors::from_file(*config.word_vectors_path);
      const auto index = SemanticIndex::build(lexicon, lm, vectors ? &*vectors : nullptr);
      return multiple_sampler_all(stimuli, lexicon, index, lm, config.sampler, jobs);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown generator");
}

namespace {

ItemFailure failure_from(const std::string& item, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {item, err->code(), err->what()};
  return {item, ErrorCode::Internal, e.what()};
}

void sort_failures(std::vector<ItemFailure>& failures) {
  std::sort(failures.begin(), failures.end(),
            [](const ItemFailure& a, const ItemFailure& b) { return a.item_id < b.item_id; });
}

}  // namespace

PreparedExperiment prepare(std::span<const Stimulus> stimuli, std::span<const CandidateSet> sets,
                           const LanguageModel& lm, std::size_t jobs) {
  std::unordered_map<std::string, const Stimulus*> by_id;
  for (const auto& s : stimuli) by_id.emplace(s.item_id, &s);
  std::vector<std::optional<PreparedItem>> items(sets.size());
  std::vector<std::optional<ItemFailure>> failures(sets.size());
  parallel_for(sets.size(), jobs, [&](std::size_t i) {
    try {
      auto it = by_id.find(sets[i].item_id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::UnknownItemId, "candidate set for unknown item '" + sets[i].item_id + "'");
      }
      const Stimulus& s = *it->second;
      items[i] = PreparedItem{s, sets[i], -lm.logprob(s.target_context(), s.target)};
    } catch (const std::exception& e) {
      failures[i] = failure_from(sets[i].item_id, e);
    }
  });
  PreparedExperiment out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (items[i]) out.items.push_back(std::move(*items[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  std::sort(out.items.begin(), out.items.end(),
            [](const PreparedItem& a, const PreparedItem& b) { return a.stimulus.item_id < b.stimulus.item_id; });
  sort_failures(out.failures);
  return out;
}

namespace {

std::vector<Stimulus> stimuli_of(const PreparedExperiment& prepared) {
  std::vector<Stimulus> out;
  out.reserve(prepared.items.size());
  for (const auto& item : prepared.items) out.push_back(item.stimulus);
  return out;
}

// Single-threaded core shared by decompose_prepared and the grid search cells.
void decompose_items(const PreparedExperiment& prepared, const PolicyParams& params,
                     std::vector<std::optional<DecompositionResult>>& results,
                     std::vector<std::optional<ItemFailure>>& failures, std::size_t i) {
  const auto& item = prepared.items[i];
  try {
    auto r = decompose(item.set, params, item.lm_surprisal);
    r.condition = item.stimulus.condition;
    results[i] = std::move(r);
  } catch (const std::exception& e) {
    failures[i] = failure_from(item.stimulus.item_id, e);
  }
}

}  // namespace

ExperimentRun decompose_prepared(const PreparedExperiment& prepared, const PolicyParams& params, double alpha,
                                 double beta, std::size_t jobs) {
  validate_params(params);
  const std::size_t n = prepared.items.size();
  std::vector<std::optional<DecompositionResult>> results(n);
  std::vector<std::optional<ItemFailure>> failures(n);
  parallel_for(n, jobs, [&](std::size_t i) { decompose_items(prepared, params, results, failures, i); });

  ExperimentRun run;
  run.failures = prepared.failures;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) run.results.push_back(std::move(*results[i]));
    if (failures[i]) run.failures.push_back(std::move(*failures[i]));
  }
  sort_failures(run.failures);
  const auto stimuli = stimuli_of(prepared);
  run.summaries = summarize(run.results, stimuli, alpha, beta);
  return run;
}

ExperimentRun run_experiment(const ExperimentSpec& spec, const LanguageModel& lm, std::size_t jobs) {
  auto generated = generate_candidates(spec.stimuli, spec.generator, lm, jobs);
  auto prepared = prepare(spec.stimuli, generated.sets, lm, jobs);
  prepared.failures.insert(prepared.failures.end(), generated.failures.begin(), generated.failures.end());
  sort_failures(prepared.failures);
  return decompose_prepared(prepared, spec.params, spec.alpha, spec.beta, jobs);
}

std::vector<ConditionSummary> summarize(std::span<const DecompositionResult> results,
                                        std::span<const Stimulus> stimuli, double alpha, double beta) {
  std::unordered_map<std::string, const Stimulus*> by_id;
  for (const auto& s : stimuli) by_id.emplace(s.item_id, &s);

  std::vector<const DecompositionResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const DecompositionResult* a, const DecompositionResult* b) { return a->item_id < b->item_id; });

  struct Acc {
    ConditionSummary summary;
    std::string control_from;  // item id that determined control_condition
  };
  std::map<std::string, Acc> acc;
  for (const auto* r : ordered) {
    auto it = by_id.find(r->item_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownItemId, "result for unknown item '" + r->item_id + "'");
    const Stimulus& s = *it->second;
    auto& a = acc[s.condition];
    a.summary.condition = s.condition;
    a.summary.is_control = s.is_control;
    if (!s.is_control && a.control_from.empty() && s.control_item_id) {
      a.control_from = s.item_id;
      a.summary.control_condition = by_id.at(*s.control_item_id)->condition;
    }
    a.summary.mean_shallow += r->shallow;
    a.summary.mean_deep += r->deep;
    a.summary.mean_veridical += r->veridical;
    a.summary.mean_lm_surprisal += r->lm_surprisal;
    ++a.summary.n_items;
  }
  std::vector<ConditionSummary> out;
  for (auto& [name, a] : acc) {
    auto& s = a.summary;
    const auto n = static_cast<double>(s.n_items);
    s.mean_shallow /= n;
    s.mean_deep /= n;
    s.mean_veridical /= n;
    s.mean_lm_surprisal /= n;
    out.push_back(s);
  }
  for (auto& s : out) {
    if (s.is_control) continue;
    auto ctrl = std::find_if(out.begin(), out.end(),
                             [&](const ConditionSummary& c) { return c.condition == s.control_condition; });
    if (ctrl == out.end()) {
      s.effect_n400 = s.effect_p600 = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    s.effect_n400 = alpha * (s.mean_shallow - ctrl->mean_shallow);
    s.effect_p600 = beta * (s.mean_deep - ctrl->mean_deep);
  }
  std::stable_sort(out.begin(), out.end(), [](const ConditionSummary& a, const ConditionSummary& b) {
    if (a.is_control != b.is_control) return !a.is_control;
    return a.condition < b.condition;
  });
  return out;
}

// Grammar:
//   constraint := expr op expr          op in > < >= <=
//   expr       := term (('+' | '-') term)*
//   term       := number | METRIC '[' condition ']' | '|' expr '|'
namespace {

class PatternParser {
 public:
  PatternParser(std::string_view text, std::vector<PatternConstraint::Node>& nodes) : text_(text), nodes_(nodes) {}

  int expr() {
    int lhs = term();
    for (;;) {
      skip();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        const bool add = text_[pos_++] == '+';
        const int rhs = term();
        PatternConstraint::Node n;
        n.kind = add ? PatternConstraint::Node::Kind::Add : PatternConstraint::Node::Kind::Sub;
        n.a = lhs;
        n.b = rhs;
        lhs = push(n);
      } else {
        return lhs;
      }
    }
  }

  std::string op() {
    skip();
    for (const char* candidate : {">=", "<=", ">", "<"}) {
      const std::string_view c(candidate);
      if (text_.substr(pos_, c.size()) == c) {
        pos_ += c.size();
        return std::string(c);
      }
    }
    fail("expected a comparison operator");
  }

  void end() {
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::InvalidArgument,
                "bad pattern constraint '" + std::string(text_) + "': " + why + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  int push(const PatternConstraint::Node& n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size() - 1);
  }

  int term() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_];
    if (c == '|') {
      ++pos_;
      const int inner = expr();
      skip();
      if (pos_ >= text_.size() || text_[pos_] != '|') fail("unclosed '|'");
      ++pos_;
      PatternConstraint::Node n;
      n.kind = PatternConstraint::Node::Kind::Abs;
      n.a = inner;
      return push(n);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      PatternConstraint::Node n;
      try {
        n.value = std::stod(std::string(text_.substr(pos_)), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return push(n);
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string metric(text_.substr(start, pos_ - start));
    static const std::unordered_set<std::string> kMetrics{"A", "B", "V", "S", "N400", "P600"};
    if (!kMetrics.count(metric)) fail("unknown metric '" + metric + "'");
    if (pos_ >= text_.size() || text_[pos_] != '[') fail("expected '['");
    const auto close = text_.find(']', pos_);
    if (close == std::string_view::npos) fail("unclosed '['");
    PatternConstraint::Node n;
    n.kind = PatternConstraint::Node::Kind::Metric;
    n.metric = metric;
    n.condition = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
    pos_ = close + 1;
    return push(n);
  }

  std::string_view text_;
  std::vector<PatternConstraint::Node>& nodes_;
  std::size_t pos_ = 0;
};

double metric_of(const ConditionSummary& s, const std::string& metric) {
  if (metric == "A") return s.mean_shallow;
  if (metric == "B") return s.mean_deep;
  if (metric == "V") return s.mean_veridical;
  if (metric == "S") return s.mean_lm_surprisal;
  if (metric == "N400") return s.effect_n400;
  return s.effect_p600;
}

double evaluate(const std::vector<PatternConstraint::Node>& nodes, int at, std::span<const ConditionSummary> summaries) {
  const auto& n = nodes[static_cast<std::size_t>(at)];
  using Kind = PatternConstraint::Node::Kind;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Abs: return std::abs(evaluate(nodes, n.a, summaries));
    case Kind::Add: return evaluate(nodes, n.a, summaries) + evaluate(nodes, n.b, summaries);
    case Kind::Sub: return evaluate(nodes, n.a, summaries) - evaluate(nodes, n.b, summaries);
    case Kind::Metric: {
      for (const auto& s : summaries) {
        if (s.condition == n.condition) return metric_of(s, n.metric);
      }
      throw Error(ErrorCode::InvalidArgument, "pattern refers to unknown condition '" + n.condition + "'");
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

PatternConstraint PatternConstraint::parse(std::string_view text) {
  PatternConstraint c;
  c.text_ = std::string(text);
  PatternParser parser(c.text_, c.nodes_);
  c.lhs_ = parser.expr();
  c.op_ = parser.op();
  c.rhs_ = parser.expr();
  parser.end();
  return c;
}

bool PatternConstraint::holds(std::span<const ConditionSummary> summaries) const {
  const double l = evaluate(nodes_, lhs_, summaries);
  const double r = evaluate(nodes_, rhs_, summaries);
  if (op_ == ">") return l > r;
  if (op_ == "<") return l < r;
  if (op_ == ">=") return l >= r;
  return l <= r;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid{0.0};
  for (int i = 1; i <= 20; ++i) grid.push_back(i / 10.0);
  grid.push_back(10.0);
  return grid;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i));
  return grid;
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [&](std::string_view part) {
    std::string s(part);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "bad grid value '" + s + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<double> grid;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "grid must be start:stop:step");
    const double start = number(text.substr(0, c1));
    const double stop = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (stop < start || step <= 0.0) {
      throw Error(ErrorCode::InvalidArgument, "grid needs start <= stop and a positive step");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    if (count > 1000000) throw Error(ErrorCode::InvalidArgument, "grid is too large");
    for (std::size_t i = 0; i <= count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      grid.push_back(number(part));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return grid;
}

std::vector<GridRow> grid_search(const PreparedExperiment& prepared, std::span<const std::string> pattern,
                                 std::span<const double> lambda_grid, std::span<const double> gamma_grid,
                                 std::size_t jobs) {
  if (lambda_grid.empty() || gamma_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty parameter grid");
  std::vector<PatternConstraint> constraints;
  for (const auto& p : pattern) constraints.push_back(PatternConstraint::parse(p));
  const auto stimuli = stimuli_of(prepared);

  std::vector<GridRow> rows(lambda_grid.size() * gamma_grid.size());
  std::vector<std::optional<Error>> errors(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t cell) {
    GridRow& row = rows[cell];
    row.lambda = lambda_grid[cell / gamma_grid.size()];
    row.gamma = gamma_grid[cell % gamma_grid.size()];
    row.n_constraints = constraints.size();
    try {
      const PolicyParams params{row.lambda, row.gamma};
      validate_params(params);
      const std::size_t n = prepared.items.size();
      std::vector<std::optional<DecompositionResult>> results(n);
      std::vector<std::optional<ItemFailure>> failures(n);
      for (std::size_t i = 0; i < n; ++i) decompose_items(prepared, params, results, failures, i);
      std::vector<DecompositionResult> ok;
      for (auto& r : results) {
        if (r) ok.push_back(std::move(*r));
      }
      row.summaries = summarize(ok, stimuli);
      for (const auto& c : constraints) row.score += c.holds(row.summaries) ? 1 : 0;
    } catch (const Error& e) {
      errors[cell] = e;
    }
  });
  for (const auto& e : errors) {
    if (e) throw *e;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.gamma < b.gamma;
  });
  return rows;
}

std::vector<LambdaPreset> lambda_presets(Generator generator) {
  switch (generator) {
    case Generator::External:
      return {{"AD-98", 2.0},         {"Kim-05", 0.8},   {"Ito-16", 1.5},
              {"Brothers-20S", 1.5},  {"Brothers-20L", 0.8}, {"Brothers-20G", 0.8},
              {"Chow-16R", 0.8},      {"Chow-16S", 0.6}, {"Ryskin-21", 1.0}};
    case Generator::ControlCounterpart:
      return {{"AD-98", 1.2},         {"Kim-05", 0.5},   {"Ito-16", 1.5},
              {"Brothers-20S", 1.2},  {"Brothers-20L", 1.0}, {"Brothers-20G", 1.0},
              {"Chow-16R", 0.8},      {"Chow-16S", 0.6}, {"Ryskin-21", 1.0}};
    case Generator::MultipleSampler:
      return {{"AD-98", 1.5},         {"Kim-05", 1.2},   {"Ito-16", 1.5},
              {"Brothers-20S", 1.5},  {"Brothers-20L", 1.0}, {"Brothers-20G", 1.0},
              {"Chow-16R", 0.8},      {"Chow-16S", 1.0}, {"Ryskin-21", 1.2}};
  }
  return {};
}

}  // namespace surpdec
