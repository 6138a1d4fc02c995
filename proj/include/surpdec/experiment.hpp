#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surpdec/candidates.hpp"
#include "surpdec/lm_backend.hpp"
#include "surpdec/types.hpp"

namespace surpdec {

/// A stimulus file: the items plus optional experiment-level presets.
struct Dataset {
  std::string name;
  std::vector<Stimulus> stimuli;
  std::vector<std::string> expected_pattern;
  std::optional<double> lambda;
  std::optional<double> gamma;
};

/// Accepts either a bare array of stimuli or an object with a "stimuli" array.
/// Throws SchemaError (including for an empty file) and DanglingControlRef.
Dataset parse_stimuli(std::string_view json_text);
Dataset load_stimuli(const std::string& path);

struct GeneratorConfig {
  Generator kind = Generator::ControlCounterpart;
  std::optional<std::string> corrections_path;  // External
  std::optional<std::string> lexicon_path;      // MultipleSampler
  std::optional<std::string> word_vectors_path; // MultipleSampler, optional
  SamplerConfig sampler;
};

struct ExperimentSpec {
  std::string name;
  std::vector<Stimulus> stimuli;
  GeneratorConfig generator;
  PolicyParams params;
  std::vector<std::string> expected_pattern;
  double alpha = 1.0;
  double beta = 1.0;
};

struct ConditionSummary {
  std::string condition;
  bool is_control = false;
  std::string control_condition;  // empty for control conditions
  double mean_shallow = 0.0;
  double mean_deep = 0.0;
  double mean_veridical = 0.0;
  double mean_lm_surprisal = 0.0;
  std::size_t n_items = 0;
  double effect_n400 = 0.0;
  double effect_p600 = 0.0;
};

/// Candidate sets paired with the raw LM surprisal of each stimulus target, so
/// parameter sweeps never go back to the backend.
struct PreparedItem {
  Stimulus stimulus;
  CandidateSet set;
  double lm_surprisal = 0.0;
};

struct PreparedExperiment {
  std::vector<PreparedItem> items;  // sorted by item id
  std::vector<ItemFailure> failures;
};

struct ExperimentRun {
  std::vector<DecompositionResult> results;  // sorted by item id
  std::vector<ConditionSummary> summaries;
  std::vector<ItemFailure> failures;
};

GenerationOutcome generate_candidates(std::span<const Stimulus> stimuli, const GeneratorConfig& config,
                                      const LanguageModel& lm, std::size_t jobs = 8);

/// Joins candidate sets to their stimuli and scores target surprisal. Sets
/// without a stimulus are reported as UnknownItemId failures.
PreparedExperiment prepare(std::span<const Stimulus> stimuli, std::span<const CandidateSet> sets,
                           const LanguageModel& lm, std::size_t jobs = 8);

/// Per-item decomposition plus per-condition means and control-relative effects.
ExperimentRun decompose_prepared(const PreparedExperiment& prepared, const PolicyParams& params,
                                 double alpha = 1.0, double beta = 1.0, std::size_t jobs = 8);

ExperimentRun run_experiment(const ExperimentSpec& spec, const LanguageModel& lm, std::size_t jobs = 8);

/// Condition means over `results`, effects as experimental mean minus the mean
/// of the paired control condition, scaled by alpha (N400) and beta (P600).
/// Conditions are ordered experimental-first, then by name.
std::vector<ConditionSummary> summarize(std::span<const DecompositionResult> results,
                                        std::span<const Stimulus> stimuli, double alpha = 1.0, double beta = 1.0);

/// Ordering constraint over condition summaries, e.g. "A[Semantic] > A[Control]"
/// or "|B[Semantic] - B[Control]| < 0.5". Metrics: A, B, V (veridical),
/// S (LM surprisal), N400, P600 (effects).
class PatternConstraint {
 public:
  static PatternConstraint parse(std::string_view text);
  bool holds(std::span<const ConditionSummary> summaries) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::vector<Node> nodes_;
  int lhs_ = -1;
  int rhs_ = -1;
  std::string op_;
};

struct PatternConstraint::Node {
  enum class Kind { Number, Metric, Abs, Add, Sub } kind = Kind::Number;
  double value = 0.0;
  std::string metric;
  std::string condition;
  int a = -1;
  int b = -1;
};

struct GridRow {
  double lambda = 0.0;
  double gamma = 0.0;
  std::size_t score = 0;
  std::size_t n_constraints = 0;
  std::vector<ConditionSummary> summaries;
};

std::vector<double> default_lambda_grid();
std::vector<double> default_gamma_grid();

/// "start:stop:step" (inclusive, e.g. "0:10:0.1") or a comma list "0,0.5,1".
std::vector<double> parse_grid(std::string_view text);

/// Evaluates every (lambda, gamma) cell; rows ranked by pattern score
/// (descending), then lambda, then gamma (ascending).
std::vector<GridRow> grid_search(const PreparedExperiment& prepared, std::span<const std::string> pattern,
                                 std::span<const double> lambda_grid, std::span<const double> gamma_grid,
                                 std::size_t jobs = 8);

struct LambdaPreset {
  std::string experiment;
  double lambda;
};

/// Processing-depth values used for the published simulations, keyed by
/// generator ("external" for prompted corrections, "counterpart" for control counterparts).
std::vector<LambdaPreset> lambda_presets(Generator generator);

}  // namespace surpdec
