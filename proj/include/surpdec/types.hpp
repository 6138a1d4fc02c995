#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace surpdec {

/// One experimental item. The presented sentence is `context + " " + continuation`;
/// `target` is the suffix of `continuation` that carries the manipulation.
struct Stimulus {
  std::string experiment_id;
  std::string item_id;
  std::string condition;
  std::string context;
  std::string continuation;
  std::string target;
  bool is_control = false;
  std::optional<std::string> control_item_id;

  /// Full input string x as presented (context followed by the continuation).
  std::string sentence() const;
  /// Everything before the target word, i.e. the conditioning string for the
  /// raw LM surprisal of the target.
  std::string target_context() const;
};

/// Throws SchemaError when the target is not a suffix of the continuation or the
/// control pairing fields are inconsistent.
void validate_stimulus(const Stimulus& s);

enum class Generator { External, ControlCounterpart, MultipleSampler };

const char* generator_name(Generator g) noexcept;
Generator parse_generator(std::string_view name);

/// A candidate representation w of the input.
struct Candidate {
  std::string text;
  double prior_logprob = 0.0;  // ln p0(w | c), unnormalized over the support
  double form_distance = 0.0;
  double semantic_distance = 0.0;
  bool is_veridical = false;

  double distortion(double gamma) const { return form_distance + gamma * semantic_distance; }
};

struct CandidateSet {
  std::string item_id;
  std::vector<Candidate> candidates;
  Generator generator = Generator::External;

  std::size_t size() const { return candidates.size(); }
  /// Index of the veridical candidate. Requires a validated set.
  std::size_t veridical_index() const;
  std::vector<double> prior_logprobs() const;
  std::vector<double> distortions(double gamma) const;
};

/// Merges textual duplicates (keeping the highest prior), marks the single
/// zero-form-distance candidate as veridical and checks the size invariant.
/// Throws MissingVeridical or EmptySet.
CandidateSet validate_candidate_set(CandidateSet set);

struct PolicyParams {
  double lambda = 1.0;
  double gamma = 8.0;
};

void validate_params(const PolicyParams& p);

/// Normalized log-probabilities over a candidate list at a given depth multiplier.
struct PolicyDistribution {
  std::vector<double> log_probs;
  double log_z = 0.0;
  double lambda = 0.0;
};

struct DecompositionResult {
  std::string item_id;
  std::string condition;
  double shallow = 0.0;       // A
  double deep = 0.0;          // B
  double veridical = 0.0;     // renormalized surprisal of x within the candidate set
  double lm_surprisal = 0.0;  // -ln p0(target | preceding words), raw LM
  PolicyParams params;
};

struct FrontierPoint {
  double depth = 0.0;
  double expected_distortion = 0.0;
  double lambda = 0.0;
};

struct ErpPrediction {
  double n400 = 0.0;
  double p600 = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
};

ErpPrediction predict_erp(const DecompositionResult& r, double alpha = 1.0, double beta = 1.0);

}  // namespace surpdec
