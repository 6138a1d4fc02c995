#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surpdec/error.hpp"
#include "surpdec/lm_backend.hpp"
#include "surpdec/types.hpp"

namespace surpdec {

struct LexiconEntry {
  std::string word;  // lowercase
  long rank = 0;     // 1 = most frequent
};

class Lexicon {
 public:
  static constexpr std::size_t kMaxEntries = 60000;

  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconEntry> entries);
  /// Two-column UTF-8 TSV: word, frequency rank. Lines starting with '#' are skipped.
  static Lexicon from_tsv_text(std::string_view text);
  static Lexicon from_tsv(const std::string& path);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<LexiconEntry> entries_;
};

struct SamplerConfig {
  std::size_t n_phonological = 100;
  std::size_t n_semantic = 100;
  std::size_t n_contextual = 100;
};

/// Per-item failure recorded instead of aborting a batch.
struct ItemFailure {
  std::string item_id;
  ErrorCode code = ErrorCode::Internal;
  std::string message;
};

struct GenerationOutcome {
  std::vector<CandidateSet> sets;  // sorted by item id
  std::vector<ItemFailure> failures;
};

/// Builds a validated CandidateSet for `stimulus` from candidate sentences:
/// appends the veridical sentence, scores priors with `lm` and computes
/// form/semantic distances against the veridical sentence. Priors are scored
/// conditional on the stimulus context when every candidate keeps it, and as
/// whole sentences otherwise.
CandidateSet score_candidates(const Stimulus& stimulus, const std::vector<std::string>& texts, Generator generator,
                              const LanguageModel& lm);

using CorrectionsMap = std::map<std::string, std::vector<std::string>>;

CorrectionsMap parse_corrections(std::string_view json_text);
CorrectionsMap load_corrections(const std::string& path);

/// Appends the stimulus' final punctuation to a correction that lacks it.
std::string complete_punctuation(const std::string& correction, const std::string& veridical);

/// Throws UnknownItemId when the corrections name an item that is not among `stimuli`.
GenerationOutcome ingest_external(const CorrectionsMap& corrections, std::span<const Stimulus> stimuli,
                                  const LanguageModel& lm, std::size_t jobs = 8);

/// Pairs every experimental item with its control (and every control with the
/// experimental items pointing at it).
GenerationOutcome control_counterpart(std::span<const Stimulus> stimuli, const LanguageModel& lm,
                                      std::size_t jobs = 8);

/// Replaces the final word of the target with `word`, keeping surrounding punctuation.
std::string substitute_target(const Stimulus& stimulus, const std::string& word);
/// Bare final word of the target (punctuation stripped).
std::string target_word(const Stimulus& stimulus);

/// Lexicon words with precomputed embeddings for semantic competitor search.
class SemanticIndex {
 public:
  /// Uses `alternate` when given, otherwise the backend's embeddings. Words
  /// without an embedding are left out of the index.
  static SemanticIndex build(const Lexicon& lexicon, const LanguageModel& lm, const Embedder* alternate = nullptr);

  /// Up to n nearest lexicon words by cosine distance to `word`, excluding `word`.
  std::vector<std::string> nearest(const std::string& word, std::size_t n) const;

 private:
  struct Row {
    std::string word;
    long rank;
    std::vector<double> unit;
  };
  std::vector<Row> rows_;
  const LanguageModel* lm_ = nullptr;
  const Embedder* alternate_ = nullptr;
};

/// Up to n lexicon words closest in edit distance to `word` (lowercase),
/// ties by frequency rank then lexicographically; `word` itself excluded.
std::vector<std::string> phonological_neighbors(const Lexicon& lexicon, const std::string& word, std::size_t n);

/// Whitespace-clean words among the LM's top-k continuations of the target context.
std::vector<std::string> contextual_words(const Stimulus& stimulus, const LanguageModel& lm, std::size_t n);

CandidateSet multiple_sampler(const Stimulus& stimulus, const Lexicon& lexicon, const SemanticIndex& index,
                              const LanguageModel& lm, const SamplerConfig& config);

GenerationOutcome multiple_sampler_all(std::span<const Stimulus> stimuli, const Lexicon& lexicon,
                                       const SemanticIndex& index, const LanguageModel& lm,
                                       const SamplerConfig& config, std::size_t jobs = 8);

}  // namespace surpdec
