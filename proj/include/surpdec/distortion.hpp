#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace surpdec {

/// Anything that maps text to a fixed-dimension real vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

std::u32string decode_utf8(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::string join_words(const std::vector<std::string>& words);

/// Damerau-Levenshtein distance over Unicode scalar values: insertion,
/// deletion, substitution and transposition of adjacent characters, each cost 1.
/// Transposed characters may be edited further (unrestricted variant), which
/// keeps the result a metric.
std::size_t char_dl_distance(std::u32string_view a, std::u32string_view b);
std::size_t char_dl_distance(std::string_view a, std::string_view b);

inline constexpr std::size_t kMemorySpan = 7;
inline constexpr int kMaxWordSwaps = 2;

/// Form distance d_phi(w, x): cheapest combination of at most two word
/// transpositions applied to `w` (positions i < j, j - i <= 7, cost j - i)
/// followed by character-level edits turning the result into `x`.
double form_distance(std::string_view w, std::string_view x);

/// If `w` and `x` have the same word count and differ in exactly one position,
/// returns that (w_word, x_word) pair; otherwise returns the full texts.
std::pair<std::string, std::string> align_for_semantics(std::string_view w, std::string_view x);

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v);

/// Semantic distance d_sigma(w, x) in [0, 2]: cosine distance of the embeddings
/// of the aligned span (see align_for_semantics).
double semantic_distance(std::string_view w, std::string_view x, const Embedder& embedder);

/// d(w, x) = d_phi + gamma * d_sigma.
double total_distortion(std::string_view w, std::string_view x, double gamma, const Embedder& embedder);

}  // namespace surpdec
