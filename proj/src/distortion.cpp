#include "surpdec/distortion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "surpdec/error.hpp"

namespace surpdec {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto byte = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (byte < 0x80) {
      cp = byte;
    } else if ((byte & 0xE0) == 0xC0) {
      cp = byte & 0x1F;
      extra = 1;
    } else if ((byte & 0xF0) == 0xE0) {
      cp = byte & 0x0F;
      extra = 2;
    } else if ((byte & 0xF8) == 0xF0) {
      cp = byte & 0x07;
      extra = 3;
    } else {
      throw Error(ErrorCode::InvalidArgument, "invalid UTF-8 lead byte");
    }
    if (extra > 0 && i + extra >= s.size()) {
      throw Error(ErrorCode::InvalidArgument, "truncated UTF-8 sequence");
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) throw Error(ErrorCode::InvalidArgument, "invalid UTF-8 continuation byte");
      cp = (cp << 6) | (cont & 0x3F);
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::size_t char_dl_distance(std::u32string_view a, std::u32string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;

  // Dense alphabet ids so the last-occurrence table is a flat vector.
  std::u32string alphabet;
  alphabet.reserve(n + m);
  alphabet.append(a);
  alphabet.append(b);
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  auto id_of = [&](char32_t c) {
    return static_cast<std::size_t>(std::lower_bound(alphabet.begin(), alphabet.end(), c) - alphabet.begin());
  };
  std::vector<std::size_t> a_ids(n), b_ids(m);
  for (std::size_t i = 0; i < n; ++i) a_ids[i] = id_of(a[i]);
  for (std::size_t j = 0; j < m; ++j) b_ids[j] = id_of(b[j]);

  // Lowrance-Wagner table with a sentinel row and column.
  const std::size_t inf = n + m;
  const std::size_t w = m + 2;
  std::vector<std::size_t> h((n + 2) * w);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return h[i * w + j]; };
  at(0, 0) = inf;
  for (std::size_t i = 0; i <= n; ++i) {
    at(i + 1, 0) = inf;
    at(i + 1, 1) = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    at(0, j + 1) = inf;
    at(1, j + 1) = j;
  }
  std::vector<std::size_t> last_row(alphabet.size(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t i1 = last_row[b_ids[j - 1]];
      const std::size_t j1 = last_match_col;
      std::size_t cost = 1;
      if (a_ids[i - 1] == b_ids[j - 1]) {
        cost = 0;
        last_match_col = j;
      }
      std::size_t best = at(i, j) + cost;
      best = std::min(best, at(i + 1, j) + 1);
      best = std::min(best, at(i, j + 1) + 1);
      best = std::min(best, at(i1, j1) + (i - i1 - 1) + 1 + (j - j1 - 1));
      at(i + 1, j + 1) = best;
    }
    last_row[a_ids[i - 1]] = i;
  }
  return at(n + 1, m + 1);
}

std::size_t char_dl_distance(std::string_view a, std::string_view b) {
  if (a == b) return 0;
  return char_dl_distance(decode_utf8(a), decode_utf8(b));
}

namespace {

// Every edit changes the multiset difference by at most one on each side, and
// word transpositions leave the multiset untouched, so this bounds the character
// distance of any rearrangement of `a` from below.
std::size_t multiset_lower_bound(std::u32string a, std::u32string b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t only_a = 0, only_b = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++only_a;
      ++i;
    } else {
      ++only_b;
      ++j;
    }
  }
  only_a += a.size() - i;
  only_b += b.size() - j;
  return std::max(only_a, only_b);
}

struct SwapSearch {
  std::u32string target;
  std::size_t lower_bound = 0;
  double best = 0.0;

  void visit(std::vector<std::string>& words, double cost, int swaps_left) {
    if (swaps_left == 0) return;
    const std::size_t count = words.size();
    for (std::size_t i = 0; i + 1 < count; ++i) {
      for (std::size_t j = i + 1; j < count && j - i <= kMemorySpan; ++j) {
        const double step = cost + static_cast<double>(j - i);
        if (step + static_cast<double>(lower_bound) >= best) break;
        if (words[i] == words[j]) continue;
        std::swap(words[i], words[j]);
        const auto text = decode_utf8(join_words(words));
        best = std::min(best, step + static_cast<double>(char_dl_distance(text, target)));
        visit(words, step, swaps_left - 1);
        std::swap(words[i], words[j]);
      }
    }
  }
};

}  // namespace

double form_distance(std::string_view w, std::string_view x) {
  if (w == x) return 0.0;
  SwapSearch search;
  search.target = decode_utf8(x);
  const auto source = decode_utf8(w);
  search.best = static_cast<double>(char_dl_distance(source, search.target));
  search.lower_bound = multiset_lower_bound(source, search.target);
  auto words = split_words(w);
  search.visit(words, 0.0, kMaxWordSwaps);
  return search.best;
}

std::pair<std::string, std::string> align_for_semantics(std::string_view w, std::string_view x) {
  const auto ww = split_words(w);
  const auto xw = split_words(x);
  if (ww.size() == xw.size()) {
    std::size_t diffs = 0, at = 0;
    for (std::size_t i = 0; i < ww.size(); ++i) {
      if (ww[i] != xw[i]) {
        ++diffs;
        at = i;
      }
    }
    if (diffs == 1) return {ww[at], xw[at]};
  }
  return {std::string(w), std::string(x)};
}

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size() || u.empty()) {
    throw Error(ErrorCode::InvalidArgument, "embedding dimensions differ or are empty");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (!(nu >= 1e-12) || !(nv >= 1e-12)) {
    throw Error(ErrorCode::ZeroNormEmbedding, "embedding norm below 1e-12");
  }
  const double cos = std::clamp(dot / (nu * nv), -1.0, 1.0);
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

double semantic_distance(std::string_view w, std::string_view x, const Embedder& embedder) {
  if (w == x) return 0.0;
  const auto [u, v] = align_for_semantics(w, x);
  return cosine_distance(embedder.embed(u), embedder.embed(v));
}

double total_distortion(std::string_view w, std::string_view x, double gamma, const Embedder& embedder) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be non-negative");
  return form_distance(w, x) + gamma * semantic_distance(w, x, embedder);
}

}  // namespace surpdec
