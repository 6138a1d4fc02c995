#include "surpdec/candidates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "surpdec/distortion.hpp"
#include "surpdec/parallel.hpp"

namespace surpdec {

namespace {

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

GenerationOutcome run_per_item(std::span<const Stimulus> stimuli, std::size_t jobs,
                               const std::function<CandidateSet(const Stimulus&)>& build) {
  std::vector<std::optional<CandidateSet>> sets(stimuli.size());
  std::vector<std::optional<ItemFailure>> failures(stimuli.size());
  parallel_for(stimuli.size(), jobs, [&](std::size_t i) {
    try {
      sets[i] = build(stimuli[i]);
    } catch (const Error& e) {
      failures[i] = ItemFailure{stimuli[i].item_id, e.code(), e.what()};
    } catch (const std::exception& e) {
      failures[i] = ItemFailure{stimuli[i].item_id, ErrorCode::Internal, e.what()};
    }
  });
  GenerationOutcome out;
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    if (sets[i]) out.sets.push_back(std::move(*sets[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  std::sort(out.sets.begin(), out.sets.end(),
            [](const CandidateSet& a, const CandidateSet& b) { return a.item_id < b.item_id; });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const ItemFailure& a, const ItemFailure& b) { return a.item_id < b.item_id; });
  return out;
}

}  // namespace

Lexicon::Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() > kMaxEntries) entries_.resize(kMaxEntries);
  std::unordered_set<long> ranks;
  for (auto& e : entries_) {
    e.word = lowercase(trim(e.word));
    if (e.word.empty()) throw Error(ErrorCode::SchemaError, "empty lexicon word");
    if (!ranks.insert(e.rank).second) {
      throw Error(ErrorCode::SchemaError, "duplicate lexicon rank " + std::to_string(e.rank));
    }
  }
}

Lexicon Lexicon::from_tsv_text(std::string_view text) {
  std::vector<LexiconEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::SchemaError, "lexicon line " + std::to_string(line_no) + " lacks a tab");
    }
    LexiconEntry e;
    e.word = line.substr(0, tab);
    try {
      e.rank = std::stol(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError, "lexicon line " + std::to_string(line_no) + " has a bad rank");
    }
    entries.push_back(std::move(e));
  }
  return Lexicon(std::move(entries));
}

Lexicon Lexicon::from_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open lexicon " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_tsv_text(buf.str());
}

CandidateSet score_candidates(const Stimulus& stimulus, const std::vector<std::string>& texts, Generator generator,
                              const LanguageModel& lm) {
  const std::string veridical = stimulus.sentence();
  std::vector<std::string> unique;
  std::unordered_set<std::string> seen;
  for (const auto& t : texts) {
    auto clean = trim(t);
    if (!clean.empty() && seen.insert(clean).second) unique.push_back(std::move(clean));
  }
  if (seen.insert(veridical).second) unique.push_back(veridical);

  const std::string prefix = stimulus.context.empty() ? std::string() : stimulus.context + " ";
  const bool shared_context =
      !prefix.empty() && std::all_of(unique.begin(), unique.end(), [&](const std::string& t) {
        return t.size() > prefix.size() && t.compare(0, prefix.size(), prefix) == 0;
      });
  LmRequestBatch batch;
  batch.context = shared_context ? stimulus.context : std::string();
  for (const auto& t : unique) batch.queries.push_back(shared_context ? t.substr(prefix.size()) : t);
  const auto priors = lm.logprob_batch(batch);

  std::vector<std::pair<std::string, std::string>> aligned;
  std::vector<std::string> to_embed;
  std::unordered_map<std::string, std::size_t> embed_slot;
  for (const auto& t : unique) {
    aligned.push_back(t == veridical ? std::pair<std::string, std::string>{} : align_for_semantics(t, veridical));
    if (t == veridical) continue;
    for (const auto* s : {&aligned.back().first, &aligned.back().second}) {
      if (embed_slot.emplace(*s, to_embed.size()).second) to_embed.push_back(*s);
    }
  }
  const auto vectors = lm.embed_batch(to_embed);

  CandidateSet set;
  set.item_id = stimulus.item_id;
  set.generator = generator;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    Candidate c;
    c.text = unique[i];
    c.prior_logprob = priors[i];
    if (unique[i] != veridical) {
      c.form_distance = form_distance(unique[i], veridical);
      c.semantic_distance =
          cosine_distance(vectors[embed_slot.at(aligned[i].first)], vectors[embed_slot.at(aligned[i].second)]);
    }
    set.candidates.push_back(std::move(c));
  }
  return validate_candidate_set(std::move(set));
}

CorrectionsMap parse_corrections(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "corrections file must map item_id to a list");
    return j.get<CorrectionsMap>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed corrections file: ") + e.what());
  }
}

CorrectionsMap load_corrections(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corrections file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corrections(buf.str());
}

std::string complete_punctuation(const std::string& correction, const std::string& veridical) {
  std::string out = trim(correction);
  if (out.empty() || is_punct(out.back())) return out;
  std::size_t tail = veridical.size();
  while (tail > 0 && is_punct(veridical[tail - 1])) --tail;
  return out + veridical.substr(tail);
}

GenerationOutcome ingest_external(const CorrectionsMap& corrections, std::span<const Stimulus> stimuli,
                                  const LanguageModel& lm, std::size_t jobs) {
  std::unordered_set<std::string> ids;
  for (const auto& s : stimuli) ids.insert(s.item_id);
  for (const auto& [item, list] : corrections) {
    if (!ids.count(item)) throw Error(ErrorCode::UnknownItemId, "corrections name unknown item '" + item + "'");
  }
  return run_per_item(stimuli, jobs, [&](const Stimulus& s) {
    std::vector<std::string> texts;
    if (auto it = corrections.find(s.item_id); it != corrections.end()) {
      for (const auto& c : it->second) texts.push_back(complete_punctuation(c, s.sentence()));
    }
    return score_candidates(s, texts, Generator::External, lm);
  });
}

GenerationOutcome control_counterpart(std::span<const Stimulus> stimuli, const LanguageModel& lm,
                                      std::size_t jobs) {
  std::unordered_map<std::string, const Stimulus*> by_id;
  std::unordered_map<std::string, std::vector<const Stimulus*>> partners;
  for (const auto& s : stimuli) by_id.emplace(s.item_id, &s);
  for (const auto& s : stimuli) {
    if (!s.is_control && s.control_item_id) partners[*s.control_item_id].push_back(&s);
  }
  for (auto& [id, list] : partners) {
    std::sort(list.begin(), list.end(), [](const Stimulus* a, const Stimulus* b) { return a->item_id < b->item_id; });
  }
  return run_per_item(stimuli, jobs, [&](const Stimulus& s) {
    std::vector<const Stimulus*> others;
    if (s.is_control) {
      if (auto it = partners.find(s.item_id); it != partners.end()) others = it->second;
    } else {
      auto it = s.control_item_id ? by_id.find(*s.control_item_id) : by_id.end();
      if (it != by_id.end() && it->second->is_control) others.push_back(it->second);
    }
    if (others.empty()) throw Error(ErrorCode::UnpairedItem, "item '" + s.item_id + "' has no counterpart");
    std::vector<std::string> texts;
    for (const auto* o : others) {
      if (o->context != s.context) {
        throw Error(ErrorCode::ContextMismatch,
                    "items '" + s.item_id + "' and '" + o->item_id + "' have different contexts");
      }
      texts.push_back(o->sentence());
    }
    return score_candidates(s, texts, Generator::ControlCounterpart, lm);
  });
}

namespace {

struct TargetSplit {
  std::string before;  // sentence up to the final word of the target (including the space)
  std::string lead;    // punctuation preceding the word
  std::string word;
  std::string trail;   // punctuation following the word
};

TargetSplit split_target(const Stimulus& stimulus) {
  const std::string sentence = stimulus.sentence();
  std::size_t end = sentence.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(sentence[end - 1]))) --end;
  std::size_t start = end;
  while (start > 0 && !std::isspace(static_cast<unsigned char>(sentence[start - 1]))) --start;
  const std::string token = sentence.substr(start, end - start);
  std::size_t b = 0, e = token.size();
  while (b < e && is_punct(token[b])) ++b;
  while (e > b && is_punct(token[e - 1])) --e;
  if (b == e) throw Error(ErrorCode::SchemaError, "target of '" + stimulus.item_id + "' has no word characters");
  return {sentence.substr(0, start), token.substr(0, b), token.substr(b, e - b), token.substr(e)};
}

}  // namespace

std::string target_word(const Stimulus& stimulus) { return split_target(stimulus).word; }

std::string substitute_target(const Stimulus& stimulus, const std::string& word) {
  const auto parts = split_target(stimulus);
  return parts.before + parts.lead + word + parts.trail;
}

std::vector<std::string> phonological_neighbors(const Lexicon& lexicon, const std::string& word, std::size_t n) {
  const std::string query = lowercase(word);
  const auto query32 = decode_utf8(query);
  struct Scored {
    std::size_t distance;
    long rank;
    const std::string* word;
  };
  std::vector<Scored> scored;
  scored.reserve(lexicon.size());
  for (const auto& e : lexicon.entries()) {
    if (e.word == query) continue;
    scored.push_back({char_dl_distance(decode_utf8(e.word), query32), e.rank, &e.word});
  }
  const auto by_score = [](const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.rank != b.rank) return a.rank < b.rank;
    return *a.word < *b.word;
  };
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), by_score);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(*scored[i].word);
  return out;
}

namespace {

std::vector<double> unit(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < 1e-12) throw Error(ErrorCode::ZeroNormEmbedding, "embedding norm below 1e-12");
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace

SemanticIndex SemanticIndex::build(const Lexicon& lexicon, const LanguageModel& lm, const Embedder* alternate) {
  SemanticIndex index;
  index.lm_ = &lm;
  index.alternate_ = alternate;
  const auto& entries = lexicon.entries();
  auto add_one = [&](const LexiconEntry& e, const Embedder& embedder) {
    try {
      index.rows_.push_back({e.word, e.rank, unit(embedder.embed(e.word))});
    } catch (const Error& err) {
      if (err.code() != ErrorCode::MissingEntry) throw;
    }
  };
  if (alternate) {
    for (const auto& e : entries) add_one(e, *alternate);
    return index;
  }
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < entries.size(); start += kChunk) {
    const std::size_t stop = std::min(entries.size(), start + kChunk);
    std::vector<std::string> words;
    for (std::size_t i = start; i < stop; ++i) words.push_back(entries[i].word);
    std::vector<std::vector<double>> vectors;
    try {
      vectors = lm.embed_batch(words);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingEntry) throw;
      // Table-backed models cannot embed every word; retry one at a time.
      for (std::size_t i = start; i < stop; ++i) add_one(entries[i], lm);
      continue;
    }
    for (std::size_t i = start; i < stop; ++i) {
      index.rows_.push_back({entries[i].word, entries[i].rank, unit(std::move(vectors[i - start]))});
    }
  }
  return index;
}

std::vector<std::string> SemanticIndex::nearest(const std::string& word, std::size_t n) const {
  const std::string query = lowercase(word);
  const auto q = unit(alternate_ ? alternate_->embed(query) : lm_->embed(query));
  struct Scored {
    double distance;
    const Row* row;
  };
  std::vector<Scored> scored;
  scored.reserve(rows_.size());
  for (const auto& row : rows_) {
    if (row.word == query) continue;
    if (row.unit.size() != q.size()) throw Error(ErrorCode::InvalidArgument, "embedding dimensions differ");
    double dot = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) dot += q[i] * row.unit[i];
    scored.push_back({std::clamp(1.0 - dot, 0.0, 2.0), &row});
  }
  const auto by_score = [](const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.row->rank != b.row->rank) return a.row->rank < b.row->rank;
    return a.row->word < b.row->word;
  };
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), by_score);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].row->word);
  return out;
}

std::vector<std::string> contextual_words(const Stimulus& stimulus, const LanguageModel& lm, std::size_t n) {
  std::vector<std::string> out;
  for (const auto& t : lm.topk(stimulus.target_context(), n)) {
    std::string word = trim(t.token);
    if (word.empty()) continue;
    if (std::any_of(word.begin(), word.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    // Strip punctuation the model attached; keep only tokens with a letter.
    std::size_t b = 0, e = word.size();
    while (b < e && is_punct(word[b])) ++b;
    while (e > b && is_punct(word[e - 1])) --e;
    word = word.substr(b, e - b);
    if (std::none_of(word.begin(), word.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
      continue;
    }
    out.push_back(std::move(word));
  }
  return out;
}

CandidateSet multiple_sampler(const Stimulus& stimulus, const Lexicon& lexicon, const SemanticIndex& index,
                              const LanguageModel& lm, const SamplerConfig& config) {
  if (config.n_phonological == 0 || config.n_semantic == 0 || config.n_contextual == 0) {
    throw Error(ErrorCode::InvalidArgument, "sampler counts must be at least 1");
  }
  const std::string word = target_word(stimulus);
  std::vector<std::string> texts;
  for (const auto& w : phonological_neighbors(lexicon, word, config.n_phonological)) {
    texts.push_back(substitute_target(stimulus, w));
  }
  for (const auto& w : index.nearest(word, config.n_semantic)) texts.push_back(substitute_target(stimulus, w));
  for (const auto& w : contextual_words(stimulus, lm, config.n_contextual)) {
    texts.push_back(substitute_target(stimulus, w));
  }
  return score_candidates(stimulus, texts, Generator::MultipleSampler, lm);
}

GenerationOutcome multiple_sampler_all(std::span<const Stimulus> stimuli, const Lexicon& lexicon,
                                       const SemanticIndex& index, const LanguageModel& lm,
                                       const SamplerConfig& config, std::size_t jobs) {
  return run_per_item(stimuli, jobs,
                      [&](const Stimulus& s) { return multiple_sampler(s, lexicon, index, lm, config); });
}

}  // namespace surpdec
