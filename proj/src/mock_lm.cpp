#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "surpdec/error.hpp"
#include "surpdec/lm_backend.hpp"

namespace surpdec {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void sort_ranked(std::vector<ScoredToken>& tokens) {
  std::sort(tokens.begin(), tokens.end(), [](const ScoredToken& a, const ScoredToken& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token < b.token;
  });
}

}  // namespace

MockLm::MockLm(Table table, std::string source) : table_(std::move(table)), source_(std::move(source)) {
  for (const auto& [context, entries] : table_.conditional) {
    double mass = 0.0;
    for (const auto& [continuation, lp] : entries) {
      if (!std::isfinite(lp) || lp > 0.0) {
        throw Error(ErrorCode::SchemaError, "mock log-probability must be finite and <= 0 for '" + continuation + "'");
      }
      mass += std::exp(lp);
    }
    if (mass > 1.0 + 1e-9) {
      throw Error(ErrorCode::SchemaError, "mock continuations for context '" + context + "' sum to more than 1");
    }
  }
  std::size_t dim = 0;
  for (const auto& [text, vec] : table_.embeddings) {
    if (dim == 0) dim = vec.size();
    if (vec.empty() || vec.size() != dim) {
      throw Error(ErrorCode::SchemaError, "mock embeddings must share one nonzero dimension ('" + text + "')");
    }
    double norm = 0.0;
    for (double v : vec) {
      if (!std::isfinite(v)) throw Error(ErrorCode::SchemaError, "non-finite embedding for '" + text + "'");
      norm += v * v;
    }
    if (std::sqrt(norm) < 1e-12) throw Error(ErrorCode::ZeroNormEmbedding, "zero embedding for '" + text + "'");
  }
  for (auto& [context, tokens] : table_.topk) sort_ranked(tokens);
}

MockLm MockLm::from_json_text(std::string_view text, std::string source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("mock table is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "mock table must be a JSON object");
  Table table;
  try {
    if (j.contains("floor_logprob")) {
      if (j["floor_logprob"].is_null()) {
        table.floor_logprob.reset();
      } else {
        table.floor_logprob = j["floor_logprob"].get<double>();
      }
    }
    if (j.contains("conditional")) {
      for (const auto& [context, entries] : j["conditional"].items()) {
        auto& row = table.conditional[context];
        for (const auto& [continuation, lp] : entries.items()) row[continuation] = lp.get<double>();
      }
    }
    if (j.contains("embeddings")) {
      for (const auto& [text_key, vec] : j["embeddings"].items()) {
        table.embeddings[text_key] = vec.get<std::vector<double>>();
      }
    }
    if (j.contains("topk")) {
      for (const auto& [context, list] : j["topk"].items()) {
        auto& out = table.topk[context];
        for (const auto& pair : list) out.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed mock table: ") + e.what());
  }
  std::ostringstream id;
  id << source << "#" << std::hex << fnv1a(text);
  return MockLm(std::move(table), id.str());
}

MockLm MockLm::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mock table " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), std::filesystem::path(path).filename().string());
}

double MockLm::logprob(std::string_view context, std::string_view continuation) const {
  if (continuation.empty()) return 0.0;
  if (auto row = table_.conditional.find(std::string(context)); row != table_.conditional.end()) {
    if (auto it = row->second.find(std::string(continuation)); it != row->second.end()) return it->second;
  }
  if (table_.floor_logprob) return *table_.floor_logprob;
  throw Error(ErrorCode::MissingEntry,
              "no mock entry for ('" + std::string(context) + "', '" + std::string(continuation) + "')");
}

const std::vector<double>* MockLm::lookup_embedding(std::string_view text) const {
  if (auto it = table_.embeddings.find(std::string(text)); it != table_.embeddings.end()) return &it->second;
  if (auto it = table_.embeddings.find(normalize_word(text)); it != table_.embeddings.end()) return &it->second;
  return nullptr;
}

std::vector<double> MockLm::embed(std::string_view text) const {
  if (const auto* v = lookup_embedding(text)) return *v;
  const auto words = split_words(text);
  if (words.size() > 1) {
    std::vector<double> mean;
    bool complete = true;
    for (const auto& word : words) {
      const auto* v = lookup_embedding(word);
      if (!v) {
        complete = false;
        break;
      }
      if (mean.empty()) mean.assign(v->size(), 0.0);
      for (std::size_t i = 0; i < v->size(); ++i) mean[i] += (*v)[i] / static_cast<double>(words.size());
    }
    if (complete) return mean;
  }
  throw Error(ErrorCode::MissingEntry, "no mock embedding for '" + std::string(text) + "'");
}

std::vector<ScoredToken> MockLm::topk(std::string_view context, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "topk requires k >= 1");
  std::vector<ScoredToken> ranked;
  if (auto it = table_.topk.find(std::string(context)); it != table_.topk.end()) {
    ranked = it->second;
  } else if (auto row = table_.conditional.find(std::string(context)); row != table_.conditional.end()) {
    for (const auto& [continuation, lp] : row->second) ranked.push_back({continuation, lp});
    sort_ranked(ranked);
  }
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::string MockLm::identity() const { return "mock:" + source_; }

}  // namespace surpdec
