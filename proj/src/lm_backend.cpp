#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "surpdec/error.hpp"
#include "surpdec/lm_backend.hpp"

namespace surpdec {

std::vector<double> LanguageModel::logprob_batch(const LmRequestBatch& batch) const {
  if (batch.queries.empty()) throw Error(ErrorCode::InvalidArgument, "empty scoring batch");
  std::vector<double> out;
  out.reserve(batch.queries.size());
  for (const auto& q : batch.queries) out.push_back(logprob(batch.context, q));
  return out;
}

std::vector<std::vector<double>> LanguageModel::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::string normalize_word(std::string_view word) {
  std::size_t b = 0, e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  std::string out(word.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

WordVectors::WordVectors(std::map<std::string, std::vector<double>> vectors) {
  for (auto& [word, vec] : vectors) vectors_.emplace(normalize_word(word), std::move(vec));
}

WordVectors WordVectors::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open word-vector file " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    return WordVectors(j.get<std::map<std::string, std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, "malformed word-vector file " + path + ": " + e.what());
  }
}

bool WordVectors::contains(std::string_view word) const { return vectors_.count(normalize_word(word)) > 0; }

std::vector<double> WordVectors::embed(std::string_view text) const {
  if (auto it = vectors_.find(normalize_word(text)); it != vectors_.end()) return it->second;
  throw Error(ErrorCode::MissingEntry, "no word vector for '" + std::string(text) + "'");
}

std::shared_ptr<const LanguageModel> open_backend(std::string_view spec) {
  if (spec.rfind("mock:", 0) == 0) return std::make_shared<MockLm>(MockLm::from_file(std::string(spec.substr(5))));
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    return std::make_shared<HttpLm>(std::string(spec));
  }
  if (spec.rfind("http:", 0) == 0) return std::make_shared<HttpLm>(std::string(spec.substr(5)));
  throw Error(ErrorCode::InvalidArgument, "backend must be mock:FILE or http:URL, got '" + std::string(spec) + "'");
}

}  // namespace surpdec
