#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surpdec/distortion.hpp"

namespace surpdec {

struct ScoredToken {
  std::string token;
  double logprob = 0.0;  // nats
};

struct LmRequestBatch {
  std::string context;
  std::vector<std::string> queries;
};

/// Language-model scoring surface: ln p0(continuation | context), embeddings and
/// next-token top-k. Implementations are safe to share across threads.
class LanguageModel : public Embedder {
 public:
  virtual double logprob(std::string_view context, std::string_view continuation) const = 0;
  /// Results are aligned with `batch.queries`.
  virtual std::vector<double> logprob_batch(const LmRequestBatch& batch) const;
  virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const;
  /// At most `k` entries, descending log-probability, ties broken lexicographically.
  virtual std::vector<ScoredToken> topk(std::string_view context, std::size_t k) const = 0;
  /// Stable human-readable identity, echoed into provenance headers.
  virtual std::string identity() const = 0;
};

/// Deterministic table-backed model. Unknown continuations fall back to
/// `floor_logprob` when set (default -20 nats), otherwise raise MissingEntry.
class MockLm final : public LanguageModel {
 public:
  static constexpr double kDefaultFloor = -20.0;

  struct Table {
    std::map<std::string, std::map<std::string, double>> conditional;
    std::map<std::string, std::vector<double>> embeddings;
    std::map<std::string, std::vector<ScoredToken>> topk;
    std::optional<double> floor_logprob = kDefaultFloor;
  };

  explicit MockLm(Table table, std::string source = "inline");
  static MockLm from_json_text(std::string_view json, std::string source = "inline");
  static MockLm from_file(const std::string& path);

  double logprob(std::string_view context, std::string_view continuation) const override;
  std::vector<double> embed(std::string_view text) const override;
  std::vector<ScoredToken> topk(std::string_view context, std::size_t k) const override;
  std::string identity() const override;

  const Table& table() const { return table_; }

 private:
  const std::vector<double>* lookup_embedding(std::string_view text) const;

  Table table_;
  std::string source_;
};

struct RetryPolicy {
  int attempts = 4;  // initial request plus three retries
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(250), std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(4000)};
};

/// Client for the scoring sidecar (POST /score, /embed, /topk; GET /healthz).
/// A fresh connection is opened per request so the handle can be shared.
class HttpLm final : public LanguageModel {
 public:
  explicit HttpLm(std::string base_url, RetryPolicy retry = {},
                  std::chrono::milliseconds timeout = std::chrono::seconds(120));

  double logprob(std::string_view context, std::string_view continuation) const override;
  std::vector<double> logprob_batch(const LmRequestBatch& batch) const override;
  std::vector<double> embed(std::string_view text) const override;
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const override;
  std::vector<ScoredToken> topk(std::string_view context, std::size_t k) const override;
  std::string identity() const override;

  /// Model id reported by /healthz.
  std::string model_id() const;

 private:
  std::string send(const std::string& path, const std::string* body) const;  // GET when body is null
  std::string post(const std::string& path, const std::string& body) const;
  std::string get(const std::string& path) const;

  std::string base_url_;
  RetryPolicy retry_;
  std::chrono::milliseconds timeout_;
};

/// Word-vector file (JSON object word -> vector) used as an alternate embedder
/// for semantic competitors.
class WordVectors final : public Embedder {
 public:
  static WordVectors from_file(const std::string& path);
  explicit WordVectors(std::map<std::string, std::vector<double>> vectors);

  std::vector<double> embed(std::string_view text) const override;
  bool contains(std::string_view word) const;

 private:
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

/// Strips leading/trailing ASCII punctuation and lowercases; used as the
/// fallback key for word-level embedding lookups.
std::string normalize_word(std::string_view word);

/// "mock:FILE" or "http:URL" (an http://... URL is also accepted as is).
std::shared_ptr<const LanguageModel> open_backend(std::string_view spec);

}  // namespace surpdec
