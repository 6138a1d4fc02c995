#include <cctype>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "surpdec/error.hpp"
#include "surpdec/lm_backend.hpp"

namespace surpdec {

namespace {

using nlohmann::json;

// The sidecar appends the continuation to the context verbatim, so the word
// boundary is supplied here.
std::string spaced(std::string_view context, std::string_view continuation) {
  if (context.empty() || continuation.empty()) return std::string(continuation);
  if (std::isspace(static_cast<unsigned char>(continuation.front())) ||
      std::isspace(static_cast<unsigned char>(context.back()))) {
    return std::string(continuation);
  }
  return " " + std::string(continuation);
}

json parse_response(const std::string& body, const char* endpoint) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed response from ") + endpoint + ": " + e.what());
  }
}

}  // namespace

HttpLm::HttpLm(std::string base_url, RetryPolicy retry, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), retry_(std::move(retry)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::InvalidArgument, "https sidecar URLs are not supported; use http://");
  }
  if (base_url_.rfind("http://", 0) != 0) base_url_ = "http://" + base_url_;
  if (retry_.attempts < 1) retry_.attempts = 1;
}

std::string HttpLm::send(const std::string& path, const std::string* body) const {
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
    if (attempt > 0) {
      const auto& backoff = retry_.backoff;
      if (!backoff.empty()) {
        std::this_thread::sleep_for(backoff[std::min<std::size_t>(attempt - 1, backoff.size() - 1)]);
      }
    }
    httplib::Client client(base_url_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = body ? client.Post(path, *body, "application/json") : client.Get(path);
    if (!res) {
      last_failure = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw Error(ErrorCode::InvalidArgument,
                  "sidecar rejected " + path + " with HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    return res->body;
  }
  throw Error(ErrorCode::BackendUnavailable, base_url_ + path + " after " + std::to_string(retry_.attempts) +
                                                 " attempts: " + last_failure);
}

std::string HttpLm::post(const std::string& path, const std::string& body) const { return send(path, &body); }

std::string HttpLm::get(const std::string& path) const { return send(path, nullptr); }

double HttpLm::logprob(std::string_view context, std::string_view continuation) const {
  return logprob_batch({std::string(context), {std::string(continuation)}}).front();
}

std::vector<double> HttpLm::logprob_batch(const LmRequestBatch& batch) const {
  if (batch.queries.empty()) throw Error(ErrorCode::InvalidArgument, "empty scoring batch");
  json continuations = json::array();
  for (const auto& q : batch.queries) continuations.push_back(spaced(batch.context, q));
  const json request = {{"context", batch.context}, {"continuations", continuations}};
  const json response = parse_response(post("/score", request.dump()), "/score");
  std::vector<double> out;
  try {
    out = response.at("logprobs_nats").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bad /score response: ") + e.what());
  }
  if (out.size() != batch.queries.size()) {
    throw Error(ErrorCode::SchemaError, "/score returned a misaligned result array");
  }
  return out;
}

std::vector<double> HttpLm::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

std::vector<std::vector<double>> HttpLm::embed_batch(const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  const json request = {{"texts", texts}};
  const json response = parse_response(post("/embed", request.dump()), "/embed");
  std::vector<std::vector<double>> out;
  try {
    out = response.at("vectors").get<std::vector<std::vector<double>>>();
    const auto dim = response.at("dim").get<std::size_t>();
    for (const auto& v : out) {
      if (v.size() != dim) throw Error(ErrorCode::SchemaError, "/embed vector length differs from dim");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bad /embed response: ") + e.what());
  }
  if (out.size() != texts.size()) throw Error(ErrorCode::SchemaError, "/embed returned a misaligned result array");
  return out;
}

std::vector<ScoredToken> HttpLm::topk(std::string_view context, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "topk requires k >= 1");
  const json request = {{"context", std::string(context)}, {"k", k}};
  const json response = parse_response(post("/topk", request.dump()), "/topk");
  std::vector<ScoredToken> out;
  try {
    const auto tokens = response.at("tokens").get<std::vector<std::string>>();
    const auto lps = response.at("logprobs_nats").get<std::vector<double>>();
    if (tokens.size() != lps.size()) throw Error(ErrorCode::SchemaError, "/topk arrays differ in length");
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({tokens[i], lps[i]});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bad /topk response: ") + e.what());
  }
  std::stable_sort(out.begin(), out.end(), [](const ScoredToken& a, const ScoredToken& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token < b.token;
  });
  return out;
}

std::string HttpLm::model_id() const {
  const json response = parse_response(get("/healthz"), "/healthz");
  return response.value("model_id", std::string("unknown"));
}

std::string HttpLm::identity() const { return "http:" + base_url_; }

}  // namespace surpdec
