#include "surpdec/types.hpp"

#include <cmath>
#include <unordered_map>

#include "surpdec/error.hpp"

namespace surpdec {

std::string Stimulus::sentence() const {
  if (context.empty()) return continuation;
  if (continuation.empty()) return context;
  return context + " " + continuation;
}

std::string Stimulus::target_context() const {
  std::string full = sentence();
  std::string prefix = full.substr(0, full.size() - target.size());
  while (!prefix.empty() && prefix.back() == ' ') prefix.pop_back();
  return prefix;
}

void validate_stimulus(const Stimulus& s) {
  if (s.item_id.empty()) throw Error(ErrorCode::SchemaError, "stimulus without item_id");
  if (s.continuation.empty()) throw Error(ErrorCode::SchemaError, "empty continuation for " + s.item_id);
  if (s.target.empty() || s.target.size() > s.continuation.size() ||
      s.continuation.compare(s.continuation.size() - s.target.size(), s.target.size(), s.target) != 0) {
    throw Error(ErrorCode::SchemaError, "target is not a suffix of the continuation for " + s.item_id);
  }
  if (s.is_control == s.control_item_id.has_value()) {
    throw Error(ErrorCode::SchemaError,
                "control_item_id must be present exactly for non-control items (" + s.item_id + ")");
  }
}

const char* generator_name(Generator g) noexcept {
  switch (g) {
    case Generator::External: return "external";
    case Generator::ControlCounterpart: return "counterpart";
    case Generator::MultipleSampler: return "sampler";
  }
  return "external";
}

Generator parse_generator(std::string_view name) {
  if (name == "external") return Generator::External;
  if (name == "counterpart") return Generator::ControlCounterpart;
  if (name == "sampler") return Generator::MultipleSampler;
  throw Error(ErrorCode::InvalidArgument, "unknown generator '" + std::string(name) + "'");
}

std::size_t CandidateSet::veridical_index() const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].is_veridical) return i;
  }
  throw Error(ErrorCode::MissingVeridical, "candidate set " + item_id + " has no veridical candidate");
}

std::vector<double> CandidateSet::prior_logprobs() const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.prior_logprob);
  return out;
}

std::vector<double> CandidateSet::distortions(double gamma) const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.distortion(gamma));
  return out;
}

CandidateSet validate_candidate_set(CandidateSet set) {
  std::vector<Candidate> merged;
  std::unordered_map<std::string, std::size_t> seen;
  for (auto& c : set.candidates) {
    if (!std::isfinite(c.form_distance) || c.form_distance < 0.0 || !(c.semantic_distance >= 0.0) ||
        !(c.semantic_distance <= 2.0)) {
      throw Error(ErrorCode::SchemaError, "distance out of range for candidate '" + c.text + "'");
    }
    if (std::isnan(c.prior_logprob) || (c.prior_logprob > 0.0 && std::isinf(c.prior_logprob))) {
      throw Error(ErrorCode::SchemaError, "invalid prior log-probability for candidate '" + c.text + "'");
    }
    auto [it, inserted] = seen.emplace(c.text, merged.size());
    if (inserted) {
      merged.push_back(std::move(c));
      continue;
    }
    Candidate& kept = merged[it->second];
    if (c.prior_logprob > kept.prior_logprob) kept.prior_logprob = c.prior_logprob;
  }

  std::optional<std::size_t> veridical;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged[i].is_veridical = false;
    if (merged[i].form_distance != 0.0) continue;
    if (veridical) {
      throw Error(ErrorCode::SchemaError,
                  "candidate set " + set.item_id + " has several zero-distance candidates");
    }
    veridical = i;
  }
  if (!veridical) {
    throw Error(ErrorCode::MissingVeridical, "candidate set " + set.item_id + " lacks the veridical input");
  }
  merged[*veridical].is_veridical = true;
  merged[*veridical].semantic_distance = 0.0;
  if (merged.size() < 2) {
    throw Error(ErrorCode::EmptySet, "candidate set " + set.item_id + " has fewer than 2 candidates");
  }
  set.candidates = std::move(merged);
  return set;
}

void validate_params(const PolicyParams& p) {
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a finite non-negative number");
  }
  if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must be a finite non-negative number");
  }
}

ErpPrediction predict_erp(const DecompositionResult& r, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ERP scale factors must be positive");
  }
  return {alpha * r.shallow, beta * r.deep, alpha, beta};
}

}  // namespace surpdec
