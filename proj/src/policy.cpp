#include "surpdec/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "surpdec/error.hpp"
#include "surpdec/lm_backend.hpp"
#include "surpdec/logspace.hpp"

namespace surpdec {

namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::InvalidArgument, "distribution and distortion vectors differ in length");
}

}  // namespace

std::vector<double> renormalize(std::span<const double> prior_logprobs) {
  const double norm = logsumexp(prior_logprobs);
  if (!std::isfinite(norm)) throw Error(ErrorCode::NumericalUnderflow, "prior has no finite mass on the support");
  std::vector<double> out(prior_logprobs.begin(), prior_logprobs.end());
  for (auto& lp : out) lp -= norm;
  return out;
}

PolicyDistribution reweight(std::span<const double> prior_logprobs, std::span<const double> distortions,
                            double lambda) {
  check_aligned(prior_logprobs.size(), distortions.size());
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and non-negative");
  }
  PolicyDistribution dist;
  dist.lambda = lambda;
  dist.log_probs = renormalize(prior_logprobs);
  if (lambda == 0.0) return dist;

  for (std::size_t i = 0; i < distortions.size(); ++i) dist.log_probs[i] -= lambda * distortions[i];
  dist.log_z = logsumexp(dist.log_probs);
  if (!std::isfinite(dist.log_z)) {
    throw Error(ErrorCode::NumericalUnderflow, "all tilted candidate weights vanished");
  }
  for (auto& lp : dist.log_probs) lp -= dist.log_z;
  return dist;
}

PolicyDistribution reweight(const CandidateSet& set, const PolicyParams& params) {
  validate_params(params);
  return reweight(set.prior_logprobs(), set.distortions(params.gamma), params.lambda);
}

double expected_distortion(const PolicyDistribution& dist, std::span<const double> distortions) {
  check_aligned(dist.log_probs.size(), distortions.size());
  double e = 0.0;
  for (std::size_t i = 0; i < distortions.size(); ++i) e += std::exp(dist.log_probs[i]) * distortions[i];
  return e;
}

double shallow_surprisal(const PolicyDistribution& dist, std::span<const double> distortions) {
  if (dist.lambda == 0.0) return 0.0;
  const double kl = -dist.log_z - dist.lambda * expected_distortion(dist, distortions);
  return std::max(0.0, kl);
}

double shallow_surprisal(const PolicyDistribution& dist, const CandidateSet& set, double gamma) {
  return shallow_surprisal(dist, set.distortions(gamma));
}

double kl_divergence(std::span<const double> log_p, std::span<const double> log_q) {
  check_aligned(log_p.size(), log_q.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    const double p = std::exp(log_p[i]);
    if (p == 0.0) continue;
    kl += p * (log_p[i] - log_q[i]);
  }
  return kl;
}

double veridical_surprisal(const CandidateSet& set) {
  const auto prior = renormalize(set.prior_logprobs());
  const double lp = prior[set.veridical_index()];
  if (!std::isfinite(lp)) throw Error(ErrorCode::NumericalUnderflow, "veridical candidate has zero prior mass");
  return -lp;
}

double depth_at(const CandidateSet& set, double lambda, double gamma) {
  const auto d = set.distortions(gamma);
  return shallow_surprisal(reweight(set.prior_logprobs(), d, lambda), d);
}

double supremum_depth(const CandidateSet& set, double gamma) {
  const auto d = set.distortions(gamma);
  const auto prior = renormalize(set.prior_logprobs());
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isfinite(prior[i])) d_min = std::min(d_min, d[i]);
  }
  std::vector<double> minimizers;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == d_min) minimizers.push_back(prior[i]);
  }
  return std::max(0.0, -logsumexp(minimizers));
}

DecompositionResult decompose(const CandidateSet& set, const PolicyParams& params, double lm_surprisal) {
  validate_params(params);
  const auto d = set.distortions(params.gamma);
  const auto dist = reweight(set.prior_logprobs(), d, params.lambda);

  DecompositionResult r;
  r.item_id = set.item_id;
  r.params = params;
  r.lm_surprisal = lm_surprisal;
  r.veridical = veridical_surprisal(set);
  r.shallow = shallow_surprisal(dist, d);
  r.deep = r.veridical - r.shallow;
  if (r.deep < -1e-6) {
    throw Error(ErrorCode::NegativeDeep, "deep surprisal " + std::to_string(r.deep) + " for " + set.item_id +
                                             "; the veridical candidate is not the distortion minimizer");
  }
  if (r.deep < 0.0) r.deep = 0.0;
  return r;
}

DecompositionResult decompose(const CandidateSet& set, const PolicyParams& params, const Stimulus& stimulus,
                              const LanguageModel& lm) {
  auto r = decompose(set, params, -lm.logprob(stimulus.target_context(), stimulus.target));
  r.condition = stimulus.condition;
  return r;
}

double solve_lambda(const CandidateSet& set, double target_depth, double gamma) {
  if (!(target_depth >= 0.0) || !std::isfinite(target_depth)) {
    throw Error(ErrorCode::InvalidArgument, "target depth must be finite and non-negative");
  }
  if (target_depth == 0.0) return 0.0;
  const double sup = supremum_depth(set, gamma);
  if (target_depth > sup + kDepthTolerance) {
    throw Error(ErrorCode::TargetUnreachable, "target depth " + std::to_string(target_depth) +
                                                  " exceeds the supremum " + std::to_string(sup));
  }
  auto depth = [&](double lambda) { return depth_at(set, lambda, gamma); };

  const double lambda_cap = std::ldexp(1.0, 60);
  double hi = 1.0;
  double d_hi = depth(hi);
  while (d_hi < target_depth && hi < lambda_cap) {
    hi *= 2.0;
    d_hi = depth(hi);
  }
  if (std::abs(d_hi - target_depth) <= kDepthTolerance) return hi;
  if (d_hi < target_depth) {
    throw Error(ErrorCode::TargetUnreachable, "depth saturates below the target " + std::to_string(target_depth));
  }
  double lo = 0.0;
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d_mid = depth(mid);
    if (std::abs(d_mid - target_depth) <= kDepthTolerance) return mid;
    if (d_mid < target_depth) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Error(ErrorCode::IterationLimit, "bisection did not reach the depth tolerance");
}

std::vector<FrontierPoint> frontier(const CandidateSet& set, std::span<const double> lambdas, double gamma) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || (i > 0 && lambdas[i] < lambdas[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "frontier lambdas must be non-negative and ascending");
    }
  }
  const auto prior = set.prior_logprobs();
  const auto d = set.distortions(gamma);
  std::vector<FrontierPoint> points;
  points.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const auto dist = reweight(prior, d, lambda);
    points.push_back({shallow_surprisal(dist, d), expected_distortion(dist, d), lambda});
  }
  return points;
}

PolicyDistribution noisy_channel_posterior(const CandidateSet& set, std::span<const double> noise_loglik) {
  check_aligned(set.size(), noise_loglik.size());
  const auto prior = renormalize(set.prior_logprobs());
  std::vector<double> joint(prior.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (std::isnan(noise_loglik[i]) || noise_loglik[i] == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::InvalidArgument, "channel log-likelihood must be a number below +inf");
    }
    joint[i] = prior[i] + noise_loglik[i];
    shift = std::max(shift, joint[i]);
  }
  if (!std::isfinite(shift)) throw Error(ErrorCode::NumericalUnderflow, "channel assigns zero evidence");
  double evidence = 0.0;
  for (double j : joint) evidence += std::exp(j - shift);
  PolicyDistribution post;
  post.lambda = 1.0;
  post.log_z = shift + std::log(evidence);
  post.log_probs.reserve(joint.size());
  for (double j : joint) post.log_probs.push_back(std::log(std::exp(j - shift) / evidence));
  return post;
}

}  // namespace surpdec
