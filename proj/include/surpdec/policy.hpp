#pragma once

#include <span>
#include <vector>

#include "surpdec/types.hpp"

namespace surpdec {

class LanguageModel;

/// Prior log-probabilities renormalized over the finite candidate support.
std::vector<double> renormalize(std::span<const double> prior_logprobs);

/// Optimal policy p_lambda(w) proportional to p0(w) exp(-lambda d(w)), with the
/// prior renormalized over the support first. lambda = 0 returns the
/// renormalized prior exactly (log_z = 0).
PolicyDistribution reweight(std::span<const double> prior_logprobs, std::span<const double> distortions,
                            double lambda);
PolicyDistribution reweight(const CandidateSet& set, const PolicyParams& params);

double expected_distortion(const PolicyDistribution& dist, std::span<const double> distortions);

/// Closed form of the policy's KL from the prior: -ln Z - lambda E[d].
double shallow_surprisal(const PolicyDistribution& dist, std::span<const double> distortions);
double shallow_surprisal(const PolicyDistribution& dist, const CandidateSet& set, double gamma);

/// Direct sum of p ln(p / q) over the support; terms with p = 0 contribute 0.
double kl_divergence(std::span<const double> log_p, std::span<const double> log_q);

/// -ln of the veridical candidate's renormalized prior.
double veridical_surprisal(const CandidateSet& set);

/// Processing depth reached at `lambda`.
double depth_at(const CandidateSet& set, double lambda, double gamma);

/// Limit of depth_at as lambda grows: -ln of the prior mass on the minimum-distortion candidates.
double supremum_depth(const CandidateSet& set, double gamma);

/// A/B decomposition with a caller-supplied raw LM surprisal.
DecompositionResult decompose(const CandidateSet& set, const PolicyParams& params, double lm_surprisal);
/// Same, scoring the raw surprisal of the stimulus target with `lm`.
DecompositionResult decompose(const CandidateSet& set, const PolicyParams& params, const Stimulus& stimulus,
                              const LanguageModel& lm);

inline constexpr double kDepthTolerance = 1e-6;
inline constexpr int kBisectionIterations = 200;

/// lambda >= 0 with depth_at(lambda) within 1e-6 of `target_depth`, found by
/// bisection on the monotone depth curve. Throws TargetUnreachable / IterationLimit.
double solve_lambda(const CandidateSet& set, double target_depth, double gamma);

/// One (depth, expected distortion) point per lambda; `lambdas` must be ascending.
std::vector<FrontierPoint> frontier(const CandidateSet& set, std::span<const double> lambdas, double gamma);

/// Bayes posterior over the candidates for a channel likelihood ln p_N(x | w).
PolicyDistribution noisy_channel_posterior(const CandidateSet& set, std::span<const double> noise_loglik);

}  // namespace surpdec
