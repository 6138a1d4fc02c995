#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "surpdec/error.hpp"
#include "surpdec/logspace.hpp"
#include "surpdec/policy.hpp"

using namespace surpdec;

namespace {

CandidateSet two_way(double d = 1.0) {
  CandidateSet s;
  s.item_id = "two";
  s.candidates = {{"x", std::log(0.5), 0, 0, true}, {"w", std::log(0.5), d, 0, false}};
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("reweight two-candidate example") {
  const auto set = two_way();
  const auto dist = reweight(set, {1.0, 0.0});
  CHECK(std::exp(dist.log_probs[0]) == doctest::Approx(0.7310585786).epsilon(1e-9));
  CHECK(std::exp(dist.log_probs[1]) == doctest::Approx(0.2689414214).epsilon(1e-9));
  const auto o = oracle::policy(set.prior_logprobs(), set.distortions(0.0), 1.0);
  CHECK(std::exp(dist.log_probs[0]) == doctest::Approx(static_cast<double>(o.policy[0])).epsilon(1e-12));
  // ln 2 - H(sigmoid(1))
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  const double kl_exact = std::log(2.0) + p * std::log(p) + (1 - p) * std::log(1 - p);
  CHECK(kl_exact == doctest::Approx(0.110942).epsilon(1e-5));
  CHECK(std::abs(shallow_surprisal(dist, set, 0.0) - kl_exact) <= 1e-12);
  CHECK(std::abs(oracle::kl(o.policy, o.prior) - kl_exact) <= 1e-12);
}

TEST_CASE("reweight at lambda 0 is the renormalized prior exactly") {
  CandidateSet s;
  s.candidates = {{"x", -3.0, 0, 0, true}, {"a", -1.0, 2, 0.5, false}, {"b", -7.5, 1, 0.1, false}};
  const auto dist = reweight(s, {0.0, 8.0});
  const auto prior = renormalize(s.prior_logprobs());
  CHECK(dist.log_z == 0.0);
  for (std::size_t i = 0; i < prior.size(); ++i) CHECK(dist.log_probs[i] == prior[i]);
  CHECK(shallow_surprisal(dist, s, 8.0) == 0.0);
  const auto r = decompose(s, {0.0, 8.0}, 0.0);
  CHECK(r.shallow == 0.0);
  CHECK(r.deep == r.veridical);
}

TEST_CASE("large lambda concentrates on the unique zero-distortion candidate") {
  const auto set = two_way();
  const auto dist = reweight(set, {1000.0, 0.0});
  CHECK(std::exp(dist.log_probs[0]) >= 1 - 1e-6);
  CHECK(shallow_surprisal(dist, set, 0.0) == doctest::Approx(veridical_surprisal(set)).epsilon(1e-3));
  const auto r = decompose(set, {1000.0, 0.0}, 0.0);
  CHECK(r.deep == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("logsumexp of policy is zero and renormalized prior is normalized") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto set = oracle::random_set(rng, 2 + t % 50);
    for (double lambda : {0.0, 0.5, 3.0, 100.0}) {
      const auto d = reweight(set, {lambda, 1.0});
      REQUIRE(std::abs(logsumexp(d.log_probs)) < 1e-9);
      REQUIRE(d.log_probs.size() == set.size());
    }
  }
}

TEST_CASE("decomposition properties on random sets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam(0.0, 100.0);
  std::uniform_real_distribution<double> gam(0.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const auto set = oracle::random_set(rng, 2 + t % 120);
    const PolicyParams p{lam(rng), gam(rng)};
    const auto r = decompose(set, p, 0.0);
    REQUIRE(std::abs(r.shallow + r.deep - r.veridical) <= 1e-9);
    REQUIRE(r.shallow >= 0.0);
    REQUIRE(r.deep >= -1e-9);
    REQUIRE(r.shallow <= r.veridical + 1e-9);

    const auto dist = reweight(set, p);
    const auto d = set.distortions(p.gamma);
    const auto o = oracle::policy(set.prior_logprobs(), d, p.lambda);
    REQUIRE(std::abs(shallow_surprisal(dist, d) - oracle::kl(o.policy, o.prior)) <= 1e-9);
    REQUIRE(std::abs(kl_divergence(dist.log_probs, renormalize(set.prior_logprobs())) - oracle::kl(o.policy, o.prior)) <=
            1e-9);
  }
}

TEST_CASE("depth is nondecreasing in lambda") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lam(0.0, 50.0);
  for (int t = 0; t < 300; ++t) {
    const auto set = oracle::random_set(rng, 2 + t % 40);
    double a = lam(rng), b = lam(rng);
    if (a > b) std::swap(a, b);
    REQUIRE(depth_at(set, a, 2.0) <= depth_at(set, b, 2.0) + 1e-10);
  }
}

TEST_CASE("supremum depth and endpoint limits") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto set = oracle::random_set(rng, 2 + t % 30);
    CHECK(depth_at(set, 0.0, 8.0) == 0.0);
    CHECK(supremum_depth(set, 8.0) == doctest::Approx(veridical_surprisal(set)).epsilon(1e-12));
    CHECK(std::abs(depth_at(set, 1e4, 8.0) - veridical_surprisal(set)) <= 1e-3);
  }
}

TEST_CASE("solve_lambda inverts the depth curve") {
  const auto set = two_way();
  CHECK(solve_lambda(set, 0.0, 0.0) == 0.0);
  CHECK(std::abs(solve_lambda(set, depth_at(set, 1.0, 0.0), 0.0) - 1.0) <= 1e-3);
  const double top = veridical_surprisal(set) - 1e-9;
  const double lam = solve_lambda(set, top, 0.0);
  CHECK(std::isfinite(lam));
  CHECK(std::abs(depth_at(set, lam, 0.0) - top) <= 1e-6);
  CHECK(code_of([&] { solve_lambda(set, veridical_surprisal(set) + 1e-3, 0.0); }) == ErrorCode::TargetUnreachable);
  CHECK(code_of([&] { solve_lambda(set, -1.0, 0.0); }) == ErrorCode::InvalidArgument);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto s = oracle::random_set(rng, 2 + t % 60);
    const double target = frac(rng) * veridical_surprisal(s);
    const double l = solve_lambda(s, target, 1.0);
    REQUIRE(std::abs(depth_at(s, l, 1.0) - target) <= 1e-6);
  }
}

TEST_CASE("frontier examples and monotonicity") {
  const auto set = two_way(2.0);
  const std::vector<double> zero{0.0};
  const auto p0 = frontier(set, zero, 0.0);
  REQUIRE(p0.size() == 1);
  CHECK(p0[0].depth == 0.0);
  CHECK(p0[0].expected_distortion == doctest::Approx(1.0));

  const std::vector<double> dup{1.0, 1.0};
  const auto pd = frontier(set, dup, 0.0);
  CHECK(pd[0].depth == pd[1].depth);
  CHECK(pd[0].expected_distortion == pd[1].expected_distortion);

  const std::vector<double> unsorted{1.0, 0.5};
  CHECK(code_of([&] { frontier(set, unsorted, 0.0); }) == ErrorCode::InvalidArgument);

  std::mt19937_64 rng(31);
  const std::vector<double> grid{0, 1, 10, 100};
  for (int t = 0; t < 100; ++t) {
    const auto s = oracle::random_set(rng, 2 + t % 80);
    const auto pts = frontier(s, grid, 8.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto o = oracle::policy(s.prior_logprobs(), s.distortions(8.0), grid[i]);
      REQUIRE(std::abs(pts[i].depth - oracle::kl(o.policy, o.prior)) <= 1e-9);
      REQUIRE(std::abs(pts[i].expected_distortion - oracle::expectation(o.policy, s.distortions(8.0))) <= 1e-9);
      if (i > 0) {
        REQUIRE(pts[i].depth >= pts[i - 1].depth - 1e-10);
        REQUIRE(pts[i].expected_distortion <= pts[i - 1].expected_distortion + 1e-10);
      }
    }
  }
}

TEST_CASE("noisy channel posterior examples and equivalence with the policy at lambda 1") {
  const auto set = two_way();
  const std::vector<double> ll{0.0, -1.0};
  const auto post = noisy_channel_posterior(set, ll);
  CHECK(std::exp(post.log_probs[0]) == doctest::Approx(0.7310585786).epsilon(1e-9));

  const std::vector<double> point{0.0, -std::numeric_limits<double>::infinity()};
  const auto pm = noisy_channel_posterior(set, point);
  CHECK(std::exp(pm.log_probs[0]) == 1.0);

  CandidateSet s3;
  s3.candidates = {{"x", -1.0, 0, 0, true}, {"a", -2.0, 1, 0, false}, {"b", -4.0, 1, 0, false}};
  const std::vector<double> flat{-0.5, -0.5, -0.5};
  const auto pu = noisy_channel_posterior(s3, flat);
  const auto prior = renormalize(s3.prior_logprobs());
  for (std::size_t i = 0; i < 3; ++i) CHECK(pu.log_probs[i] == doctest::Approx(prior[i]).epsilon(1e-12));

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> noise(-20.0, 0.0);
  for (int t = 0; t < 200; ++t) {
    const auto s = oracle::random_set(rng, 2 + t % 50);
    std::vector<double> nl(s.size()), d(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      nl[i] = noise(rng);
      d[i] = -nl[i];
    }
    const auto policy = reweight(s.prior_logprobs(), d, 1.0);
    const auto bayes = oracle::bayes_posterior(s.prior_logprobs(), nl);
    const auto lib = noisy_channel_posterior(s, nl);
    for (std::size_t i = 0; i < s.size(); ++i) {
      REQUIRE(std::abs(std::exp(policy.log_probs[i]) - bayes[i]) <= 1e-9);
      REQUIRE(std::abs(std::exp(lib.log_probs[i]) - bayes[i]) <= 1e-9);
    }
  }
}

TEST_CASE("decompose rejects an unvalidated set whose veridical input is not the distortion minimizer") {
  CandidateSet s;
  s.item_id = "bad";
  s.candidates = {{"x", std::log(0.9), 1, 0, true}, {"w", std::log(0.1), 0, 0, false}};
  CHECK(code_of([&] { decompose(s, {50.0, 8.0}, 0.0); }) == ErrorCode::NegativeDeep);
  // Validation relabels the zero-distance candidate as the veridical one.
  const auto v = validate_candidate_set(s);
  CHECK(v.candidates[v.veridical_index()].text == "w");
  CHECK(decompose(v, {50.0, 8.0}, 0.0).deep >= 0.0);
}

TEST_CASE("renormalize handles priors spanning many nats") {
  const std::vector<double> lp{-1000.0, -1030.0, -1001.0};
  const auto r = renormalize(lp);
  CHECK(std::abs(logsumexp(r)) < 1e-12);
  CHECK(std::isfinite(r[1]));
}
