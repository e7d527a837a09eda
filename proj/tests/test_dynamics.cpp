#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "prefgame/dynamics.hpp"
#include "prefgame/generators.hpp"
#include "prefgame/losses.hpp"
#include "prefgame/solvers.hpp"
#include "testutil.hpp"

using namespace prefgame;
using dynamics::AlgorithmId;
using dynamics::ScoreKind;

namespace {

GameSpec flat_game(int n, double tau) {
  std::vector<std::vector<double>> e(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n), 0.5));
  return GameSpec(PreferenceMatrix(std::move(e)), Policy::uniform(n), tau);
}

std::vector<double> kernel_expectation(const GameSpec& spec,
                                       const PolicyLogits& logits, double beta,
                                       const Policy& weights, ScoreKind score) {
  std::vector<double> acc(static_cast<size_t>(spec.size()), 0.0);
  for (int y = 0; y < spec.size(); ++y) {
    if (weights[y] == 0.0) continue;
    const auto g = dynamics::gradient_kernel_g(spec, logits, beta, y, false, score);
    for (int z = 0; z < spec.size(); ++z)
      acc[static_cast<size_t>(z)] += weights[y] * g[static_cast<size_t>(z)];
  }
  return acc;
}

}  // namespace

TEST_CASE("update kernel basics") {
  SUBCASE("flat game at the reference: centred kernel vanishes pointwise") {
    const GameSpec game = flat_game(3, 0.4);
    const PolicyLogits logits = PolicyLogits::from_policy(game.ref_policy);
    for (int y = 0; y < 3; ++y) {
      const auto g = dynamics::gradient_kernel_g(game, logits, 0.5, y, true);
      CHECK(l2_norm(g) <= 1e-14);
    }
  }

  SUBCASE("kernel direction is the softmax score") {
    Rng rng(107);
    const GameSpec game = random_game(4, 0.8, rng);
    const PolicyLogits logits = random_logits(4, rng);
    const Policy pi = softmax(logits);
    std::vector<double> u = log_softmax(logits);
    for (int i = 0; i < 4; ++i)
      u[static_cast<size_t>(i)] -= std::log(game.ref_policy[i]);
    const Policy mix = geometric_mixture(pi, game.ref_policy, 0.3);
    for (int y = 0; y < 4; ++y) {
      const auto g = dynamics::gradient_kernel_g(game, logits, 0.3, y);
      const double scalar = preference_vs_policy(game.prefs, y, mix) -
                            game.tau * u[static_cast<size_t>(y)];
      for (int z = 0; z < 4; ++z) {
        const double score = ((z == y) ? 1.0 : 0.0) - pi[z];
        CHECK(g[static_cast<size_t>(z)] ==
              doctest::Approx(score * scalar).epsilon(1e-13));
      }
    }
  }

  SUBCASE("centred and uncentred kernels share their expectation") {
    Rng rng(109);
    for (int t = 0; t < 10; ++t) {
      const GameSpec game = random_game(3, 1.1, rng);
      const PolicyLogits logits = random_logits(3, rng);
      const Policy pi = softmax(logits);
      std::vector<double> centred(3, 0.0);
      std::vector<double> plain(3, 0.0);
      for (int y = 0; y < 3; ++y) {
        const auto gc = dynamics::gradient_kernel_g(game, logits, 0.25, y, true);
        const auto gu = dynamics::gradient_kernel_g(game, logits, 0.25, y, false);
        for (int z = 0; z < 3; ++z) {
          centred[static_cast<size_t>(z)] += pi[y] * gc[static_cast<size_t>(z)];
          plain[static_cast<size_t>(z)] += pi[y] * gu[static_cast<size_t>(z)];
        }
      }
      CHECK(testutil::max_abs_diff(centred, plain) <= 1e-14);
    }
  }

  SUBCASE("at zero mixing the policy-weighted kernel is tau/2 times the "
          "online squared-loss update") {
    Rng rng(113);
    for (int t = 0; t < 10; ++t) {
      const GameSpec game = random_game(4, 0.7 + rng.next_double(), rng);
      const PolicyLogits logits = random_logits(4, rng);
      const Policy pi = softmax(logits);
      const auto assembled = kernel_expectation(game, logits, 0.0, pi, ScoreKind::kPolicy);
      auto update = dynamics::expected_update(AlgorithmId::online_ipo(), game, logits);
      for (double& x : update) x *= game.tau / 2.0;
      CHECK(testutil::rel_error(assembled, update) <= 1e-10);
    }
  }
}

TEST_CASE("score expectations under the mixture") {
  // The mixture's own score has exactly zero mean under the mixture; the
  // policy score does not: its mixture expectation is pi' - pi.
  Rng rng(127);
  for (int t = 0; t < 10; ++t) {
    const GameSpec game = random_game(4, 1.0, rng);
    const PolicyLogits logits = random_logits(4, rng);
    const Policy pi = softmax(logits);
    const double beta = 0.5;
    const Policy mix = geometric_mixture(pi, game.ref_policy, beta);

    std::vector<double> policy_score_mean(4, 0.0);
    std::vector<double> mixture_score_mean(4, 0.0);
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z) {
        policy_score_mean[static_cast<size_t>(z)] +=
            mix[y] * (((z == y) ? 1.0 : 0.0) - pi[z]);
        mixture_score_mean[static_cast<size_t>(z)] +=
            mix[y] * (((z == y) ? 1.0 : 0.0) - mix[z]);
      }
    CHECK(l2_norm(mixture_score_mean) <= 1e-14);
    std::vector<double> gap(4);
    for (int z = 0; z < 4; ++z) gap[static_cast<size_t>(z)] = mix[z] - pi[z];
    CHECK(testutil::max_abs_diff(policy_score_mean, gap) <= 1e-14);
  }
}

TEST_CASE("mixture-loss gradient and the kernel assembly") {
  Rng rng(131);
  for (int t = 0; t < 10; ++t) {
    const GameSpec game = random_game(4, 0.5 + 2.0 * rng.next_double(), rng);
    const PolicyLogits logits = random_logits(4, rng);
    const Policy pi = softmax(logits);
    const double beta = 0.125 + 0.75 * rng.next_double();
    const Policy mix = geometric_mixture(pi, game.ref_policy, beta);

    // the assembled update equals the loss-differentiation route
    const auto update = dynamics::expected_update(AlgorithmId::ipo_md(beta), game, logits);
    auto loss_route = losses::population_gradient(
        losses::LossId::kIpo, logits, game,
        losses::SamplingScheme::geometric_mixture(beta));
    for (double& x : loss_route) x *= -0.5;
    CHECK(testutil::rel_error(update, loss_route) <= 1e-10);

    // and equals the mixture-score kernel expectation
    auto assembled = kernel_expectation(game, logits, beta, mix, ScoreKind::kMixture);
    for (double& x : assembled) x *= 2.0 / game.tau;
    CHECK(testutil::rel_error(update, assembled) <= 1e-10);

    // the policy-score assembly differs by exactly
    // (2/tau) * (1/2 - tau * ubar) * (pi - pi'), with ubar the mixture
    // expectation of log(pi/ref)
    auto policy_assembled = kernel_expectation(game, logits, beta, mix, ScoreKind::kPolicy);
    for (double& x : policy_assembled) x *= 2.0 / game.tau;
    std::vector<double> u = log_softmax(logits);
    for (int i = 0; i < 4; ++i)
      u[static_cast<size_t>(i)] -= std::log(game.ref_policy[i]);
    double ubar = 0.0;
    for (int y = 0; y < 4; ++y) ubar += mix[y] * u[static_cast<size_t>(y)];
    std::vector<double> predicted = update;
    for (int z = 0; z < 4; ++z)
      predicted[static_cast<size_t>(z)] -=
          (2.0 / game.tau) * (0.5 - game.tau * ubar) * (pi[z] - mix[z]);
    CHECK(testutil::max_abs_diff(policy_assembled, predicted) <= 1e-12);
  }
}

TEST_CASE("expected update directions") {
  SUBCASE("online squared loss is collinear with self play, ratio 2/tau") {
    Rng rng(137);
    for (double tau : {0.1, 0.5, 1.0, 5.0, 10.0}) {
      for (int t = 0; t < 5; ++t) {
        GameSpec game = random_game(3 + static_cast<int>(rng.next_u64() % 3), tau, rng);
        const PolicyLogits logits = random_logits(game.size(), rng);
        const auto ipo = dynamics::expected_update(AlgorithmId::online_ipo(), game, logits);
        const auto sp = dynamics::expected_update(AlgorithmId::self_play(), game, logits);
        CHECK(1.0 - testutil::cosine(ipo, sp) <= 1e-10);
        CHECK(std::abs(l2_norm(ipo) / l2_norm(sp) * tau / 2.0 - 1.0) <= 1e-8);
      }
    }
  }

  SUBCASE("mixture-sampled policy gradient equals its kernel expectation "
          "under the policy") {
    Rng rng(139);
    for (double beta : {0.125, 0.5}) {
      const GameSpec game = random_game(4, 0.9, rng);
      const PolicyLogits logits = random_logits(4, rng);
      const auto update =
          dynamics::expected_update(AlgorithmId::nash_md_pg(beta), game, logits);
      const auto assembled =
          kernel_expectation(game, logits, beta, softmax(logits), ScoreKind::kPolicy);
      CHECK(testutil::rel_error(update, assembled) <= 1e-12);
    }
  }

  SUBCASE("online squared loss is stationary at the solved equilibrium") {
    const GameSpec game = example_game_3x3();
    const auto nash = solvers::solve_regularised_nash(game, 5e-14);
    const PolicyLogits at = PolicyLogits::from_policy(nash.policy);
    CHECK(l2_norm(dynamics::expected_update(AlgorithmId::online_ipo(), game, at)) <=
          1e-8);
  }

  SUBCASE("regularised policy gradient is stationary at the tilted closed form") {
    Rng rng(149);
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 4);
      const GameSpec game = random_game(n, 0.4 + rng.next_double(), rng);
      const std::vector<double> reward = random_reward_vector(n, rng, 1.2);
      const Policy star = solvers::rlhf_closed_form(game.ref_policy, game.tau, reward);
      const PolicyLogits at = PolicyLogits::from_policy(star);
      CHECK(l2_norm(dynamics::expected_update(AlgorithmId::rlhf_pg(reward), game, at)) <=
            1e-8);
    }
  }

  SUBCASE("offline squared loss is stationary at the best response") {
    Rng rng(151);
    const GameSpec game = random_game(4, 0.8, rng);
    const Policy mu = random_interior_policy(4, rng);
    const Policy br = solvers::best_response(game, mu);
    const PolicyLogits at = PolicyLogits::from_policy(br);
    CHECK(l2_norm(dynamics::expected_update(AlgorithmId::offline_ipo(mu), game, at)) <=
          1e-9);
  }

  SUBCASE("both mixture dynamics are stationary at the shared fixed point") {
    const GameSpec game = example_game_3x3();
    for (double beta : {0.25, 0.5}) {
      const auto fp = solvers::solve_ipo_md_fixed_point(game, beta, 5e-14);
      const PolicyLogits at = PolicyLogits::from_policy(fp.policy);
      CHECK(l2_norm(dynamics::expected_update(AlgorithmId::ipo_md(beta), game, at)) <=
            1e-8);
      CHECK(l2_norm(dynamics::expected_update(AlgorithmId::nash_md_pg(beta), game, at)) <=
            1e-8);
    }
  }
}

TEST_CASE("stochastic updates") {
  Rng game_rng(157);
  const GameSpec game = random_game(3, 0.9, game_rng);
  const PolicyLogits logits = random_logits(3, game_rng);

  SUBCASE("identical seeds give bit-identical updates") {
    for (const AlgorithmId& algo :
         {AlgorithmId::online_ipo(), AlgorithmId::nash_md_pg(0.5),
          AlgorithmId::rlhf_pg({0.3, -0.2, 0.1})}) {
      Rng r1(999);
      Rng r2(999);
      const auto a = dynamics::stochastic_update(algo, game, logits, 32, r1);
      const auto b = dynamics::stochastic_update(algo, game, logits, 32, r2);
      CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    }
  }

  SUBCASE("outcome distribution mean equals the expected update") {
    Rng rng(163);
    std::vector<AlgorithmId> algos = {
        AlgorithmId::online_ipo(),      AlgorithmId::ipo_md(0.25),
        AlgorithmId::offline_ipo(random_interior_policy(3, rng)),
        AlgorithmId::nash_md_pg(0.25),  AlgorithmId::self_play(),
        AlgorithmId::online_dpo(),      AlgorithmId::online_slic(),
        AlgorithmId::rlhf_pg(random_reward_vector(3, rng))};
    for (const AlgorithmId& algo : algos) {
      const auto dist = dynamics::stochastic_outcome_distribution(algo, game, logits);
      double mass = 0.0;
      for (double p : dist.probabilities) mass += p;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(testutil::max_abs_diff(
                dist.mean(), dynamics::expected_update(algo, game, logits)) <= 1e-12);
    }
  }

  SUBCASE("expected-label weighting keeps the mean and kills label noise") {
    AlgorithmId weighted = AlgorithmId::online_ipo();
    weighted.expected_label = true;
    const auto plain =
        dynamics::stochastic_outcome_distribution(AlgorithmId::online_ipo(), game, logits);
    const auto smooth = dynamics::stochastic_outcome_distribution(weighted, game, logits);
    CHECK(testutil::max_abs_diff(plain.mean(), smooth.mean()) <= 1e-12);
    CHECK(smooth.total_variance() <= plain.total_variance() + 1e-15);
  }

  SUBCASE("point-mass sampling collapses to the self pair") {
    const GameSpec two(validate_preference_matrix({{0.5, 1.0}, {0.0, 0.5}}),
                       Policy::uniform(2), 1.0);
    AlgorithmId offline = AlgorithmId::offline_ipo(Policy::point_mass(2, 0));
    // every draw is the pair (0, 0), whose gradient is exactly zero
    const PolicyLogits at({0.2, -0.2});
    Rng rng(167);
    const auto update = dynamics::stochastic_update(offline, two, at, 8, rng);
    CHECK(l2_norm(update) == 0.0);
    const auto dist = dynamics::stochastic_outcome_distribution(offline, two, at);
    for (const auto& outcome : dist.updates) CHECK(l2_norm(outcome) == 0.0);
  }

  SUBCASE("deterministic preferences leave no label randomness") {
    const GameSpec two(validate_preference_matrix({{0.5, 1.0}, {0.0, 0.5}}),
                       Policy::uniform(2), 1.0);
    const PolicyLogits at({0.2, -0.2});
    const auto dist = dynamics::stochastic_outcome_distribution(
        AlgorithmId::online_ipo(), two, at);
    // self pairs carry two zero-probability-free outcomes each; the mixed
    // pairs appear once per draw order because the losing label has
    // probability zero
    REQUIRE(dist.updates.size() == 6);
    const LabelledPair pair{0, 1};
    std::vector<double> expected(2, 0.0);
    {
      // -1/2 d/dphi of the squared pair loss via finite differences
      const auto fd = losses::finite_difference_gradient(
          [&](const PolicyLogits& phi) {
            return -0.5 * losses::pair_loss(losses::LossId::kIpo, phi,
                                            two.ref_policy, two.tau, pair);
          },
          at, 1e-6);
      expected = fd;
    }
    bool found = false;
    for (const auto& outcome : dist.updates)
      if (l2_norm(outcome) > 0.0 && testutil::max_abs_diff(outcome, expected) < 1e-8)
        found = true;
    CHECK(found);
  }

  SUBCASE("sampled outcomes follow the enumerated distribution") {
    // merge outcomes with identical update vectors (self pairs all produce
    // the zero update), then compare draw frequencies per merged bucket
    const auto dist = dynamics::stochastic_outcome_distribution(
        AlgorithmId::online_ipo(), game, logits);
    std::vector<std::vector<double>> buckets;
    std::vector<double> bucket_prob;
    for (size_t k = 0; k < dist.updates.size(); ++k) {
      bool merged = false;
      for (size_t b = 0; b < buckets.size() && !merged; ++b)
        if (testutil::max_abs_diff(dist.updates[k], buckets[b]) < 1e-12) {
          bucket_prob[b] += dist.probabilities[k];
          merged = true;
        }
      if (!merged) {
        buckets.push_back(dist.updates[k]);
        bucket_prob.push_back(dist.probabilities[k]);
      }
    }
    Rng rng(401);
    const long draws = 100000;
    std::vector<long> counts(buckets.size(), 0);
    long matched = 0;
    for (long t = 0; t < draws; ++t) {
      const auto u = dynamics::stochastic_update(AlgorithmId::online_ipo(), game,
                                                 logits, 1, rng);
      for (size_t b = 0; b < buckets.size(); ++b)
        if (testutil::max_abs_diff(u, buckets[b]) < 1e-12) {
          ++counts[b];
          ++matched;
          break;
        }
    }
    CHECK(matched == draws);
    for (size_t b = 0; b < buckets.size(); ++b) {
      const double p = bucket_prob[b];
      const double rate = static_cast<double>(counts[b]) / static_cast<double>(draws);
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
      CHECK(std::abs(rate - p) <= 4.0 * sigma + 1e-6);
    }
  }

  SUBCASE("sample mean approaches the expected update") {
    Rng rng(173);
    const auto expected =
        dynamics::expected_update(AlgorithmId::online_dpo(), game, logits);
    const auto dist = dynamics::stochastic_outcome_distribution(
        AlgorithmId::online_dpo(), game, logits);
    const long draws = 20000;
    std::vector<double> mean(3, 0.0);
    for (long t = 0; t < draws; ++t) {
      const auto u = dynamics::stochastic_update(AlgorithmId::online_dpo(), game,
                                                 logits, 1, rng);
      for (int i = 0; i < 3; ++i) mean[static_cast<size_t>(i)] += u[static_cast<size_t>(i)];
    }
    for (double& x : mean) x /= static_cast<double>(draws);
    std::vector<double> gap(3);
    for (int i = 0; i < 3; ++i)
      gap[static_cast<size_t>(i)] = mean[static_cast<size_t>(i)] - expected[static_cast<size_t>(i)];
    const double sigma = std::sqrt(dist.total_variance() / static_cast<double>(draws));
    CHECK(l2_norm(gap) <= 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("trajectory runner") {
  SUBCASE("flat preferences stay at the reference") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::online_ipo();
    config.spec = flat_game(3, 0.5);
    config.steps = 50;
    config.record_every = 10;
    const auto traj = dynamics::run_dynamics(config);
    CHECK_FALSE(traj.diverged);
    CHECK(traj.converged);
    for (const auto& rec : traj.records) {
      CHECK(total_variation(rec.policy, config.spec.ref_policy) <= 1e-13);
      CHECK(rec.grad_norm <= 1e-13);
    }
  }

  SUBCASE("records are strictly increasing and include endpoints") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::online_ipo();
    config.spec = example_game_3x3(1.0);
    config.steps = 25;
    config.record_every = 10;
    const auto traj = dynamics::run_dynamics(config);
    REQUIRE(traj.records.size() == 4);  // 0, 10, 20, 25
    CHECK(traj.records.front().step == 0);
    CHECK(traj.records.back().step == 25);
    for (size_t i = 1; i < traj.records.size(); ++i)
      CHECK(traj.records[i].step > traj.records[i - 1].step);
  }

  SUBCASE("example game converges to the equilibrium") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::online_ipo();
    config.spec = example_game_3x3();
    config.learning_rate = 0.1;
    config.steps = 100000;
    config.record_every = 10000;
    config.tolerance = 1e-4;
    const auto traj = dynamics::run_dynamics(config);
    CHECK_FALSE(traj.diverged);
    CHECK(traj.converged);
    CHECK(traj.final_residual <= 1e-4);
  }

  SUBCASE("full mixing converges to the best response to the reference") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::ipo_md(1.0);
    config.spec = example_game_3x3();
    config.learning_rate = 0.1;
    config.steps = 100000;
    config.record_every = 10000;
    config.tolerance = 1e-6;
    const auto traj = dynamics::run_dynamics(config);
    CHECK(traj.converged);
    const Policy br = solvers::best_response(config.spec, config.spec.ref_policy);
    CHECK(total_variation(traj.final_policy, br) <= 1e-6);
  }

  SUBCASE("overflowing updates are flagged as divergence") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::rlhf_pg({1e308, 0.0, 0.0});
    config.spec = example_game_3x3(1.0);
    config.learning_rate = 1e10;
    config.steps = 50;
    const auto traj = dynamics::run_dynamics(config);
    CHECK(traj.diverged);
    CHECK_FALSE(traj.converged);
    CHECK(traj.steps_run < 50);
  }

  SUBCASE("stochastic trajectories are seed-reproducible") {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::online_ipo();
    config.spec = example_game_3x3(1.0);
    config.mode = dynamics::DynamicsConfig::Mode::kStochastic;
    config.batch_size = 4;
    config.steps = 200;
    config.record_every = 50;
    config.seed = 4242;
    const auto a = dynamics::run_dynamics(config);
    const auto b = dynamics::run_dynamics(config);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i)
      CHECK(testutil::max_abs_diff(a.records[i].policy.probs(),
                                   b.records[i].policy.probs()) == 0.0);
  }
}
