#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prefgame/generators.hpp"
#include "prefgame/solvers.hpp"
#include "testutil.hpp"

using namespace prefgame;

namespace {

GameSpec flat_game(int n, double tau) {
  std::vector<std::vector<double>> e(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n), 0.5));
  return GameSpec(PreferenceMatrix(std::move(e)), Policy::uniform(n), tau);
}

}  // namespace

TEST_CASE("best response") {
  SUBCASE("flat preferences return the reference") {
    Rng rng(83);
    const GameSpec game = flat_game(3, 0.7);
    const Policy mu = random_interior_policy(3, rng);
    CHECK(total_variation(solvers::best_response(game, mu), game.ref_policy) <=
          1e-14);
  }

  SUBCASE("example game against uniform") {
    const GameSpec game = example_game_3x3();
    const Policy br = solvers::best_response(game, Policy::uniform(3));
    CHECK(br[0] == doctest::Approx(0.2945).epsilon(4e-4));
    CHECK(br[1] == doctest::Approx(0.2945).epsilon(4e-4));
    CHECK(br[2] == doctest::Approx(0.4110).epsilon(4e-4));
  }

  SUBCASE("small temperature concentrates on the best action") {
    const GameSpec game = example_game_3x3(1e-3);
    const Policy br = solvers::best_response(game, Policy::uniform(3));
    CHECK(br[2] >= 0.99);
  }
}

TEST_CASE("tilted closed form") {
  SUBCASE("constant reward returns the reference") {
    const Policy ref({0.2, 0.3, 0.5});
    const Policy out = solvers::rlhf_closed_form(ref, 0.8, {1.4, 1.4, 1.4});
    CHECK(total_variation(out, ref) <= 1e-14);
  }

  SUBCASE("two actions with a log 3 gap") {
    const Policy out =
        solvers::rlhf_closed_form(Policy::uniform(2), 1.0, {std::log(3.0), 0.0});
    CHECK(out[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-14));
  }

  SUBCASE("maximises the regularised objective") {
    Rng rng(89);
    const int n = 4;
    const Policy ref = random_interior_policy(n, rng);
    const std::vector<double> reward = random_reward_vector(n, rng, 1.5);
    const double tau = 0.6;
    const Policy star = solvers::rlhf_closed_form(ref, tau, reward);
    auto objective = [&](const Policy& pi) {
      double expected = 0.0;
      for (int y = 0; y < n; ++y) expected += pi[y] * reward[static_cast<size_t>(y)];
      return expected - tau * kl_divergence(pi, ref);
    };
    const double best = objective(star);
    for (int t = 0; t < 100; ++t)
      CHECK(best >= objective(random_interior_policy(n, rng)) - 1e-12);
  }
}

TEST_CASE("regularised equilibrium solver") {
  SUBCASE("flat preferences: the reference is the equilibrium") {
    const GameSpec game = flat_game(4, 0.5);
    const auto report = solvers::solve_regularised_nash(game);
    CHECK(report.converged);
    CHECK(report.residual <= 1e-12);
    CHECK(total_variation(report.policy, game.ref_policy) <= 1e-12);
  }

  SUBCASE("two-action analytic value") {
    const GameSpec game(validate_preference_matrix({{0.5, 0.9}, {0.1, 0.5}}),
                        Policy::uniform(2), 1.0);
    const auto report = solvers::solve_regularised_nash(game, 1e-13);
    CHECK(report.converged);
    CHECK(std::abs(report.policy[0] - sigmoid(0.4)) <= 1e-9);
  }

  SUBCASE("cyclic deterministic game: uniform equilibrium") {
    const GameSpec game(rock_paper_scissors_matrix(), Policy::uniform(3), 0.7);
    const auto report = solvers::solve_regularised_nash(game);
    CHECK(report.converged);
    for (int y = 0; y < 3; ++y)
      CHECK(report.policy[y] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    for (int y = 0; y < 3; ++y)
      CHECK(preference_vs_policy(game.prefs, y, report.policy) ==
            doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("random games: residual, exploitability, damping agreement") {
    Rng rng(97);
    for (int t = 0; t < 20; ++t) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 5);
      const double tau = 0.25 * std::exp(rng.next_double() * std::log(16.0));
      const GameSpec game = random_game(n, tau, rng);
      const auto half = solvers::solve_regularised_nash(game, 1e-12, 1000000, 0.5);
      const auto full = solvers::solve_regularised_nash(game, 1e-12, 1000000, 1.0);
      CHECK(half.converged);
      CHECK(full.converged);
      CHECK(half.residual <= 1e-12);
      CHECK(solvers::exploitability(game, half.policy) <= 1e-11);
      CHECK(total_variation(half.policy, full.policy) <= 1e-9);
    }
  }

  SUBCASE("agreement from random initialisations") {
    Rng rng(101);
    const GameSpec game = random_game(4, 0.4, rng);
    const auto base = solvers::solve_regularised_nash(game);
    for (int t = 0; t < 10; ++t) {
      const auto other = solvers::solve_regularised_nash(
          game, 1e-12, 1000000, 0.5, random_interior_policy(4, rng));
      CHECK(other.converged);
      CHECK(total_variation(base.policy, other.policy) <= 1e-9);
    }
  }

  SUBCASE("iteration budget exhaustion is reported, not thrown") {
    const GameSpec game = example_game_3x3(0.05);
    const auto report = solvers::solve_regularised_nash(game, 1e-13, 3);
    CHECK_FALSE(report.converged);
    CHECK(report.iterations == 3);
  }

  SUBCASE("small temperatures converge through the continuation fallback") {
    // the plain damped map is expansive here (its local expansion scales
    // with 1/tau), so these rely on the Newton polish
    for (double tau : {0.02, 0.005, 0.001}) {
      const GameSpec game = example_game_3x3(tau);
      const auto report = solvers::solve_regularised_nash(game, 1e-12);
      CHECK(report.converged);
      CHECK(report.residual <= 1e-12);
      CHECK(solvers::exploitability(game, report.policy) <= 1e-10);
    }
    Rng rng(271);
    for (int t = 0; t < 10; ++t) {
      const double tau = 0.001 * std::exp(rng.next_double() * std::log(50.0));
      const GameSpec game = random_game(3 + static_cast<int>(rng.next_u64() % 3),
                                        tau, rng);
      const auto report = solvers::solve_regularised_nash(game, 1e-12);
      CHECK(report.converged);
      CHECK(solvers::exploitability(game, report.policy) <= 1e-10);
    }
  }

  SUBCASE("small-temperature fixed points agree from random starts") {
    Rng rng(277);
    const GameSpec game = example_game_3x3(0.01);
    const auto base = solvers::solve_regularised_nash(game, 1e-12);
    REQUIRE(base.converged);
    for (int t = 0; t < 5; ++t) {
      const auto other = solvers::solve_regularised_nash(
          game, 1e-12, 1000000, 0.5, random_interior_policy(3, rng));
      CHECK(other.converged);
      CHECK(total_variation(base.policy, other.policy) <= 1e-9);
    }
  }
}

TEST_CASE("mixture fixed point solver") {
  const GameSpec game = example_game_3x3();

  SUBCASE("beta = 0 coincides with the equilibrium") {
    const auto nash = solvers::solve_regularised_nash(game, 1e-13);
    const auto md = solvers::solve_ipo_md_fixed_point(game, 0.0, 1e-13);
    CHECK(total_variation(nash.policy, md.policy) <= 1e-10);
  }

  SUBCASE("beta = 1 is the best response to the reference") {
    const auto md = solvers::solve_ipo_md_fixed_point(game, 1.0, 1e-13, 1000, 1.0);
    const Policy br = solvers::best_response(game, game.ref_policy);
    CHECK(total_variation(md.policy, br) <= 1e-12);
    CHECK(md.iterations <= 3);
  }

  SUBCASE("flat preferences: everything is the reference") {
    const GameSpec flat = flat_game(3, 0.3);
    for (double beta : {0.0, 0.4, 0.9}) {
      const auto md = solvers::solve_ipo_md_fixed_point(flat, beta);
      CHECK(total_variation(md.policy, flat.ref_policy) <= 1e-12);
    }
  }
}

TEST_CASE("modified temperature correspondence") {
  const GameSpec game = example_game_3x3();

  SUBCASE("beta = 0 defect matches the equilibrium residual") {
    const auto nash = solvers::solve_regularised_nash(game, 1e-13);
    CHECK(solvers::verify_modified_tau(game, 0.0, nash.policy) <= 1e-12);
  }

  SUBCASE("example game at beta one half") {
    const auto md = solvers::solve_ipo_md_fixed_point(game, 0.5, 1e-13);
    CHECK(solvers::verify_modified_tau(game, 0.5, md.policy) <= 1e-8);

    // independent route: solve the tau/(1-beta) game directly and compare
    const GameSpec doubled(game.prefs, game.ref_policy, game.tau / 0.5);
    const auto direct = solvers::solve_regularised_nash(doubled, 1e-13);
    const Policy mixed = geometric_mixture(md.policy, game.ref_policy, 0.5);
    CHECK(total_variation(mixed, direct.policy) <= 1e-9);
  }

  SUBCASE("flat preferences give zero defect for any beta") {
    const GameSpec flat = flat_game(3, 0.2);
    for (double beta : {0.0, 0.25, 0.75}) {
      const auto md = solvers::solve_ipo_md_fixed_point(flat, beta);
      CHECK(solvers::verify_modified_tau(flat, beta, md.policy) <= 1e-13);
    }
  }

  SUBCASE("beta = 1 is rejected") {
    CHECK_THROWS_AS(solvers::verify_modified_tau(game, 1.0, game.ref_policy),
                    std::invalid_argument);
  }

  SUBCASE("random games across the beta grid") {
    Rng rng(103);
    for (int t = 0; t < 10; ++t) {
      const GameSpec game2 =
          random_game(2 + static_cast<int>(rng.next_u64() % 4),
                      0.3 + 2.0 * rng.next_double(), rng);
      for (double beta : {0.125, 0.25, 0.5, 0.75}) {
        const auto md = solvers::solve_ipo_md_fixed_point(game2, beta, 1e-13);
        CHECK(md.converged);
        CHECK(solvers::verify_modified_tau(game2, beta, md.policy) <= 1e-8);
      }
    }
  }
}

TEST_CASE("fixed point defect") {
  const GameSpec game = example_game_3x3();
  const auto nash = solvers::solve_regularised_nash(game, 1e-13);
  CHECK(solvers::fixed_point_defect(game, 0.0, nash.policy) <= 1e-12);
  CHECK(solvers::fixed_point_defect(game, 0.0, game.ref_policy) > 1e-2);
  const auto md = solvers::solve_ipo_md_fixed_point(game, 0.5, 1e-13);
  CHECK(solvers::fixed_point_defect(game, 0.5, md.policy) <= 1e-12);
  CHECK_THROWS_AS(solvers::fixed_point_defect(game, 1.5, nash.policy),
                  std::invalid_argument);
}

TEST_CASE("exploitability") {
  const GameSpec game = example_game_3x3();

  SUBCASE("zero at the solved equilibrium") {
    const auto nash = solvers::solve_regularised_nash(game, 1e-13);
    CHECK(solvers::exploitability(game, nash.policy) <= 1e-8);
  }

  SUBCASE("zero at the reference under flat preferences") {
    const GameSpec flat = flat_game(3, 0.1);
    CHECK(solvers::exploitability(flat, flat.ref_policy) <= 1e-14);
  }

  SUBCASE("strictly positive away from the equilibrium") {
    CHECK(solvers::exploitability(game, game.ref_policy) > 1e-3);
  }
}
