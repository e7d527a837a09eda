// Acceptance suite: every release criterion at its stated tolerance, one
// pass/fail line each. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "prefgame/analysis.hpp"
#include "prefgame/checks.hpp"
#include "prefgame/dynamics.hpp"
#include "prefgame/estimators.hpp"
#include "prefgame/experiment.hpp"
#include "prefgame/generators.hpp"
#include "prefgame/losses.hpp"
#include "prefgame/solvers.hpp"

using namespace prefgame;
using dynamics::AlgorithmId;
using dynamics::ScoreKind;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %02d %-34s %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(d) / std::max({l2_norm(a), l2_norm(b), 1e-10});
}

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::exp(rng.next_double() * std::log(hi / lo));
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// 1. Exact pair-loss gradients match central finite differences (step 1e-5)
//    at relative error <= 1e-6 over 20 random games, n in 2..6, all three
//    sampling schemes, in under 10 seconds.
void criterion_1() {
  const Timer timer;
  const auto results = checks::gradient_suite(1001);
  double worst = 0.0;
  bool pass = true;
  for (const auto& r : results) {
    pass = pass && r.pass;
    if (r.name.find("finite-differences") != std::string::npos)
      worst = std::max(worst, r.observed);
  }
  const double elapsed = timer.seconds();
  pass = pass && elapsed < 10.0;
  report(1, "gradient-correctness", pass,
         "max rel err " + fmt(worst) + " (tol 1e-6), " + fmt(elapsed) + " s");
}

// 2. Online squared-loss and self-play updates: cosine similarity at least
//    1 - 1e-10 and norm ratio 2/tau within 1e-8 relative, 20 random games,
//    tau in {0.1, 0.5, 1, 5, 10}.
void criterion_2() {
  Rng rng(1002);
  double worst_cos = 0.0;
  double worst_ratio = 0.0;
  for (double tau : {0.1, 0.5, 1.0, 5.0, 10.0}) {
    for (int t = 0; t < 20; ++t) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 5);
      GameSpec game = random_game(n, tau, rng);
      const PolicyLogits logits = random_logits(n, rng);
      const auto ipo = dynamics::expected_update(AlgorithmId::online_ipo(), game, logits);
      const auto sp = dynamics::expected_update(AlgorithmId::self_play(), game, logits);
      double dot = 0.0;
      for (size_t i = 0; i < ipo.size(); ++i) dot += ipo[i] * sp[i];
      worst_cos = std::max(
          worst_cos, 1.0 - dot / std::max(l2_norm(ipo) * l2_norm(sp), 1e-300));
      worst_ratio = std::max(
          worst_ratio,
          std::abs(l2_norm(ipo) / std::max(l2_norm(sp), 1e-300) * tau / 2.0 - 1.0));
    }
  }
  report(2, "selfplay-equivalence", worst_cos <= 1e-10 && worst_ratio <= 1e-8,
         "1-cos " + fmt(worst_cos) + " (tol 1e-10), ratio err " +
             fmt(worst_ratio) + " (tol 1e-8)");
}

// 3. Update identities at general mixing: the mixture-sampled policy
//    gradient equals the kernel expectation under the policy; the mixture
//    squared-loss update equals both the differentiated population loss
//    (per-ordered-draw scaling) and 2/tau times the mixture-score kernel
//    expectation under the mixture; all <= 1e-10, beta in
//    {0.125, 0.25, 0.5, 0.75}.
void criterion_3() {
  Rng rng(1003);
  double worst = 0.0;
  for (double beta : {0.125, 0.25, 0.5, 0.75}) {
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 5);
      const GameSpec game = random_game(n, log_uniform(rng, 0.25, 4.0), rng);
      const PolicyLogits logits = random_logits(n, rng);
      const Policy pi = softmax(logits);
      const Policy mix = geometric_mixture(pi, game.ref_policy, beta);

      auto assemble = [&](const Policy& weights, ScoreKind score) {
        std::vector<double> acc(static_cast<size_t>(n), 0.0);
        for (int y = 0; y < n; ++y) {
          const auto g = dynamics::gradient_kernel_g(game, logits, beta, y, false, score);
          for (int z = 0; z < n; ++z)
            acc[static_cast<size_t>(z)] += weights[y] * g[static_cast<size_t>(z)];
        }
        return acc;
      };

      const auto nash_update =
          dynamics::expected_update(AlgorithmId::nash_md_pg(beta), game, logits);
      worst = std::max(worst,
                       rel_error(nash_update, assemble(pi, ScoreKind::kPolicy)));

      const auto md_update =
          dynamics::expected_update(AlgorithmId::ipo_md(beta), game, logits);
      auto loss_route = losses::population_gradient(
          losses::LossId::kIpo, logits, game,
          losses::SamplingScheme::geometric_mixture(beta));
      for (double& x : loss_route) x *= -0.5;
      worst = std::max(worst, rel_error(md_update, loss_route));

      auto assembled = assemble(mix, ScoreKind::kMixture);
      for (double& x : assembled) x *= 2.0 / game.tau;
      worst = std::max(worst, rel_error(md_update, assembled));
    }
  }
  report(3, "update-kernel-assembly", worst <= 1e-10,
         "max rel err " + fmt(worst) + " (tol 1e-10)");
}

// 4. Equilibrium solver: residual <= 1e-12 and exploitability <= 1e-10 on 50
//    random games; the two-action analytic case lands on sigmoid(0.4) within
//    1e-9.
void criterion_4() {
  Rng rng(1004);
  double worst_residual = 0.0;
  double worst_exploit = 0.0;
  bool all_converged = true;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    const GameSpec game = random_game(n, log_uniform(rng, 0.25, 4.0), rng);
    const auto nash = solvers::solve_regularised_nash(game, 1e-12);
    all_converged = all_converged && nash.converged;
    worst_residual = std::max(worst_residual, nash.residual);
    worst_exploit = std::max(worst_exploit, solvers::exploitability(game, nash.policy));
  }
  const GameSpec two(validate_preference_matrix({{0.5, 0.9}, {0.1, 0.5}}),
                     Policy::uniform(2), 1.0);
  const auto nash2 = solvers::solve_regularised_nash(two, 1e-13);
  const double analytic_gap = std::abs(nash2.policy[0] - sigmoid(0.4));
  const bool pass = all_converged && worst_residual <= 1e-12 &&
                    worst_exploit <= 1e-10 && analytic_gap <= 1e-9;
  report(4, "equilibrium-solver", pass,
         "residual " + fmt(worst_residual) + " (tol 1e-12), exploitability " +
             fmt(worst_exploit) + " (tol 1e-10), analytic gap " + fmt(analytic_gap));
}

// 5. The mixture fixed point is stationary for both mixture dynamics
//    (update norms <= 1e-8) on the example game and 20 random games.
void criterion_5() {
  Rng rng(1005);
  double worst = 0.0;
  std::vector<GameSpec> games;
  games.push_back(example_game_3x3());
  for (int t = 0; t < 20; ++t)
    games.push_back(random_game(2 + static_cast<int>(rng.next_u64() % 5),
                                log_uniform(rng, 0.25, 4.0), rng));
  for (const GameSpec& game : games)
    for (double beta : {0.25, 0.5}) {
      const auto fp = solvers::solve_ipo_md_fixed_point(game, beta, 5e-14);
      const PolicyLogits at = PolicyLogits::from_policy(fp.policy);
      worst = std::max(worst, l2_norm(dynamics::expected_update(
                                  AlgorithmId::ipo_md(beta), game, at)));
      worst = std::max(worst, l2_norm(dynamics::expected_update(
                                  AlgorithmId::nash_md_pg(beta), game, at)));
    }
  report(5, "shared-fixed-point", worst <= 1e-8,
         "max update norm " + fmt(worst) + " (tol 1e-8)");
}

// 6. Modified-temperature correspondence: the mixture of the solved fixed
//    point has defect <= 1e-8 for the tau/(1-beta) game, beta in
//    {0.125, 0.25, 0.5, 0.75}.
void criterion_6() {
  Rng rng(1006);
  double worst = 0.0;
  std::vector<GameSpec> games;
  games.push_back(example_game_3x3());
  for (int t = 0; t < 10; ++t)
    games.push_back(random_game(2 + static_cast<int>(rng.next_u64() % 5),
                                log_uniform(rng, 0.25, 4.0), rng));
  for (const GameSpec& game : games)
    for (double beta : {0.125, 0.25, 0.5, 0.75}) {
      const auto fp = solvers::solve_ipo_md_fixed_point(game, beta, 1e-13);
      worst = std::max(worst, solvers::verify_modified_tau(game, beta, fp.policy));
    }
  report(6, "modified-temperature", worst <= 1e-8,
         "max defect " + fmt(worst) + " (tol 1e-8)");
}

// 7. The reproduction command: every trajectory reaches its fixed point
//    within total variation 1e-4 in 1e5 steps at step size 0.1; the full
//    mixing endpoint matches (0.2945, 0.2945, 0.4110) within 1e-3; the whole
//    bundle runs in under 60 seconds.
void criterion_7() {
  const Timer timer;
  const std::filesystem::path dir = "acceptance_out/reproduce";
  std::filesystem::remove_all(dir);
  const std::vector<double> betas = {0.0, 0.25, 0.5, 0.75, 1.0};
  const int code =
      cli::cmd_reproduce_appendix_d(dir.string(), betas, 0.1, 100000, 1000, 1e-4);
  const double elapsed = timer.seconds();

  const GameSpec game = example_game_3x3();
  double worst_tv = 0.0;
  double worst_defect = 0.0;
  for (double beta : betas) {
    dynamics::DynamicsConfig config;
    config.algorithm = AlgorithmId::ipo_md(beta);
    config.spec = game;
    config.learning_rate = 0.1;
    config.steps = 100000;
    config.record_every = 100000;
    const auto traj = dynamics::run_dynamics(config);
    worst_tv = std::max(worst_tv, traj.final_residual);
    worst_defect = std::max(
        worst_defect, solvers::fixed_point_defect(game, beta, traj.final_policy));
  }
  // full mixing endpoint against the closed-form best response values
  dynamics::DynamicsConfig full;
  full.algorithm = AlgorithmId::ipo_md(1.0);
  full.spec = game;
  full.learning_rate = 0.1;
  full.steps = 100000;
  full.record_every = 100000;
  const auto traj_full = dynamics::run_dynamics(full);
  const Policy expected({0.2945, 0.2945, 0.4110});
  double endpoint_gap = 0.0;
  for (int y = 0; y < 3; ++y)
    endpoint_gap = std::max(endpoint_gap,
                            std::abs(traj_full.final_policy[y] - expected[y]));

  const bool pass = code == cli::kExitOk && worst_tv <= 1e-4 &&
                    worst_defect <= 1e-4 && endpoint_gap <= 1e-3 &&
                    elapsed < 60.0;
  report(7, "example-game-reproduction", pass,
         "max tv " + fmt(worst_tv) + ", max defect " + fmt(worst_defect) +
             " (tol 1e-4), endpoint gap " + fmt(endpoint_gap) +
             " (tol 1e-3), " + fmt(elapsed) + " s");
}

// 8. Contrastive vs non-contrastive estimates: exact means agree <= 1e-12;
//    whenever the variance condition is nonnegative the contrastive total
//    variance is no larger; the covariance identity holds <= 1e-12.
void criterion_8() {
  const auto results = checks::variance_suite(1008);
  bool pass = true;
  std::string detail;
  for (const auto& r : results) {
    pass = pass && r.pass;
    if (r.name == "estimate-means-agree")
      detail += "mean gap " + fmt(r.observed) + ", ";
    if (r.name == "covariance-identity")
      detail += "identity gap " + fmt(r.observed) + ", ";
    if (r.name == "variance-reduction-when-condition-holds")
      detail += r.note + ", ";
  }
  if (!detail.empty()) detail.resize(detail.size() - 2);
  report(8, "contrastive-variance", pass, detail);
}

// 9. Stationarity analysis: (a) two-action sign pattern across the p grid
//    with zero residuals at p = 1/2; (b) score-model stationarity <= 1e-8
//    for 20 random triples including on-policy sampling; (c) the cyclic
//    game's uniform policy passes with residuals <= 1e-12; (d) the
//    off-support rescaling keeps the gradient <= 1e-8 for alpha in
//    {0.01, 0.1, 10}.
void criterion_9() {
  const auto results = checks::dpo_analysis_suite(1009);
  bool pass = true;
  double worst_bt = 0.0;
  double worst_degen = 0.0;
  for (const auto& r : results) {
    pass = pass && r.pass;
    if (r.name == "score-model-stationarity") worst_bt = r.observed;
    if (r.name == "degenerate-support-rescaling") worst_degen = r.observed;
  }
  report(9, "stationarity-analysis", pass,
         "score-model norm " + fmt(worst_bt) + ", rescaling norm " +
             fmt(worst_degen) + " (tol 1e-8)");
}

// 10. Stochastic/expected consistency: the mean of 1e5 single-draw updates
//     lies within 3 sigma of the exact expected update, per algorithm, on 5
//     random games; identical seeds give byte-identical updates.
void criterion_10() {
  Rng rng(1010);
  double worst_sigmas = 0.0;
  bool bytes_identical = true;
  for (int g = 0; g < 5; ++g) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    const GameSpec game = random_game(n, log_uniform(rng, 0.5, 2.0), rng);
    const PolicyLogits logits = random_logits(n, rng);
    const std::vector<AlgorithmId> algorithms = {
        AlgorithmId::online_ipo(),
        AlgorithmId::ipo_md(0.5),
        AlgorithmId::offline_ipo(random_interior_policy(n, rng)),
        AlgorithmId::nash_md_pg(0.25),
        AlgorithmId::self_play(),
        AlgorithmId::online_dpo(),
        AlgorithmId::online_slic(),
        AlgorithmId::rlhf_pg(random_reward_vector(n, rng))};
    for (const AlgorithmId& algo : algorithms) {
      const auto expected = dynamics::expected_update(algo, game, logits);
      const auto dist = dynamics::stochastic_outcome_distribution(algo, game, logits);
      const long draws = 100000;
      Rng draw_rng(rng.next_u64());
      std::vector<double> mean(static_cast<size_t>(n), 0.0);
      for (long t = 0; t < draws; ++t) {
        const auto u = dynamics::stochastic_update(algo, game, logits, 1, draw_rng);
        for (int i = 0; i < n; ++i) mean[static_cast<size_t>(i)] += u[static_cast<size_t>(i)];
      }
      for (double& x : mean) x /= static_cast<double>(draws);
      std::vector<double> gap(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        gap[static_cast<size_t>(i)] =
            mean[static_cast<size_t>(i)] - expected[static_cast<size_t>(i)];
      const double sigma =
          std::sqrt(dist.total_variance() / static_cast<double>(draws));
      if (sigma > 0.0)
        worst_sigmas = std::max(worst_sigmas, l2_norm(gap) / sigma);
      else
        worst_sigmas = std::max(worst_sigmas, l2_norm(gap) > 1e-12 ? 1e9 : 0.0);

      Rng r1(777);
      Rng r2(777);
      const auto a = dynamics::stochastic_update(algo, game, logits, 64, r1);
      const auto b = dynamics::stochastic_update(algo, game, logits, 64, r2);
      bytes_identical = bytes_identical &&
                        std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
    }
  }
  report(10, "stochastic-expected-consistency",
         worst_sigmas <= 3.0 && bytes_identical,
         "worst mean deviation " + fmt(worst_sigmas) + " sigma (tol 3), byte-identical " +
             (bytes_identical ? "yes" : "no"));
}

// 11. Score fitting: a 3:1 empirical win rate recovers a log 3 gap within
//     1e-3, and the tilted closed form on rewards fitted from 1e5 sampled
//     labels recovers the exact optimum within total variation 0.01.
void criterion_11() {
  std::vector<LabelledPair> counts;
  for (int t = 0; t < 300; ++t) counts.push_back({0, 1});
  for (int t = 0; t < 100; ++t) counts.push_back({1, 0});
  const auto two = estimators::fit_bradley_terry(counts, 2);
  const double gap = std::abs(two.rewards[0] - two.rewards[1] - std::log(3.0));

  Rng rng(1011);
  const std::vector<double> truth = random_reward_vector(4, rng, 1.0);
  const PreferenceMatrix prefs = bradley_terry_matrix(truth);
  const Policy mu = Policy::uniform(4);
  std::vector<LabelledPair> samples;
  samples.reserve(100000);
  for (int t = 0; t < 100000; ++t)
    samples.push_back(sample_labelled_pair(prefs, mu, mu, rng));
  const auto fit = estimators::fit_bradley_terry(samples, 4);
  const Policy ref = random_interior_policy(4, rng);
  const double tau = 0.7;
  const double tv =
      total_variation(solvers::rlhf_closed_form(ref, tau, fit.rewards),
                      solvers::rlhf_closed_form(ref, tau, truth));

  const bool pass = two.converged && gap <= 1e-3 && fit.converged && tv <= 0.01;
  report(11, "score-fitting", pass,
         "gap err " + fmt(gap) + " (tol 1e-3), recovery tv " + fmt(tv) +
             " (tol 0.01)");
}

}  // namespace

int main() {
  setenv("PREFGAME_LOG", "error", 1);  // keep criterion lines uncluttered
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
