#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefgame/core.hpp"
#include "prefgame/losses.hpp"
#include "prefgame/solvers.hpp"

namespace prefgame::dynamics {

// Algorithm identity plus its per-algorithm data. beta is meaningful for the
// mixture-sampled algorithms only, mu for the offline loss, reward for the
// regularised policy-gradient baseline.
struct AlgorithmId {
  enum class Kind {
    kOnlineIpo,
    kIpoMd,
    kOfflineIpo,
    kNashMdPg,
    kSelfPlay,
    kOnlineDpo,
    kOnlineSlic,
    kRlhfPg,
  };

  Kind kind = Kind::kOnlineIpo;
  double beta = 0.0;
  std::optional<Policy> mu;
  std::vector<double> reward;
  // Subtract 1/2 from the sampled preference term in score-function updates.
  // The subtracted term has zero expectation, so expected updates are
  // unaffected; only stochastic estimates change.
  bool centred_score = false;
  // Weight both label orders of a sampled pair by the preference probability
  // instead of sampling a label (stochastic mode of the pair losses only).
  bool expected_label = false;

  static AlgorithmId online_ipo();
  static AlgorithmId ipo_md(double beta);
  static AlgorithmId offline_ipo(Policy mu);
  static AlgorithmId nash_md_pg(double beta);
  static AlgorithmId self_play();
  static AlgorithmId online_dpo();
  static AlgorithmId online_slic();
  static AlgorithmId rlhf_pg(std::vector<double> reward);

  std::string name() const;
  bool is_loss_family() const;
  // LossId + sampling scheme for the pair-loss algorithms; empty otherwise.
  std::optional<losses::LossId> loss_id() const;
  std::optional<losses::SamplingScheme> sampling() const;
};

// Which score vector multiplies the scalar term in the update kernel g(y).
// kPolicy uses the policy score e_y - pi. kMixture uses the mixture's own
// score scaled by 1/(1-beta), i.e. e_y - pi', which has exactly zero mean
// under the mixture; it is the variant for which the assembled mixture-loss
// gradient identity holds exactly under the softmax parametrisation.
enum class ScoreKind { kPolicy, kMixture };

// g(y) = score(y) * (p(y > pi') - tau log(pi(y)/ref(y))), with
// pi' = mixture(pi, ref, beta); `centred` subtracts 1/2 from the scalar.
std::vector<double> gradient_kernel_g(const GameSpec& spec,
                                      const PolicyLogits& logits, double beta,
                                      int y, bool centred = false,
                                      ScoreKind score = ScoreKind::kPolicy);

// Exact update direction by enumeration. This is always the improving
// direction: payoff ascent for the game algorithms (self-play, the
// mixture-sampled policy gradient, the regularised policy gradient), loss
// descent for the pair losses. Pair-loss directions are normalised per
// ordered draw (half the labelled-pair expectation), which makes the
// correspondence with the update kernel an exact 2/tau scaling.
std::vector<double> expected_update(const AlgorithmId& algo,
                                    const GameSpec& spec,
                                    const PolicyLogits& logits);

// Average of batch_size single-draw updates from the algorithm's sampling
// scheme; unbiased for expected_update. Bit-reproducible for a given rng
// state.
std::vector<double> stochastic_update(const AlgorithmId& algo,
                                      const GameSpec& spec,
                                      const PolicyLogits& logits,
                                      int batch_size, Rng& rng);

// The exact distribution of a single-draw stochastic update: every possible
// outcome with its probability. Used to compute exact means and variances of
// the estimators.
struct OutcomeDistribution {
  std::vector<double> probabilities;
  std::vector<std::vector<double>> updates;

  std::vector<double> mean() const;
  std::vector<double> coordinate_variance() const;
  double total_variance() const;
};

OutcomeDistribution stochastic_outcome_distribution(const AlgorithmId& algo,
                                                    const GameSpec& spec,
                                                    const PolicyLogits& logits);

struct DynamicsConfig {
  AlgorithmId algorithm;
  GameSpec spec;
  double learning_rate = 0.1;
  long steps = 100000;
  std::uint64_t seed = 0;
  enum class Mode { kExpected, kStochastic };
  Mode mode = Mode::kExpected;
  int batch_size = 1;
  long record_every = 1;
  double tolerance = 1e-4;  // convergence declaration for the trajectory
};

struct TrajectoryRecord {
  long step = 0;
  Policy policy;
  double population_loss = 0.0;
  double nash_residual = 0.0;  // total variation to the matched fixed point
  double kl_to_ref = 0.0;
  double grad_norm = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Policy final_policy;
  long steps_run = 0;
  bool diverged = false;
  bool converged = false;
  double final_residual = 0.0;  // total variation to the matched fixed point
  solvers::FixedPointReport fixed_point;
};

// The stationary point each algorithm's dynamics target. The offline loss
// and the regularised policy gradient have closed forms; the online pair
// losses are matched to the regularised equilibrium (for the log-sigmoid and
// hinge losses this is a comparison point, not a convergence guarantee).
solvers::FixedPointReport matched_fixed_point(const AlgorithmId& algo,
                                              const GameSpec& spec,
                                              double tol = 1e-12);

// Iterate logits <- canonical(logits + lr * update). Diagnostics are recorded
// at step 0, every record_every steps, and at the final step. A non-finite
// update aborts the run and flags the trajectory as diverged.
Trajectory run_dynamics(const DynamicsConfig& config);

}  // namespace prefgame::dynamics
