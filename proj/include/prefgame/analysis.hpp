#pragma once

#include <utility>
#include <vector>

#include "prefgame/core.hpp"

namespace prefgame::analysis {

// Per-action gap in the stationarity condition of the online log-sigmoid
// loss at a candidate policy:
//   residual(y) = p(y > pi) - sum_y' pi(y') sigmoid(p(y > pi) - p(y' > pi)).
// The policy is a stationary point compatible with the condition iff every
// residual vanishes. The pi-weighted average of the residuals is identically
// zero (both terms average to 1/2).
struct StationarityReport {
  std::vector<double> residuals;
  double max_abs = 0.0;
};

StationarityReport online_dpo_stationarity_residual(const PreferenceMatrix& prefs,
                                                    const Policy& pi);

// Logit-space counterpart: the norm of the log-sigmoid population-loss
// gradient at pi with pi itself as the sampling distribution. The value-space
// residual above is the primary stationarity measure; the two vanish
// together at equilibria of the regularised game.
double online_dpo_gradient_norm(const GameSpec& spec, const Policy& pi);

// Closed-form residuals for the two-action game with preference matrix
// rows (1/2, 1-p), (p, 1/2) evaluated at the policy (alpha, 1-alpha):
//   ((1-alpha) (1 - p - sigmoid(1/2 - p)), -alpha (1 - p - sigmoid(1/2 - p))).
// Both vanish simultaneously on (0,1) only when p = 1/2.
std::pair<double, double> two_action_residuals(double p, double alpha);

// Builds the preference matrix sigmoid(r(y) - r(y')), the tilted policy
// pi_r proportional to ref * exp(r / tau), and returns the norm of the
// log-sigmoid population-loss gradient at pi_r under sampling distribution
// mu. Zero for every mu when the preferences come from the score vector r.
double bt_stationarity_check(const Policy& ref, double tau,
                             const std::vector<double>& reward,
                             const Policy& mu);

struct DegeneracyReport {
  double dpo_gradient_norm = 0.0;
  // The squared-loss gradient under the same construction, reported for
  // contrast; it is not zero in general.
  double ipo_gradient_norm = 0.0;
};

// Off-support rescaling demo: given a sampling distribution mu with at least
// one zero entry and a policy pi_dpo whose log-sigmoid gradient under mu is
// zero, scales pi_dpo by alpha on the support of mu (leaving the off-support
// mass untouched), renormalises, and evaluates both gradients there. The
// log-sigmoid gradient stays zero for any alpha > 0.
DegeneracyReport dpo_degeneracy_demo(const GameSpec& spec, const Policy& mu,
                                     const Policy& pi_dpo, double alpha);

}  // namespace prefgame::analysis
