#pragma once

#include <vector>

#include "prefgame/core.hpp"

namespace prefgame::estimators {

// Exact or sampled first and second moments of a vector-valued gradient
// estimate. Variances follow the trace convention: total_variance is the sum
// of the per-coordinate variances, E||g - Eg||^2.
struct EstimateStats {
  std::vector<double> mean;
  double total_variance = 0.0;
  std::vector<double> per_coordinate_variance;
  long n_outcomes_or_samples = 0;
  bool exact = false;
};

// f(y,y') = p(y>y') - 1/2 - tau log(pi(y)/ref(y)) + tau log(pi(y')/ref(y')),
// anti-symmetric by construction.
struct VarianceKernel {
  std::vector<std::vector<double>> f_values;
  double operator()(int y, int y_prime) const {
    return f_values[static_cast<size_t>(y)][static_cast<size_t>(y_prime)];
  }
};

VarianceKernel variance_kernel(const GameSpec& spec, const PolicyLogits& logits);

// Single-draw gradient estimates for a pair (y, y') sampled from the current
// policy. The non-contrastive estimate routes the signal through the first
// sample's score only; the contrastive one averages the two scores.
//   g_nc = -(e_y - pi) f(y,y')
//   g_c  = -(1/2) ((e_y - pi) - (e_y' - pi)) f(y,y')
std::vector<double> noncontrastive_estimate(const GameSpec& spec,
                                            const PolicyLogits& logits, int y,
                                            int y_prime);
std::vector<double> contrastive_estimate(const GameSpec& spec,
                                         const PolicyLogits& logits, int y,
                                         int y_prime);

enum class EstimateKind { kContrastive, kNonContrastive };

// Exact moments by enumeration of all n^2 ordered pairs weighted by
// pi(y) pi(y') (the kernel f carries the label information, so no label
// enumeration is involved).
EstimateStats exact_variance(const GameSpec& spec, const PolicyLogits& logits,
                             EstimateKind kind);

// Sampled moments from n_samples independent pair draws.
EstimateStats monte_carlo_variance(const GameSpec& spec,
                                   const PolicyLogits& logits,
                                   EstimateKind kind, long n_samples, Rng& rng);

// E_{y,y'~pi}[ <score(y), score(y')> f(y,y')^2 ] in the trace sense; when
// nonnegative, the contrastive estimate has total variance at most that of
// the non-contrastive one.
struct VarianceCondition {
  double trace_value = 0.0;
  std::vector<double> per_coordinate;
};

VarianceCondition variance_condition(const GameSpec& spec,
                                     const PolicyLogits& logits);

struct BradleyTerryFit {
  std::vector<double> rewards;  // gauge-fixed to mean zero
  bool converged = false;
  bool separable = false;  // unbounded likelihood detected (needs a regulariser)
  long iterations = 0;
  double objective = 0.0;  // penalised mean log-likelihood at the returned point
};

// Maximum likelihood fit of action scores from labelled pairs, by gradient
// ascent with backtracking line search on
//   (1/N) sum log sigmoid(r(winner) - r(loser)) - (regulariser/2) ||r||^2.
// The line search keeps the objective non-decreasing across iterations.
// Without a regulariser, data whose win digraph is not strongly connected
// has no finite maximiser; such fits are flagged separable and the returned
// scores are the capped ascent iterate.
BradleyTerryFit fit_bradley_terry(const std::vector<LabelledPair>& samples,
                                  int n, double regulariser = 0.0,
                                  long max_iter = 20000, double tol = 1e-8);

}  // namespace prefgame::estimators
