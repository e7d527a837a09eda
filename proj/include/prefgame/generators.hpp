#pragma once

#include <vector>

#include "prefgame/core.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {

// Random preference matrix with off-diagonal entries in
// [margin, 1 - margin]; anti-symmetry and the 1/2 diagonal hold by
// construction.
PreferenceMatrix random_preference_matrix(int n, Rng& rng,
                                          double margin = 0.05);

// p(y > y') = sigmoid(r(y) - r(y')).
PreferenceMatrix bradley_terry_matrix(const std::vector<double>& rewards);

// The cyclic 3-action game with deterministic preferences: each action
// beats exactly one other. Does not admit a Bradley-Terry representation.
PreferenceMatrix rock_paper_scissors_matrix();

// Interior policy with entry ratios bounded by min_weight.
Policy random_interior_policy(int n, Rng& rng, double min_weight = 0.1);

PolicyLogits random_logits(int n, Rng& rng, double scale = 1.0);

std::vector<double> random_reward_vector(int n, Rng& rng, double scale = 1.0);

// Random game: random preferences, random interior reference policy.
GameSpec random_game(int n, double tau, Rng& rng);

// The 3x3 cyclic example game used by the reproduce-appendix-d command:
// preference matrix rows (0.5, 0.8, 0.1), (0.1, 0.5, 0.8), (0.9, 0.1, 0.5)
// with uniform reference and tau = 0.1.
GameSpec example_game_3x3(double tau = 0.1);

}  // namespace prefgame
