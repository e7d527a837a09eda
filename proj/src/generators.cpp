#include "prefgame/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace prefgame {

PreferenceMatrix random_preference_matrix(int n, Rng& rng, double margin) {
  if (n < 2) throw std::invalid_argument("random_preference_matrix: n < 2");
  if (!(margin >= 0.0 && margin < 0.5))
    throw std::invalid_argument("random_preference_matrix: margin in [0, 0.5)");
  std::vector<std::vector<double>> e(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n), 0.5));
  for (int y = 0; y < n; ++y) {
    for (int z = y + 1; z < n; ++z) {
      const double p = margin + (1.0 - 2.0 * margin) * rng.next_double();
      e[static_cast<size_t>(y)][static_cast<size_t>(z)] = p;
      e[static_cast<size_t>(z)][static_cast<size_t>(y)] = 1.0 - p;
    }
  }
  return PreferenceMatrix(std::move(e));
}

PreferenceMatrix bradley_terry_matrix(const std::vector<double>& rewards) {
  const int n = static_cast<int>(rewards.size());
  if (n < 2) throw std::invalid_argument("bradley_terry_matrix: need >= 2 rewards");
  std::vector<std::vector<double>> e(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n)));
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z)
      e[static_cast<size_t>(y)][static_cast<size_t>(z)] =
          (y == z) ? 0.5
                   : sigmoid(rewards[static_cast<size_t>(y)] -
                             rewards[static_cast<size_t>(z)]);
  return PreferenceMatrix(std::move(e));
}

PreferenceMatrix rock_paper_scissors_matrix() {
  return PreferenceMatrix({{0.5, 0.0, 1.0},  //
                           {1.0, 0.5, 0.0},  //
                           {0.0, 1.0, 0.5}});
}

Policy random_interior_policy(int n, Rng& rng, double min_weight) {
  if (n < 1) throw std::invalid_argument("random_interior_policy: n < 1");
  std::vector<double> w(static_cast<size_t>(n));
  for (double& x : w) x = min_weight + (1.0 - min_weight) * rng.next_double();
  return Policy::normalized(std::move(w));
}

PolicyLogits random_logits(int n, Rng& rng, double scale) {
  std::vector<double> phi(static_cast<size_t>(n));
  for (double& x : phi) x = scale * (2.0 * rng.next_double() - 1.0);
  return PolicyLogits(std::move(phi)).canonical();
}

std::vector<double> random_reward_vector(int n, Rng& rng, double scale) {
  std::vector<double> r(static_cast<size_t>(n));
  for (double& x : r) x = scale * (2.0 * rng.next_double() - 1.0);
  return r;
}

GameSpec random_game(int n, double tau, Rng& rng) {
  PreferenceMatrix prefs = random_preference_matrix(n, rng);
  Policy ref = random_interior_policy(n, rng);
  return GameSpec(std::move(prefs), std::move(ref), tau);
}

GameSpec example_game_3x3(double tau) {
  // Entries exactly as published; two of the three pair sums are 0.9 rather
  // than 1, so this table bypasses the anti-symmetry validation. Reference
  // values for this game are computed from the rows.
  PreferenceMatrix prefs = PreferenceMatrix::unchecked({{0.5, 0.8, 0.1},  //
                                                        {0.1, 0.5, 0.8},  //
                                                        {0.9, 0.1, 0.5}});
  return GameSpec(std::move(prefs), Policy::uniform(3), tau);
}

}  // namespace prefgame
