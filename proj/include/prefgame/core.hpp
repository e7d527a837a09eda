#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefgame/rng.hpp"

namespace prefgame {

inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kAntiSymmetryTol = 1e-12;

// Stable logistic function, split on the sign of t so that
// sigmoid(t) + sigmoid(-t) == 1 holds across the double range.
double sigmoid(double t);

// log(sigmoid(t)) without overflow for large |t|.
double log_sigmoid(double t);

double log_sum_exp(const std::vector<double>& xs);

// A point on the probability simplex: nonnegative entries summing to one
// (within kSimplexTol). Immutable after construction.
class Policy {
 public:
  Policy() = default;  // empty placeholder, size() == 0
  explicit Policy(std::vector<double> probs);

  static Policy uniform(int n);
  static Policy point_mass(int n, int y);
  // Rescales nonnegative weights to sum to one.
  static Policy normalized(std::vector<double> weights);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int y) const { return probs_[static_cast<size_t>(y)]; }
  const std::vector<double>& probs() const { return probs_; }

  // True when every entry is strictly positive (the simplex interior).
  bool interior() const;

 private:
  std::vector<double> probs_;
};

// Unconstrained softmax parameters for an interior policy. softmax is
// shift-invariant, so the canonical form has mean-zero entries; dynamics
// re-centre after every update to keep trajectories unique and bounded.
class PolicyLogits {
 public:
  PolicyLogits() = default;
  explicit PolicyLogits(std::vector<double> phi);

  // log of an interior policy, canonicalised.
  static PolicyLogits from_policy(const Policy& pi);

  PolicyLogits canonical() const;

  int size() const { return static_cast<int>(phi_.size()); }
  double operator[](int y) const { return phi_[static_cast<size_t>(y)]; }
  const std::vector<double>& values() const { return phi_; }

 private:
  std::vector<double> phi_;
};

Policy softmax(const PolicyLogits& logits);
std::vector<double> log_softmax(const PolicyLogits& logits);

// Pairwise preference probabilities on a finite action set:
// entry(y, y') is the probability that y is preferred to y'.
// Anti-symmetry entry(y,y') + entry(y',y) == 1 is enforced at construction,
// with exact 1/2 on the diagonal.
class PreferenceMatrix {
 public:
  PreferenceMatrix() = default;
  explicit PreferenceMatrix(std::vector<std::vector<double>> entries);

  // Skips the anti-symmetry check (shape, range and diagonal are still
  // enforced). Exists for the built-in example game, whose published entries
  // have pair sums of 0.9; every operation reads the ordered entry (y, y')
  // directly, so such a table is still usable as data.
  static PreferenceMatrix unchecked(std::vector<std::vector<double>> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  double operator()(int y, int y_prime) const {
    return entries_[static_cast<size_t>(y)][static_cast<size_t>(y_prime)];
  }
  const std::vector<std::vector<double>>& entries() const { return entries_; }

 private:
  struct UncheckedTag {};
  PreferenceMatrix(std::vector<std::vector<double>> entries, UncheckedTag);

  std::vector<std::vector<double>> entries_;
};

PreferenceMatrix validate_preference_matrix(
    const std::vector<std::vector<double>>& entries);

// A preference game: preference matrix, reference policy (the trust-region
// anchor) and regularisation temperature tau > 0.
struct GameSpec {
  PreferenceMatrix prefs;
  Policy ref_policy;
  double tau = 1.0;

  GameSpec() = default;
  GameSpec(PreferenceMatrix p, Policy ref, double t);
  int size() const { return prefs.size(); }
};

// An ordered comparison outcome. Self-pairs (winner == loser) are permitted:
// a draw of (y, y) is labelled with probability p(y > y) = 1/2 either way.
struct LabelledPair {
  int winner = 0;
  int loser = 0;
};

// Normalised entrywise geometric interpolation pi^(1-beta) * ref^beta,
// computed in log space. beta = 0 returns pi, beta = 1 returns ref.
Policy geometric_mixture(const Policy& pi, const Policy& ref, double beta);

// p(y > mu) = sum_y' mu(y') p(y > y').
double preference_vs_policy(const PreferenceMatrix& prefs, int y,
                            const Policy& mu);

// p(pi > mu) = sum_y pi(y) p(y > mu).
double policy_vs_policy(const PreferenceMatrix& prefs, const Policy& pi,
                        const Policy& mu);

// KL(pi || ref); zero-probability terms of pi contribute nothing. Throws if
// pi puts mass where ref does not (the divergence would be infinite).
double kl_divergence(const Policy& pi, const Policy& ref);

// Payoff of the regularised constant-sum game:
// p(pi1 > pi2) - tau KL(pi1||ref) + tau KL(pi2||ref).
double payoff(const GameSpec& spec, const Policy& pi1, const Policy& pi2);

// Draw Y ~ mu, Y' ~ mu_prime, then order into (winner, loser) = (Y, Y') with
// probability p(Y > Y'), else (Y', Y).
LabelledPair sample_labelled_pair(const PreferenceMatrix& prefs,
                                  const Policy& mu, const Policy& mu_prime,
                                  Rng& rng);

int sample_index(const Policy& pi, Rng& rng);

double total_variation(const Policy& a, const Policy& b);

double l2_norm(const std::vector<double>& v);

}  // namespace prefgame
