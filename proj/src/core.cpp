#include "prefgame/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace prefgame {

double sigmoid(double t) {
  if (t >= 0.0) {
    const double z = std::exp(-t);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(t);
  return z / (1.0 + z);
}

double log_sigmoid(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf/NaN)
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

Policy::Policy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("Policy: empty vector");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument("Policy: entries must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw std::invalid_argument("Policy: entries sum to " +
                                std::to_string(sum) + ", expected 1");
}

Policy Policy::uniform(int n) {
  if (n < 1) throw std::invalid_argument("Policy::uniform: n < 1");
  return Policy(std::vector<double>(static_cast<size_t>(n), 1.0 / n));
}

Policy Policy::point_mass(int n, int y) {
  if (y < 0 || y >= n) throw std::invalid_argument("Policy::point_mass: bad index");
  std::vector<double> p(static_cast<size_t>(n), 0.0);
  p[static_cast<size_t>(y)] = 1.0;
  return Policy(std::move(p));
}

Policy Policy::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("Policy::normalized: weights must be finite and >= 0");
    sum += w;
  }
  if (sum <= 0.0)
    throw std::invalid_argument("Policy::normalized: all weights are zero");
  for (double& w : weights) w /= sum;
  return Policy(std::move(weights));
}

bool Policy::interior() const {
  return std::all_of(probs_.begin(), probs_.end(),
                     [](double p) { return p > 0.0; });
}

PolicyLogits::PolicyLogits(std::vector<double> phi) : phi_(std::move(phi)) {
  if (phi_.empty()) throw std::invalid_argument("PolicyLogits: empty vector");
  for (double x : phi_)
    if (!std::isfinite(x))
      throw std::invalid_argument("PolicyLogits: non-finite entry");
}

PolicyLogits PolicyLogits::from_policy(const Policy& pi) {
  if (!pi.interior())
    throw std::invalid_argument(
        "PolicyLogits::from_policy: policy must be interior");
  std::vector<double> phi(static_cast<size_t>(pi.size()));
  for (int y = 0; y < pi.size(); ++y) phi[static_cast<size_t>(y)] = std::log(pi[y]);
  return PolicyLogits(std::move(phi)).canonical();
}

PolicyLogits PolicyLogits::canonical() const {
  const double mean =
      std::accumulate(phi_.begin(), phi_.end(), 0.0) / static_cast<double>(phi_.size());
  std::vector<double> centred(phi_.size());
  for (size_t i = 0; i < phi_.size(); ++i) centred[i] = phi_[i] - mean;
  return PolicyLogits(std::move(centred));
}

Policy softmax(const PolicyLogits& logits) {
  const auto& phi = logits.values();
  const double m = *std::max_element(phi.begin(), phi.end());
  std::vector<double> w(phi.size());
  double sum = 0.0;
  for (size_t i = 0; i < phi.size(); ++i) {
    w[i] = std::exp(phi[i] - m);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return Policy(std::move(w));
}

std::vector<double> log_softmax(const PolicyLogits& logits) {
  const auto& phi = logits.values();
  const double lse = log_sum_exp(phi);
  std::vector<double> out(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] - lse;
  return out;
}

PreferenceMatrix::PreferenceMatrix(std::vector<std::vector<double>> entries,
                                   UncheckedTag)
    : entries_(std::move(entries)) {
  const size_t n = entries_.size();
  if (n < 2) throw std::invalid_argument("PreferenceMatrix: need n >= 2 actions");
  for (const auto& row : entries_)
    if (row.size() != n)
      throw std::invalid_argument("PreferenceMatrix: matrix is not square");
  for (size_t y = 0; y < n; ++y) {
    for (size_t z = 0; z < n; ++z) {
      const double p = entries_[y][z];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw std::invalid_argument(
            "PreferenceMatrix: entry (" + std::to_string(y) + "," +
            std::to_string(z) + ") outside [0,1]");
    }
    if (entries_[y][y] != 0.5)
      throw std::invalid_argument("PreferenceMatrix: diagonal entry (" +
                                  std::to_string(y) + ") must be exactly 0.5");
  }
}

PreferenceMatrix::PreferenceMatrix(std::vector<std::vector<double>> entries)
    : PreferenceMatrix(std::move(entries), UncheckedTag{}) {
  const size_t n = entries_.size();
  for (size_t y = 0; y < n; ++y)
    for (size_t z = 0; z < n; ++z)
      if (std::abs(entries_[y][z] + entries_[z][y] - 1.0) > kAntiSymmetryTol)
        throw std::invalid_argument(
            "PreferenceMatrix: anti-symmetry violated at (" + std::to_string(y) +
            "," + std::to_string(z) + "): " + std::to_string(entries_[y][z]) +
            " + " + std::to_string(entries_[z][y]) + " != 1");
}

PreferenceMatrix PreferenceMatrix::unchecked(
    std::vector<std::vector<double>> entries) {
  return PreferenceMatrix(std::move(entries), UncheckedTag{});
}

PreferenceMatrix validate_preference_matrix(
    const std::vector<std::vector<double>>& entries) {
  return PreferenceMatrix(entries);
}

GameSpec::GameSpec(PreferenceMatrix p, Policy ref, double t)
    : prefs(std::move(p)), ref_policy(std::move(ref)), tau(t) {
  if (!(tau > 0.0)) throw std::invalid_argument("GameSpec: tau must be > 0");
  if (ref_policy.size() != prefs.size())
    throw std::invalid_argument("GameSpec: reference policy size " +
                                std::to_string(ref_policy.size()) +
                                " does not match action count " +
                                std::to_string(prefs.size()));
}

Policy geometric_mixture(const Policy& pi, const Policy& ref, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("geometric_mixture: beta must be in [0,1]");
  if (pi.size() != ref.size())
    throw std::invalid_argument("geometric_mixture: size mismatch");
  if (beta == 0.0) return pi;
  if (beta == 1.0) return ref;
  const int n = pi.size();
  std::vector<double> logw(static_cast<size_t>(n));
  double best = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < n; ++y) {
    const double a = pi[y];
    const double b = ref[y];
    logw[static_cast<size_t>(y)] =
        (a > 0.0 && b > 0.0)
            ? (1.0 - beta) * std::log(a) + beta * std::log(b)
            : -std::numeric_limits<double>::infinity();
    best = std::max(best, logw[static_cast<size_t>(y)]);
  }
  if (!std::isfinite(best))
    throw std::domain_error(
        "geometric_mixture: every action has zero weight, mixture is not "
        "normalisable");
  std::vector<double> w(static_cast<size_t>(n));
  for (int y = 0; y < n; ++y)
    w[static_cast<size_t>(y)] =
        std::isfinite(logw[static_cast<size_t>(y)])
            ? std::exp(logw[static_cast<size_t>(y)] - best)
            : 0.0;
  return Policy::normalized(std::move(w));
}

double preference_vs_policy(const PreferenceMatrix& prefs, int y,
                            const Policy& mu) {
  if (y < 0 || y >= prefs.size())
    throw std::invalid_argument("preference_vs_policy: action out of range");
  if (mu.size() != prefs.size())
    throw std::invalid_argument("preference_vs_policy: size mismatch");
  double acc = 0.0;
  for (int z = 0; z < prefs.size(); ++z) acc += mu[z] * prefs(y, z);
  return acc;
}

double policy_vs_policy(const PreferenceMatrix& prefs, const Policy& pi,
                        const Policy& mu) {
  if (pi.size() != prefs.size() || mu.size() != prefs.size())
    throw std::invalid_argument("policy_vs_policy: size mismatch");
  double acc = 0.0;
  for (int y = 0; y < prefs.size(); ++y) {
    if (pi[y] == 0.0) continue;
    acc += pi[y] * preference_vs_policy(prefs, y, mu);
  }
  return acc;
}

double kl_divergence(const Policy& pi, const Policy& ref) {
  if (pi.size() != ref.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  double acc = 0.0;
  for (int y = 0; y < pi.size(); ++y) {
    if (pi[y] == 0.0) continue;
    if (ref[y] == 0.0)
      throw std::domain_error(
          "kl_divergence: policy puts mass outside the reference support, "
          "divergence is infinite (action " + std::to_string(y) + ")");
    acc += pi[y] * (std::log(pi[y]) - std::log(ref[y]));
  }
  return std::max(acc, 0.0);
}

double payoff(const GameSpec& spec, const Policy& pi1, const Policy& pi2) {
  return policy_vs_policy(spec.prefs, pi1, pi2) -
         spec.tau * kl_divergence(pi1, spec.ref_policy) +
         spec.tau * kl_divergence(pi2, spec.ref_policy);
}

int sample_index(const Policy& pi, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  int last_positive = -1;
  for (int y = 0; y < pi.size(); ++y) {
    if (pi[y] > 0.0) last_positive = y;
    acc += pi[y];
    if (u < acc) return y;
  }
  return last_positive;  // u landed in the floating-point slack at the top
}

LabelledPair sample_labelled_pair(const PreferenceMatrix& prefs,
                                  const Policy& mu, const Policy& mu_prime,
                                  Rng& rng) {
  const int y = sample_index(mu, rng);
  const int y_prime = sample_index(mu_prime, rng);
  const double p = prefs(y, y_prime);
  if (rng.next_double() < p) return LabelledPair{y, y_prime};
  return LabelledPair{y_prime, y};
}

double total_variation(const Policy& a, const Policy& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("total_variation: size mismatch");
  double acc = 0.0;
  for (int y = 0; y < a.size(); ++y) acc += std::abs(a[y] - b[y]);
  return 0.5 * acc;
}

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace prefgame
