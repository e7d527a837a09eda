#include "prefgame/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "prefgame/generators.hpp"
#include "prefgame/losses.hpp"
#include "prefgame/solvers.hpp"

namespace prefgame::analysis {

StationarityReport online_dpo_stationarity_residual(const PreferenceMatrix& prefs,
                                                    const Policy& pi) {
  if (pi.size() != prefs.size())
    throw std::invalid_argument("online_dpo_stationarity_residual: size mismatch");
  if (!pi.interior())
    throw std::invalid_argument(
        "online_dpo_stationarity_residual: policy must be interior");
  const int n = prefs.size();
  std::vector<double> p_vs_pi(static_cast<size_t>(n));
  for (int y = 0; y < n; ++y)
    p_vs_pi[static_cast<size_t>(y)] = preference_vs_policy(prefs, y, pi);

  StationarityReport report;
  report.residuals.assign(static_cast<size_t>(n), 0.0);
  for (int y = 0; y < n; ++y) {
    double rhs = 0.0;
    for (int z = 0; z < n; ++z)
      rhs += pi[z] * sigmoid(p_vs_pi[static_cast<size_t>(y)] -
                             p_vs_pi[static_cast<size_t>(z)]);
    const double r = p_vs_pi[static_cast<size_t>(y)] - rhs;
    report.residuals[static_cast<size_t>(y)] = r;
    report.max_abs = std::max(report.max_abs, std::abs(r));
  }
  return report;
}

double online_dpo_gradient_norm(const GameSpec& spec, const Policy& pi) {
  if (!pi.interior())
    throw std::invalid_argument("online_dpo_gradient_norm: policy must be interior");
  const PolicyLogits logits = PolicyLogits::from_policy(pi);
  return l2_norm(losses::population_gradient(losses::LossId::kDpo, logits, spec,
                                             losses::SamplingScheme::fixed(pi)));
}

std::pair<double, double> two_action_residuals(double p, double alpha) {
  if (!(p >= 0.0 && p <= 1.0) || !(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("two_action_residuals: p, alpha must be in [0,1]");
  const double gap = 1.0 - p - sigmoid(0.5 - p);
  return {(1.0 - alpha) * gap, -alpha * gap};
}

double bt_stationarity_check(const Policy& ref, double tau,
                             const std::vector<double>& reward,
                             const Policy& mu) {
  if (!ref.interior())
    throw std::invalid_argument("bt_stationarity_check: reference must be interior");
  if (static_cast<int>(reward.size()) != ref.size() || mu.size() != ref.size())
    throw std::invalid_argument("bt_stationarity_check: size mismatch");
  const GameSpec spec(bradley_terry_matrix(reward), ref, tau);
  const Policy pi_r = solvers::rlhf_closed_form(ref, tau, reward);
  const PolicyLogits logits = PolicyLogits::from_policy(pi_r);
  const std::vector<double> grad = losses::population_gradient(
      losses::LossId::kDpo, logits, spec, losses::SamplingScheme::fixed(mu));
  return l2_norm(grad);
}

DegeneracyReport dpo_degeneracy_demo(const GameSpec& spec, const Policy& mu,
                                     const Policy& pi_dpo, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("dpo_degeneracy_demo: alpha must be > 0");
  if (mu.size() != spec.size() || pi_dpo.size() != spec.size())
    throw std::invalid_argument("dpo_degeneracy_demo: size mismatch");
  if (mu.interior())
    throw std::invalid_argument(
        "dpo_degeneracy_demo: mu must have at least one zero entry");
  if (!pi_dpo.interior())
    throw std::invalid_argument("dpo_degeneracy_demo: pi_dpo must be interior");

  // Scale the candidate on the support of mu, keep the off-support mass as
  // is, renormalise. Probability ratios inside the support are unchanged.
  std::vector<double> scaled(static_cast<size_t>(spec.size()));
  for (int y = 0; y < spec.size(); ++y)
    scaled[static_cast<size_t>(y)] = (mu[y] > 0.0) ? alpha * pi_dpo[y] : pi_dpo[y];
  const Policy pi_alpha = Policy::normalized(std::move(scaled));
  const PolicyLogits logits = PolicyLogits::from_policy(pi_alpha);
  const losses::SamplingScheme sampling = losses::SamplingScheme::fixed(mu);

  DegeneracyReport report;
  report.dpo_gradient_norm = l2_norm(
      losses::population_gradient(losses::LossId::kDpo, logits, spec, sampling));
  report.ipo_gradient_norm = l2_norm(
      losses::population_gradient(losses::LossId::kIpo, logits, spec, sampling));
  return report;
}

}  // namespace prefgame::analysis
