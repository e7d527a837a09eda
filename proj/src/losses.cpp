#include "prefgame/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prefgame::losses {

namespace {

// log(pi/ref) per action; the shared building block of every loss.
std::vector<double> log_ratio_table(const PolicyLogits& logits,
                                    const Policy& ref) {
  if (logits.size() != ref.size())
    throw std::invalid_argument("losses: logits/reference size mismatch");
  std::vector<double> u = log_softmax(logits);
  for (int y = 0; y < ref.size(); ++y) {
    if (ref[y] == 0.0)
      throw std::domain_error(
          "losses: reference probability is zero at action " +
          std::to_string(y));
    u[static_cast<size_t>(y)] -= std::log(ref[y]);
  }
  return u;
}

double pair_value(LossId loss, const std::vector<double>& log_pi,
                  const std::vector<double>& u, double tau, int w, int l) {
  const double h = u[static_cast<size_t>(w)] - u[static_cast<size_t>(l)];
  switch (loss) {
    case LossId::kIpo: {
      const double d = h - 1.0 / (2.0 * tau);
      return d * d;
    }
    case LossId::kIpoSimplified:
      return -(log_pi[static_cast<size_t>(w)] - log_pi[static_cast<size_t>(l)]) +
             tau * h * h;
    case LossId::kDpo:
      return -log_sigmoid(tau * h);
    case LossId::kSlic:
      return std::max(0.0, 1.0 - tau * h);
  }
  throw std::logic_error("pair_value: unknown loss");
}

// d(pair loss)/dh; the logit gradient of a pair is this factor times
// (e_w - e_l). At the hinge kink (1 - tau h == 0) the flat-side subgradient
// 0 is used.
double pair_dldh(LossId loss, double h, double tau) {
  switch (loss) {
    case LossId::kIpo:
      return 2.0 * (h - 1.0 / (2.0 * tau));
    case LossId::kIpoSimplified:
      return 2.0 * tau * h - 1.0;
    case LossId::kDpo:
      return -tau * sigmoid(-tau * h);
    case LossId::kSlic:
      return (1.0 - tau * h > 0.0) ? -tau : 0.0;
  }
  throw std::logic_error("pair_dldh: unknown loss");
}

}  // namespace

const char* loss_name(LossId id) {
  switch (id) {
    case LossId::kIpo: return "ipo";
    case LossId::kIpoSimplified: return "ipo-simplified";
    case LossId::kDpo: return "dpo";
    case LossId::kSlic: return "slic";
  }
  return "?";
}

SamplingScheme SamplingScheme::fixed(Policy mu) {
  SamplingScheme s;
  s.kind = Kind::kFixed;
  s.mu = std::move(mu);
  return s;
}

SamplingScheme SamplingScheme::current_policy() {
  SamplingScheme s;
  s.kind = Kind::kCurrentPolicy;
  return s;
}

SamplingScheme SamplingScheme::geometric_mixture(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("SamplingScheme: beta must be in [0,1]");
  SamplingScheme s;
  s.kind = Kind::kGeometricMixture;
  s.beta = beta;
  return s;
}

Policy resolve_sampling(const SamplingScheme& sampling,
                        const PolicyLogits& logits, const Policy& ref) {
  switch (sampling.kind) {
    case SamplingScheme::Kind::kFixed:
      if (!sampling.mu) throw std::invalid_argument("SamplingScheme: missing mu");
      return *sampling.mu;
    case SamplingScheme::Kind::kCurrentPolicy:
      return softmax(logits);
    case SamplingScheme::Kind::kGeometricMixture:
      return geometric_mixture(softmax(logits), ref, sampling.beta);
  }
  throw std::logic_error("resolve_sampling: unknown kind");
}

double pair_loss(LossId loss, const PolicyLogits& logits, const Policy& ref,
                 double tau, const LabelledPair& pair) {
  if (!(tau > 0.0)) throw std::invalid_argument("pair_loss: tau must be > 0");
  if (pair.winner < 0 || pair.winner >= logits.size() || pair.loser < 0 ||
      pair.loser >= logits.size())
    throw std::invalid_argument("pair_loss: action index out of range");
  const std::vector<double> log_pi = log_softmax(logits);
  const std::vector<double> u = log_ratio_table(logits, ref);
  return pair_value(loss, log_pi, u, tau, pair.winner, pair.loser);
}

double dpo_sigma_pair_loss(const PolicyLogits& logits, const Policy& ref,
                           double tau, const LabelledPair& pair) {
  const std::vector<double> u = log_ratio_table(logits, ref);
  const double h = u[static_cast<size_t>(pair.winner)] -
                   u[static_cast<size_t>(pair.loser)];
  return sigmoid(tau * h);
}

double expected_label_pair_loss(LossId loss, const PolicyLogits& logits,
                                const Policy& ref, double tau, int y,
                                int y_prime, double p_value) {
  if (!(p_value >= 0.0 && p_value <= 1.0))
    throw std::invalid_argument("expected_label_pair_loss: p_value in [0,1]");
  return p_value * pair_loss(loss, logits, ref, tau, LabelledPair{y, y_prime}) +
         (1.0 - p_value) *
             pair_loss(loss, logits, ref, tau, LabelledPair{y_prime, y});
}

double population_loss(LossId loss, const PolicyLogits& logits,
                       const GameSpec& spec, const SamplingScheme& sampling) {
  const Policy nu = resolve_sampling(sampling, logits, spec.ref_policy);
  const std::vector<double> log_pi = log_softmax(logits);
  const std::vector<double> u = log_ratio_table(logits, spec.ref_policy);
  const int n = spec.size();
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    if (nu[y] == 0.0) continue;
    for (int z = 0; z < n; ++z) {
      const double w = nu[y] * nu[z];
      if (w == 0.0) continue;
      const double p = spec.prefs(y, z);
      acc += w * (p * pair_value(loss, log_pi, u, spec.tau, y, z) +
                  (1.0 - p) * pair_value(loss, log_pi, u, spec.tau, z, y));
    }
  }
  return acc;
}

std::vector<double> population_gradient(LossId loss, const PolicyLogits& logits,
                                        const GameSpec& spec,
                                        const SamplingScheme& sampling) {
  const Policy nu = resolve_sampling(sampling, logits, spec.ref_policy);
  const std::vector<double> u = log_ratio_table(logits, spec.ref_policy);
  const int n = spec.size();
  std::vector<double> grad(static_cast<size_t>(n), 0.0);

  if (loss == LossId::kDpo) {
    // Value-space gradient v of the maximisation objective, pushed through
    // the softmax Jacobian: dJ/dphi = v - pi * sum(v); the loss gradient is
    // the negative.
    const Policy pi = softmax(logits);
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    double v_sum = 0.0;
    for (int y = 0; y < n; ++y) {
      if (nu[y] == 0.0) continue;
      double inner = 0.0;
      for (int z = 0; z < n; ++z) {
        if (nu[z] == 0.0) continue;
        const double s = spec.tau * (u[static_cast<size_t>(y)] -
                                     u[static_cast<size_t>(z)]);
        inner += nu[z] * (spec.prefs(y, z) - sigmoid(s));
      }
      v[static_cast<size_t>(y)] = 2.0 * spec.tau * nu[y] * inner;
      v_sum += v[static_cast<size_t>(y)];
    }
    for (int y = 0; y < n; ++y)
      grad[static_cast<size_t>(y)] = pi[y] * v_sum - v[static_cast<size_t>(y)];
    return grad;
  }

  for (int y = 0; y < n; ++y) {
    if (nu[y] == 0.0) continue;
    for (int z = 0; z < n; ++z) {
      if (z == y || nu[z] == 0.0) continue;
      const double w = nu[y] * nu[z];
      const double p = spec.prefs(y, z);
      const double h = u[static_cast<size_t>(y)] - u[static_cast<size_t>(z)];
      // winner y with weight p, winner z with weight 1 - p; the pair
      // gradient is dldh * (e_winner - e_loser).
      const double coeff =
          w * (p * pair_dldh(loss, h, spec.tau) -
               (1.0 - p) * pair_dldh(loss, -h, spec.tau));
      grad[static_cast<size_t>(y)] += coeff;
      grad[static_cast<size_t>(z)] -= coeff;
    }
  }
  return grad;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const PolicyLogits&)>& f,
    const PolicyLogits& logits, double step) {
  if (!(step > 0.0))
    throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  const int n = logits.size();
  std::vector<double> grad(static_cast<size_t>(n));
  std::vector<double> phi = logits.values();
  for (int i = 0; i < n; ++i) {
    const double saved = phi[static_cast<size_t>(i)];
    phi[static_cast<size_t>(i)] = saved + step;
    const double fp = f(PolicyLogits(phi));
    phi[static_cast<size_t>(i)] = saved - step;
    const double fm = f(PolicyLogits(phi));
    phi[static_cast<size_t>(i)] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::domain_error(
          "finite_difference_gradient: non-finite function value");
    grad[static_cast<size_t>(i)] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace prefgame::losses
