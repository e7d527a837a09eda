#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "prefgame/core.hpp"

namespace prefgame::losses {

// The implemented pair losses. All are functions of the reference-normalised
// log-ratio gap h = log(pi(w)/ref(w)) - log(pi(l)/ref(l)) for a labelled pair
// (w, l), except the simplified squared loss which differs from the squared
// loss by terms that do not depend on the policy parameters (its gradient is
// tau times the squared-loss gradient).
enum class LossId {
  kIpo,            // (h - 1/(2 tau))^2
  kIpoSimplified,  // -log(pi(w)/pi(l)) + tau h^2
  kDpo,            // -log sigmoid(tau h)
  kSlic,           // max(0, 1 - tau h)
};

const char* loss_name(LossId id);

// The distribution generating both elements of a comparison pair. It is
// always treated as data (held fixed) when differentiating: even when it is
// the current policy or a mixture involving it, gradients never flow through
// the sampling weights.
struct SamplingScheme {
  enum class Kind { kFixed, kCurrentPolicy, kGeometricMixture };

  Kind kind = Kind::kCurrentPolicy;
  std::optional<Policy> mu;  // kFixed
  double beta = 0.0;         // kGeometricMixture

  static SamplingScheme fixed(Policy mu);
  static SamplingScheme current_policy();
  static SamplingScheme geometric_mixture(double beta);
};

// Materialise the sampling distribution at the current policy.
Policy resolve_sampling(const SamplingScheme& sampling,
                        const PolicyLogits& logits, const Policy& ref);

// Loss of a single labelled pair. Throws if the reference assigns zero
// probability to either action.
double pair_loss(LossId loss, const PolicyLogits& logits, const Policy& ref,
                 double tau, const LabelledPair& pair);

// Bounded variant sigmoid(tau h) of the preference pair loss, kept only for
// side-by-side comparison with the log-sigmoid loss; not part of LossId and
// never used by the population machinery.
double dpo_sigma_pair_loss(const PolicyLogits& logits, const Policy& ref,
                           double tau, const LabelledPair& pair);

// p_value * pair_loss(y as winner) + (1 - p_value) * pair_loss(y' as winner).
double expected_label_pair_loss(LossId loss, const PolicyLogits& logits,
                                const Policy& ref, double tau, int y,
                                int y_prime, double p_value);

// Exact expectation of pair_loss over ordered draws (Y, Y') from the sampling
// distribution and labels from the preference probabilities, by full
// enumeration of all n^2 ordered pairs and both label orders.
double population_loss(LossId loss, const PolicyLogits& logits,
                       const GameSpec& spec, const SamplingScheme& sampling);

// Exact gradient of population_loss with respect to the logits, holding the
// sampling distribution fixed. The log-sigmoid loss uses the closed-form
// value-space gradient mapped through the softmax Jacobian; the others
// accumulate per-pair chain-rule terms.
std::vector<double> population_gradient(LossId loss, const PolicyLogits& logits,
                                        const GameSpec& spec,
                                        const SamplingScheme& sampling);

// Central finite differences of a scalar function of the logits.
std::vector<double> finite_difference_gradient(
    const std::function<double(const PolicyLogits&)>& f,
    const PolicyLogits& logits, double step);

}  // namespace prefgame::losses
