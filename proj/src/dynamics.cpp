#include "prefgame/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace prefgame::dynamics {

namespace {

// The labelled-pair expectation counts each unordered comparison twice;
// pair-loss update directions use the per-ordered-draw convention, half of
// it, so that the 2/tau correspondence with the update kernel is exact.
constexpr double kPairLossUpdateScale = 0.5;

std::vector<double> log_ratio(const PolicyLogits& logits, const Policy& ref) {
  std::vector<double> u = log_softmax(logits);
  for (int y = 0; y < ref.size(); ++y) {
    if (ref[y] == 0.0)
      throw std::domain_error("dynamics: reference probability is zero at action " +
                              std::to_string(y));
    u[static_cast<size_t>(y)] -= std::log(ref[y]);
  }
  return u;
}

double pair_gradient_factor(losses::LossId loss, double h, double tau) {
  switch (loss) {
    case losses::LossId::kIpo:
      return 2.0 * (h - 1.0 / (2.0 * tau));
    case losses::LossId::kIpoSimplified:
      return 2.0 * tau * h - 1.0;
    case losses::LossId::kDpo:
      return -tau * sigmoid(-tau * h);
    case losses::LossId::kSlic:
      return (1.0 - tau * h > 0.0) ? -tau : 0.0;
  }
  throw std::logic_error("pair_gradient_factor: unknown loss");
}

// update contribution of one labelled pair: -scale * dldh * (e_w - e_l).
void add_pair_update(std::vector<double>& acc, losses::LossId loss,
                     const std::vector<double>& u, double tau, int w, int l,
                     double weight) {
  const double h = u[static_cast<size_t>(w)] - u[static_cast<size_t>(l)];
  const double c = -kPairLossUpdateScale * weight * pair_gradient_factor(loss, h, tau);
  acc[static_cast<size_t>(w)] += c;
  acc[static_cast<size_t>(l)] -= c;
}

// score-function update term: score(y) * (p(y > y') - centre - tau u(y)).
void add_score_update(std::vector<double>& acc, const Policy& score_base,
                      const std::vector<double>& u, double tau, int y,
                      double pref, bool centred, double weight) {
  const double scalar =
      pref - (centred ? 0.5 : 0.0) - tau * u[static_cast<size_t>(y)];
  for (int z = 0; z < score_base.size(); ++z) {
    const double score = (z == y ? 1.0 : 0.0) - score_base[z];
    acc[static_cast<size_t>(z)] += weight * score * scalar;
  }
}

}  // namespace

AlgorithmId AlgorithmId::online_ipo() { return AlgorithmId{}; }

AlgorithmId AlgorithmId::ipo_md(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("AlgorithmId: beta must be in [0,1]");
  AlgorithmId a;
  a.kind = Kind::kIpoMd;
  a.beta = beta;
  return a;
}

AlgorithmId AlgorithmId::offline_ipo(Policy mu) {
  AlgorithmId a;
  a.kind = Kind::kOfflineIpo;
  a.mu = std::move(mu);
  return a;
}

AlgorithmId AlgorithmId::nash_md_pg(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("AlgorithmId: beta must be in [0,1]");
  AlgorithmId a;
  a.kind = Kind::kNashMdPg;
  a.beta = beta;
  return a;
}

AlgorithmId AlgorithmId::self_play() {
  AlgorithmId a;
  a.kind = Kind::kSelfPlay;
  return a;
}

AlgorithmId AlgorithmId::online_dpo() {
  AlgorithmId a;
  a.kind = Kind::kOnlineDpo;
  return a;
}

AlgorithmId AlgorithmId::online_slic() {
  AlgorithmId a;
  a.kind = Kind::kOnlineSlic;
  return a;
}

AlgorithmId AlgorithmId::rlhf_pg(std::vector<double> reward) {
  if (reward.empty())
    throw std::invalid_argument("AlgorithmId: rlhf-pg needs a reward vector");
  AlgorithmId a;
  a.kind = Kind::kRlhfPg;
  a.reward = std::move(reward);
  return a;
}

std::string AlgorithmId::name() const {
  switch (kind) {
    case Kind::kOnlineIpo: return "online-ipo";
    case Kind::kIpoMd: return "ipo-md";
    case Kind::kOfflineIpo: return "offline-ipo";
    case Kind::kNashMdPg: return "nash-md-pg";
    case Kind::kSelfPlay: return "self-play";
    case Kind::kOnlineDpo: return "online-dpo";
    case Kind::kOnlineSlic: return "online-slic";
    case Kind::kRlhfPg: return "rlhf-pg";
  }
  return "?";
}

bool AlgorithmId::is_loss_family() const {
  switch (kind) {
    case Kind::kOnlineIpo:
    case Kind::kIpoMd:
    case Kind::kOfflineIpo:
    case Kind::kOnlineDpo:
    case Kind::kOnlineSlic:
      return true;
    default:
      return false;
  }
}

std::optional<losses::LossId> AlgorithmId::loss_id() const {
  switch (kind) {
    case Kind::kOnlineIpo:
    case Kind::kIpoMd:
    case Kind::kOfflineIpo:
      return losses::LossId::kIpo;
    case Kind::kOnlineDpo:
      return losses::LossId::kDpo;
    case Kind::kOnlineSlic:
      return losses::LossId::kSlic;
    default:
      return std::nullopt;
  }
}

std::optional<losses::SamplingScheme> AlgorithmId::sampling() const {
  switch (kind) {
    case Kind::kOnlineIpo:
    case Kind::kOnlineDpo:
    case Kind::kOnlineSlic:
      return losses::SamplingScheme::current_policy();
    case Kind::kIpoMd:
      return losses::SamplingScheme::geometric_mixture(beta);
    case Kind::kOfflineIpo:
      if (!mu) throw std::invalid_argument("offline-ipo: missing sampling policy");
      return losses::SamplingScheme::fixed(*mu);
    default:
      return std::nullopt;
  }
}

std::vector<double> gradient_kernel_g(const GameSpec& spec,
                                      const PolicyLogits& logits, double beta,
                                      int y, bool centred, ScoreKind score) {
  if (y < 0 || y >= spec.size())
    throw std::invalid_argument("gradient_kernel_g: action out of range");
  const Policy pi = softmax(logits);
  const Policy mixture = geometric_mixture(pi, spec.ref_policy, beta);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  const double scalar = preference_vs_policy(spec.prefs, y, mixture) -
                        (centred ? 0.5 : 0.0) -
                        spec.tau * u[static_cast<size_t>(y)];
  const Policy& base = (score == ScoreKind::kPolicy) ? pi : mixture;
  std::vector<double> g(static_cast<size_t>(spec.size()));
  for (int z = 0; z < spec.size(); ++z)
    g[static_cast<size_t>(z)] = (((z == y) ? 1.0 : 0.0) - base[z]) * scalar;
  return g;
}

std::vector<double> expected_update(const AlgorithmId& algo,
                                    const GameSpec& spec,
                                    const PolicyLogits& logits) {
  const int n = spec.size();
  if (logits.size() != n)
    throw std::invalid_argument("expected_update: logits size mismatch");

  if (algo.loss_id() == losses::LossId::kIpo) {
    // Squared-loss family: the update is assembled from row preference
    // means, (2/tau) E_{y~w}[(e_y - w)(p(y > w) - tau log(pi(y)/ref(y)))]
    // with w the sampling distribution. For every anti-symmetric preference
    // matrix this equals the per-ordered-draw loss descent direction,
    // -1/2 the population-loss gradient, exactly; the check suites assert
    // that equality. Unlike the loss gradient it also keeps the documented
    // closed-form fixed points when a preference table is only available
    // as printed, with inconsistent pair sums.
    const Policy w = losses::resolve_sampling(*algo.sampling(), logits, spec.ref_policy);
    const std::vector<double> u = log_ratio(logits, spec.ref_policy);
    std::vector<double> acc(static_cast<size_t>(n), 0.0);
    for (int y = 0; y < n; ++y) {
      if (w[y] == 0.0) continue;
      const double scalar = preference_vs_policy(spec.prefs, y, w) -
                            spec.tau * u[static_cast<size_t>(y)];
      for (int z = 0; z < n; ++z)
        acc[static_cast<size_t>(z)] +=
            w[y] * (((z == y) ? 1.0 : 0.0) - w[z]) * scalar;
    }
    for (double& x : acc) x *= 2.0 / spec.tau;
    return acc;
  }

  if (algo.is_loss_family()) {
    std::vector<double> grad =
        losses::population_gradient(*algo.loss_id(), logits, spec, *algo.sampling());
    for (double& g : grad) g *= -kPairLossUpdateScale;
    return grad;
  }

  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  std::vector<double> acc(static_cast<size_t>(n), 0.0);

  switch (algo.kind) {
    case AlgorithmId::Kind::kSelfPlay: {
      for (int y = 0; y < n; ++y)
        add_score_update(acc, pi, u, spec.tau, y,
                         preference_vs_policy(spec.prefs, y, pi),
                         /*centred=*/false, pi[y]);
      return acc;
    }
    case AlgorithmId::Kind::kNashMdPg: {
      const Policy mixture = geometric_mixture(pi, spec.ref_policy, algo.beta);
      for (int y = 0; y < n; ++y)
        add_score_update(acc, pi, u, spec.tau, y,
                         preference_vs_policy(spec.prefs, y, mixture),
                         /*centred=*/false, pi[y]);
      return acc;
    }
    case AlgorithmId::Kind::kRlhfPg: {
      if (static_cast<int>(algo.reward.size()) != n)
        throw std::invalid_argument("rlhf-pg: reward size mismatch");
      for (int y = 0; y < n; ++y) {
        const double scalar =
            algo.reward[static_cast<size_t>(y)] - spec.tau * u[static_cast<size_t>(y)];
        for (int z = 0; z < n; ++z)
          acc[static_cast<size_t>(z)] +=
              pi[y] * ((z == y ? 1.0 : 0.0) - pi[z]) * scalar;
      }
      return acc;
    }
    default:
      throw std::logic_error("expected_update: unhandled algorithm");
  }
}

std::vector<double> stochastic_update(const AlgorithmId& algo,
                                      const GameSpec& spec,
                                      const PolicyLogits& logits,
                                      int batch_size, Rng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("stochastic_update: batch_size must be >= 1");
  const int n = spec.size();
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  std::vector<double> acc(static_cast<size_t>(n), 0.0);

  if (algo.is_loss_family()) {
    const losses::LossId loss = *algo.loss_id();
    const Policy nu = losses::resolve_sampling(*algo.sampling(), logits, spec.ref_policy);
    for (int b = 0; b < batch_size; ++b) {
      const int y = sample_index(nu, rng);
      const int y_prime = sample_index(nu, rng);
      if (algo.expected_label) {
        const double p = spec.prefs(y, y_prime);
        add_pair_update(acc, loss, u, spec.tau, y, y_prime, p);
        add_pair_update(acc, loss, u, spec.tau, y_prime, y, 1.0 - p);
      } else {
        const double p = spec.prefs(y, y_prime);
        if (rng.next_double() < p)
          add_pair_update(acc, loss, u, spec.tau, y, y_prime, 1.0);
        else
          add_pair_update(acc, loss, u, spec.tau, y_prime, y, 1.0);
      }
    }
  } else if (algo.kind == AlgorithmId::Kind::kSelfPlay ||
             algo.kind == AlgorithmId::Kind::kNashMdPg) {
    const Policy opponent =
        algo.kind == AlgorithmId::Kind::kSelfPlay
            ? pi
            : geometric_mixture(pi, spec.ref_policy, algo.beta);
    for (int b = 0; b < batch_size; ++b) {
      const int y = sample_index(pi, rng);
      const int y_prime = sample_index(opponent, rng);
      add_score_update(acc, pi, u, spec.tau, y, spec.prefs(y, y_prime),
                       algo.centred_score, 1.0);
    }
  } else if (algo.kind == AlgorithmId::Kind::kRlhfPg) {
    if (static_cast<int>(algo.reward.size()) != n)
      throw std::invalid_argument("rlhf-pg: reward size mismatch");
    for (int b = 0; b < batch_size; ++b) {
      const int y = sample_index(pi, rng);
      const double scalar =
          algo.reward[static_cast<size_t>(y)] - spec.tau * u[static_cast<size_t>(y)];
      for (int z = 0; z < n; ++z)
        acc[static_cast<size_t>(z)] += ((z == y ? 1.0 : 0.0) - pi[z]) * scalar;
    }
  } else {
    throw std::logic_error("stochastic_update: unhandled algorithm");
  }

  for (double& x : acc) x /= static_cast<double>(batch_size);
  return acc;
}

std::vector<double> OutcomeDistribution::mean() const {
  std::vector<double> m(updates.empty() ? 0 : updates.front().size(), 0.0);
  for (size_t k = 0; k < updates.size(); ++k)
    for (size_t i = 0; i < m.size(); ++i) m[i] += probabilities[k] * updates[k][i];
  return m;
}

std::vector<double> OutcomeDistribution::coordinate_variance() const {
  const std::vector<double> m = mean();
  std::vector<double> var(m.size(), 0.0);
  for (size_t k = 0; k < updates.size(); ++k)
    for (size_t i = 0; i < m.size(); ++i) {
      const double d = updates[k][i] - m[i];
      var[i] += probabilities[k] * d * d;
    }
  return var;
}

double OutcomeDistribution::total_variance() const {
  double acc = 0.0;
  for (double v : coordinate_variance()) acc += v;
  return acc;
}

OutcomeDistribution stochastic_outcome_distribution(const AlgorithmId& algo,
                                                    const GameSpec& spec,
                                                    const PolicyLogits& logits) {
  const int n = spec.size();
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  OutcomeDistribution dist;

  auto push = [&](double prob, std::vector<double> update) {
    if (prob == 0.0) return;
    dist.probabilities.push_back(prob);
    dist.updates.push_back(std::move(update));
  };

  if (algo.is_loss_family()) {
    const losses::LossId loss = *algo.loss_id();
    const Policy nu = losses::resolve_sampling(*algo.sampling(), logits, spec.ref_policy);
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) {
        const double w = nu[y] * nu[z];
        if (w == 0.0) continue;
        const double p = spec.prefs(y, z);
        if (algo.expected_label) {
          std::vector<double> up(static_cast<size_t>(n), 0.0);
          add_pair_update(up, loss, u, spec.tau, y, z, p);
          add_pair_update(up, loss, u, spec.tau, z, y, 1.0 - p);
          push(w, std::move(up));
        } else {
          std::vector<double> win(static_cast<size_t>(n), 0.0);
          add_pair_update(win, loss, u, spec.tau, y, z, 1.0);
          push(w * p, std::move(win));
          std::vector<double> lose(static_cast<size_t>(n), 0.0);
          add_pair_update(lose, loss, u, spec.tau, z, y, 1.0);
          push(w * (1.0 - p), std::move(lose));
        }
      }
    }
  } else if (algo.kind == AlgorithmId::Kind::kSelfPlay ||
             algo.kind == AlgorithmId::Kind::kNashMdPg) {
    const Policy opponent =
        algo.kind == AlgorithmId::Kind::kSelfPlay
            ? pi
            : geometric_mixture(pi, spec.ref_policy, algo.beta);
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) {
        const double w = pi[y] * opponent[z];
        if (w == 0.0) continue;
        std::vector<double> up(static_cast<size_t>(n), 0.0);
        add_score_update(up, pi, u, spec.tau, y, spec.prefs(y, z),
                         algo.centred_score, 1.0);
        push(w, std::move(up));
      }
    }
  } else if (algo.kind == AlgorithmId::Kind::kRlhfPg) {
    for (int y = 0; y < n; ++y) {
      if (pi[y] == 0.0) continue;
      const double scalar =
          algo.reward[static_cast<size_t>(y)] - spec.tau * u[static_cast<size_t>(y)];
      std::vector<double> up(static_cast<size_t>(n), 0.0);
      for (int z = 0; z < n; ++z)
        up[static_cast<size_t>(z)] = ((z == y ? 1.0 : 0.0) - pi[z]) * scalar;
      push(pi[y], std::move(up));
    }
  } else {
    throw std::logic_error("stochastic_outcome_distribution: unhandled algorithm");
  }
  return dist;
}

solvers::FixedPointReport matched_fixed_point(const AlgorithmId& algo,
                                              const GameSpec& spec, double tol) {
  switch (algo.kind) {
    case AlgorithmId::Kind::kOnlineIpo:
    case AlgorithmId::Kind::kSelfPlay:
    case AlgorithmId::Kind::kOnlineDpo:
    case AlgorithmId::Kind::kOnlineSlic:
      return solvers::solve_regularised_nash(spec, tol);
    case AlgorithmId::Kind::kIpoMd:
    case AlgorithmId::Kind::kNashMdPg:
      return solvers::solve_ipo_md_fixed_point(spec, algo.beta, tol);
    case AlgorithmId::Kind::kOfflineIpo:
      return solvers::FixedPointReport{solvers::best_response(spec, *algo.mu),
                                       0.0, 0, true};
    case AlgorithmId::Kind::kRlhfPg:
      return solvers::FixedPointReport{
          solvers::rlhf_closed_form(spec.ref_policy, spec.tau, algo.reward),
          0.0, 0, true};
  }
  throw std::logic_error("matched_fixed_point: unhandled algorithm");
}

namespace {

// Diagnostic scalar recorded along a trajectory. The pair-loss algorithms
// report their own population loss; the score-function game algorithms
// report the squared loss under their sampling scheme (they share its fixed
// point); the policy-gradient baseline reports its negated objective.
double trajectory_loss(const AlgorithmId& algo, const GameSpec& spec,
                       const PolicyLogits& logits) {
  if (algo.is_loss_family())
    return losses::population_loss(*algo.loss_id(), logits, spec, *algo.sampling());
  switch (algo.kind) {
    case AlgorithmId::Kind::kSelfPlay:
      return losses::population_loss(losses::LossId::kIpo, logits, spec,
                                     losses::SamplingScheme::current_policy());
    case AlgorithmId::Kind::kNashMdPg:
      return losses::population_loss(
          losses::LossId::kIpo, logits, spec,
          losses::SamplingScheme::geometric_mixture(algo.beta));
    case AlgorithmId::Kind::kRlhfPg: {
      const Policy pi = softmax(logits);
      double expected_reward = 0.0;
      for (int y = 0; y < pi.size(); ++y)
        expected_reward += pi[y] * algo.reward[static_cast<size_t>(y)];
      return spec.tau * kl_divergence(pi, spec.ref_policy) - expected_reward;
    }
    default:
      throw std::logic_error("trajectory_loss: unhandled algorithm");
  }
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Trajectory run_dynamics(const DynamicsConfig& config) {
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("run_dynamics: learning_rate must be > 0");
  if (config.steps < 1)
    throw std::invalid_argument("run_dynamics: steps must be >= 1");
  if (config.record_every < 1)
    throw std::invalid_argument("run_dynamics: record_every must be >= 1");
  if (!config.spec.ref_policy.interior())
    throw std::invalid_argument(
        "run_dynamics: reference policy must be interior (dynamics start at "
        "the reference)");

  Trajectory traj;
  traj.fixed_point = matched_fixed_point(config.algorithm, config.spec);

  PolicyLogits logits = PolicyLogits::from_policy(config.spec.ref_policy);
  Rng rng(config.seed);

  auto compute_update = [&](const PolicyLogits& at) {
    return config.mode == DynamicsConfig::Mode::kExpected
               ? expected_update(config.algorithm, config.spec, at)
               : stochastic_update(config.algorithm, config.spec, at,
                                   config.batch_size, rng);
  };

  auto record = [&](long step, const PolicyLogits& at,
                    const std::vector<double>& update) {
    TrajectoryRecord rec;
    rec.step = step;
    rec.policy = softmax(at);
    rec.population_loss = trajectory_loss(config.algorithm, config.spec, at);
    rec.nash_residual = total_variation(rec.policy, traj.fixed_point.policy);
    rec.kl_to_ref = kl_divergence(rec.policy, config.spec.ref_policy);
    rec.grad_norm = l2_norm(update);
    traj.records.push_back(std::move(rec));
  };

  long step = 0;
  for (; step < config.steps; ++step) {
    const std::vector<double> update = compute_update(logits);
    if (!all_finite(update)) {
      traj.diverged = true;
      break;
    }
    if (step % config.record_every == 0) record(step, logits, update);
    std::vector<double> phi = logits.values();
    for (int i = 0; i < logits.size(); ++i)
      phi[static_cast<size_t>(i)] += config.learning_rate * update[static_cast<size_t>(i)];
    if (!all_finite(phi)) {
      traj.diverged = true;
      break;
    }
    logits = PolicyLogits(std::move(phi)).canonical();
  }
  if (!traj.diverged) {
    const std::vector<double> final_update = compute_update(logits);
    record(step, logits, all_finite(final_update)
                             ? final_update
                             : std::vector<double>(static_cast<size_t>(logits.size()), 0.0));
  }

  traj.steps_run = step;
  traj.final_policy = softmax(logits);
  traj.final_residual = total_variation(traj.final_policy, traj.fixed_point.policy);
  traj.converged = !traj.diverged && traj.fixed_point.converged &&
                   traj.final_residual <= config.tolerance;
  return traj;
}

}  // namespace prefgame::dynamics
