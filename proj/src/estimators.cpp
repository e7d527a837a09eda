#include "prefgame/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prefgame::estimators {

namespace {

std::vector<double> log_ratio(const PolicyLogits& logits, const Policy& ref) {
  std::vector<double> u = log_softmax(logits);
  for (int y = 0; y < ref.size(); ++y) {
    if (ref[y] == 0.0)
      throw std::domain_error(
          "estimators: reference probability is zero at action " +
          std::to_string(y));
    u[static_cast<size_t>(y)] -= std::log(ref[y]);
  }
  return u;
}

double kernel_value(const GameSpec& spec, const std::vector<double>& u, int y,
                    int y_prime) {
  return spec.prefs(y, y_prime) - 0.5 -
         spec.tau * u[static_cast<size_t>(y)] +
         spec.tau * u[static_cast<size_t>(y_prime)];
}

std::vector<double> estimate_vector(const GameSpec& spec, const Policy& pi,
                                    const std::vector<double>& u, int y,
                                    int y_prime, EstimateKind kind) {
  const int n = spec.size();
  const double f = kernel_value(spec, u, y, y_prime);
  std::vector<double> g(static_cast<size_t>(n));
  for (int z = 0; z < n; ++z) {
    const double score_y = ((z == y) ? 1.0 : 0.0) - pi[z];
    if (kind == EstimateKind::kNonContrastive) {
      g[static_cast<size_t>(z)] = -score_y * f;
    } else {
      const double score_yp = ((z == y_prime) ? 1.0 : 0.0) - pi[z];
      g[static_cast<size_t>(z)] = -0.5 * (score_y - score_yp) * f;
    }
  }
  return g;
}

EstimateStats moments_from_outcomes(
    const std::vector<double>& probs,
    const std::vector<std::vector<double>>& values, long n, bool exact) {
  EstimateStats stats;
  stats.exact = exact;
  stats.n_outcomes_or_samples = n;
  const size_t dim = values.empty() ? 0 : values.front().size();
  stats.mean.assign(dim, 0.0);
  for (size_t k = 0; k < values.size(); ++k)
    for (size_t i = 0; i < dim; ++i) stats.mean[i] += probs[k] * values[k][i];
  stats.per_coordinate_variance.assign(dim, 0.0);
  for (size_t k = 0; k < values.size(); ++k)
    for (size_t i = 0; i < dim; ++i) {
      const double d = values[k][i] - stats.mean[i];
      stats.per_coordinate_variance[i] += probs[k] * d * d;
    }
  for (double v : stats.per_coordinate_variance) stats.total_variance += v;
  return stats;
}

}  // namespace

VarianceKernel variance_kernel(const GameSpec& spec, const PolicyLogits& logits) {
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  const int n = spec.size();
  VarianceKernel kernel;
  kernel.f_values.assign(static_cast<size_t>(n),
                         std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z)
      kernel.f_values[static_cast<size_t>(y)][static_cast<size_t>(z)] =
          kernel_value(spec, u, y, z);
  return kernel;
}

std::vector<double> noncontrastive_estimate(const GameSpec& spec,
                                            const PolicyLogits& logits, int y,
                                            int y_prime) {
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  return estimate_vector(spec, pi, u, y, y_prime, EstimateKind::kNonContrastive);
}

std::vector<double> contrastive_estimate(const GameSpec& spec,
                                         const PolicyLogits& logits, int y,
                                         int y_prime) {
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  return estimate_vector(spec, pi, u, y, y_prime, EstimateKind::kContrastive);
}

EstimateStats exact_variance(const GameSpec& spec, const PolicyLogits& logits,
                             EstimateKind kind) {
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  const int n = spec.size();
  std::vector<double> probs;
  std::vector<std::vector<double>> values;
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z) {
      const double w = pi[y] * pi[z];
      if (w == 0.0) continue;
      probs.push_back(w);
      values.push_back(estimate_vector(spec, pi, u, y, z, kind));
    }
  return moments_from_outcomes(probs, values,
                               static_cast<long>(n) * static_cast<long>(n),
                               /*exact=*/true);
}

EstimateStats monte_carlo_variance(const GameSpec& spec,
                                   const PolicyLogits& logits,
                                   EstimateKind kind, long n_samples, Rng& rng) {
  if (n_samples < 2)
    throw std::invalid_argument("monte_carlo_variance: need >= 2 samples");
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  const size_t dim = static_cast<size_t>(spec.size());
  std::vector<double> sum(dim, 0.0);
  std::vector<double> sum_sq(dim, 0.0);
  for (long k = 0; k < n_samples; ++k) {
    const int y = sample_index(pi, rng);
    const int y_prime = sample_index(pi, rng);
    const std::vector<double> g = estimate_vector(spec, pi, u, y, y_prime, kind);
    for (size_t i = 0; i < dim; ++i) {
      sum[i] += g[i];
      sum_sq[i] += g[i] * g[i];
    }
  }
  EstimateStats stats;
  stats.exact = false;
  stats.n_outcomes_or_samples = n_samples;
  stats.mean.assign(dim, 0.0);
  stats.per_coordinate_variance.assign(dim, 0.0);
  const double inv = 1.0 / static_cast<double>(n_samples);
  for (size_t i = 0; i < dim; ++i) {
    stats.mean[i] = sum[i] * inv;
    stats.per_coordinate_variance[i] =
        std::max(0.0, sum_sq[i] * inv - stats.mean[i] * stats.mean[i]);
    stats.total_variance += stats.per_coordinate_variance[i];
  }
  return stats;
}

VarianceCondition variance_condition(const GameSpec& spec,
                                     const PolicyLogits& logits) {
  const Policy pi = softmax(logits);
  const std::vector<double> u = log_ratio(logits, spec.ref_policy);
  const int n = spec.size();
  VarianceCondition cond;
  cond.per_coordinate.assign(static_cast<size_t>(n), 0.0);
  for (int y = 0; y < n; ++y) {
    for (int z = 0; z < n; ++z) {
      const double w = pi[y] * pi[z];
      if (w == 0.0) continue;
      const double f = kernel_value(spec, u, y, z);
      const double f2 = f * f;
      for (int i = 0; i < n; ++i) {
        const double score_y = ((i == y) ? 1.0 : 0.0) - pi[i];
        const double score_z = ((i == z) ? 1.0 : 0.0) - pi[i];
        cond.per_coordinate[static_cast<size_t>(i)] += w * score_y * score_z * f2;
      }
    }
  }
  for (double v : cond.per_coordinate) cond.trace_value += v;
  return cond;
}

BradleyTerryFit fit_bradley_terry(const std::vector<LabelledPair>& samples,
                                  int n, double regulariser, long max_iter,
                                  double tol) {
  if (n < 2) throw std::invalid_argument("fit_bradley_terry: n must be >= 2");
  if (samples.empty())
    throw std::invalid_argument("fit_bradley_terry: need at least one sample");
  if (regulariser < 0.0)
    throw std::invalid_argument("fit_bradley_terry: regulariser must be >= 0");

  // Aggregate win counts; the likelihood depends on the samples only through
  // them. Self-pairs carry no signal and are dropped.
  std::vector<std::vector<double>> wins(static_cast<size_t>(n),
                                        std::vector<double>(static_cast<size_t>(n), 0.0));
  double total = 0.0;
  for (const LabelledPair& s : samples) {
    if (s.winner < 0 || s.winner >= n || s.loser < 0 || s.loser >= n)
      throw std::invalid_argument("fit_bradley_terry: action index out of range");
    if (s.winner == s.loser) continue;
    wins[static_cast<size_t>(s.winner)][static_cast<size_t>(s.loser)] += 1.0;
    total += 1.0;
  }
  if (total == 0.0)
    throw std::invalid_argument(
        "fit_bradley_terry: no informative samples (all self-pairs)");

  auto objective = [&](const std::vector<double>& r) {
    double acc = 0.0;
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const double c = wins[static_cast<size_t>(y)][static_cast<size_t>(z)];
        if (c == 0.0) continue;
        acc += c * log_sigmoid(r[static_cast<size_t>(y)] - r[static_cast<size_t>(z)]);
      }
    acc /= total;
    if (regulariser > 0.0) {
      double sq = 0.0;
      for (double x : r) sq += x * x;
      acc -= 0.5 * regulariser * sq;
    }
    return acc;
  };

  auto gradient = [&](const std::vector<double>& r) {
    std::vector<double> g(static_cast<size_t>(n), 0.0);
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const double c = wins[static_cast<size_t>(y)][static_cast<size_t>(z)];
        if (c == 0.0) continue;
        const double s =
            sigmoid(r[static_cast<size_t>(z)] - r[static_cast<size_t>(y)]);
        g[static_cast<size_t>(y)] += c * s;
        g[static_cast<size_t>(z)] -= c * s;
      }
    for (int y = 0; y < n; ++y) {
      g[static_cast<size_t>(y)] /= total;
      if (regulariser > 0.0)
        g[static_cast<size_t>(y)] -= regulariser * r[static_cast<size_t>(y)];
    }
    return g;
  };

  auto recentre = [&](std::vector<double>& r) {
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(n);
    for (double& x : r) x -= mean;
  };

  // Without a regulariser the maximum-likelihood scores are finite iff the
  // win digraph restricted to observed actions is strongly connected; a
  // losing (or winning) group with no reverse comparisons sends the optimum
  // to infinity.
  auto separable_counts = [&]() {
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (wins[static_cast<size_t>(y)][static_cast<size_t>(z)] > 0.0)
          seen[static_cast<size_t>(y)] = seen[static_cast<size_t>(z)] = 1;
    auto reachable = [&](bool forward) {
      std::vector<char> visited(static_cast<size_t>(n), 0);
      int start = -1;
      for (int y = 0; y < n && start < 0; ++y)
        if (seen[static_cast<size_t>(y)]) start = y;
      if (start < 0) return true;
      std::vector<int> stack = {start};
      visited[static_cast<size_t>(start)] = 1;
      while (!stack.empty()) {
        const int y = stack.back();
        stack.pop_back();
        for (int z = 0; z < n; ++z) {
          const double c = forward
                               ? wins[static_cast<size_t>(y)][static_cast<size_t>(z)]
                               : wins[static_cast<size_t>(z)][static_cast<size_t>(y)];
          if (c > 0.0 && !visited[static_cast<size_t>(z)]) {
            visited[static_cast<size_t>(z)] = 1;
            stack.push_back(z);
          }
        }
      }
      for (int y = 0; y < n; ++y)
        if (seen[static_cast<size_t>(y)] && !visited[static_cast<size_t>(y)])
          return false;
      return true;
    };
    return !(reachable(true) && reachable(false));
  };

  BradleyTerryFit fit;
  if (regulariser == 0.0) fit.separable = separable_counts();

  std::vector<double> r(static_cast<size_t>(n), 0.0);
  double obj = objective(r);
  double step = 4.0;
  constexpr double kRewardBound = 60.0;  // probability ratios beyond double resolution

  long it = 0;
  for (; it < max_iter; ++it) {
    const std::vector<double> g = gradient(r);
    double gmax = 0.0;
    for (double x : g) gmax = std::max(gmax, std::abs(x));
    if (gmax <= tol && !fit.separable) {
      fit.converged = true;
      break;
    }
    double rmax = 0.0;
    for (double x : r) rmax = std::max(rmax, std::abs(x));
    if (rmax > kRewardBound) break;
    // Backtracking ascent; accept only strict improvement so the objective
    // is nondecreasing and a stall at working precision ends the fit.
    double s = step;
    bool moved = false;
    while (s >= 1e-18) {
      std::vector<double> trial = r;
      for (int y = 0; y < n; ++y)
        trial[static_cast<size_t>(y)] += s * g[static_cast<size_t>(y)];
      recentre(trial);
      const double trial_obj = objective(trial);
      if (trial_obj > obj) {
        r = std::move(trial);
        obj = trial_obj;
        step = std::min(s * 2.0, 64.0);
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) {  // no ascent possible at working precision
      fit.converged = !fit.separable;
      break;
    }
  }

  fit.rewards = std::move(r);
  fit.iterations = it;
  fit.objective = obj;
  return fit;
}

}  // namespace prefgame::estimators
