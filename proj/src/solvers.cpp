#include "prefgame/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefgame::solvers {

namespace {

// ref(y) * exp(score(y) / tau) normalised in log space. Entries with
// ref(y) == 0 stay at zero.
Policy tilt(const Policy& ref, double tau, const std::vector<double>& score) {
  const int n = ref.size();
  std::vector<double> logw(static_cast<size_t>(n));
  double best = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < n; ++y) {
    logw[static_cast<size_t>(y)] =
        ref[y] > 0.0 ? std::log(ref[y]) + score[static_cast<size_t>(y)] / tau
                     : -std::numeric_limits<double>::infinity();
    best = std::max(best, logw[static_cast<size_t>(y)]);
  }
  if (!std::isfinite(best))
    throw std::domain_error("best_response: reference policy has no support");
  std::vector<double> w(static_cast<size_t>(n));
  for (int y = 0; y < n; ++y)
    w[static_cast<size_t>(y)] = std::isfinite(logw[static_cast<size_t>(y)])
                                    ? std::exp(logw[static_cast<size_t>(y)] - best)
                                    : 0.0;
  return Policy::normalized(std::move(w));
}

double sup_distance(const Policy& a, const Policy& b) {
  double d = 0.0;
  for (int y = 0; y < a.size(); ++y) d = std::max(d, std::abs(a[y] - b[y]));
  return d;
}

// The fixed-point map pi -> best_response(mixture(pi, ref, beta)); beta = 0
// is the plain best-response map of the regularised game.
Policy apply_map(const GameSpec& spec, double beta, const Policy& pi) {
  const Policy opponent =
      beta == 0.0 ? pi : geometric_mixture(pi, spec.ref_policy, beta);
  const int n = spec.size();
  std::vector<double> score(static_cast<size_t>(n));
  for (int y = 0; y < n; ++y)
    score[static_cast<size_t>(y)] = preference_vs_policy(spec.prefs, y, opponent);
  return tilt(spec.ref_policy, spec.tau, score);
}

// Jacobian of the map on the simplex tangent:
//   dT/dpi = (1/tau) (diag(T) - T T^T) P  dm/dpi,
// with m the geometric mixture and
//   dm_i/dpi_j = (1-beta) m_i (delta_ij / pi_i - m_j / pi_j).
// Only valid at interior pi.
std::vector<std::vector<double>> map_jacobian(const GameSpec& spec, double beta,
                                              const Policy& pi, const Policy& mapped) {
  const int n = spec.size();
  const Policy m = beta == 0.0 ? pi : geometric_mixture(pi, spec.ref_policy, beta);
  std::vector<std::vector<double>> dm(static_cast<size_t>(n),
                                      std::vector<double>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dm[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          (1.0 - beta) * m[i] *
          (((i == j) ? 1.0 / pi[i] : 0.0) - m[j] / pi[j]);

  // ds/dpi = P dm
  std::vector<std::vector<double>> ds(static_cast<size_t>(n),
                                      std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int y = 0; y < n; ++y)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int z = 0; z < n; ++z)
        acc += spec.prefs(y, z) * dm[static_cast<size_t>(z)][static_cast<size_t>(j)];
      ds[static_cast<size_t>(y)][static_cast<size_t>(j)] = acc;
    }

  std::vector<std::vector<double>> jac(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int y = 0; y < n; ++y) {
        const double softmax_jac = mapped[i] * (((i == y) ? 1.0 : 0.0) - mapped[y]);
        acc += softmax_jac * ds[static_cast<size_t>(y)][static_cast<size_t>(j)];
      }
      jac[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc / spec.tau;
    }
  return jac;
}

// Gaussian elimination with partial pivoting; false on a singular system.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>* out) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
          std::abs(a[static_cast<size_t>(pivot)][static_cast<size_t>(col)]))
        pivot = r;
    if (std::abs(a[static_cast<size_t>(pivot)][static_cast<size_t>(col)]) < 1e-300)
      return false;
    std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(pivot)]);
    std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(pivot)]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                       a[static_cast<size_t>(col)][static_cast<size_t>(col)];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<size_t>(r)][static_cast<size_t>(c)] -=
            f * a[static_cast<size_t>(col)][static_cast<size_t>(c)];
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
    }
  }
  out->assign(static_cast<size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      acc -= a[static_cast<size_t>(r)][static_cast<size_t>(c)] * (*out)[static_cast<size_t>(c)];
    (*out)[static_cast<size_t>(r)] = acc / a[static_cast<size_t>(r)][static_cast<size_t>(r)];
  }
  return true;
}

// Damped Newton on the fixed-point defect pi - T(pi), constrained to the
// simplex tangent (the gauge 1 1^T term pins sum(delta) = 0). Line search on
// the sup defect, with a small damped map step as fallback when the Newton
// direction does not descend. Requires an interior iterate throughout.
bool newton_descent(const GameSpec& spec, double beta, double tol, long budget,
                    Policy* pi, long* iterations) {
  const int n = spec.size();
  for (long it = 0; it < budget; ++it) {
    ++*iterations;
    const Policy mapped = apply_map(spec, beta, *pi);
    double defect = sup_distance(*pi, mapped);
    if (defect <= tol) return true;
    if (!pi->interior()) return false;

    const auto jac = map_jacobian(spec, beta, *pi, mapped);
    std::vector<std::vector<double>> a(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n)));
    std::vector<double> rhs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        a[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            ((i == j) ? 1.0 : 0.0) - jac[static_cast<size_t>(i)][static_cast<size_t>(j)] +
            1.0;
      rhs[static_cast<size_t>(i)] = mapped[i] - (*pi)[i];
    }
    std::vector<double> delta;
    bool stepped = false;
    if (solve_linear(std::move(a), std::move(rhs), &delta)) {
      // keep the iterate strictly inside the simplex
      double eta = 1.0;
      for (int i = 0; i < n; ++i)
        if (delta[static_cast<size_t>(i)] < 0.0)
          eta = std::min(eta, -0.95 * (*pi)[i] / delta[static_cast<size_t>(i)]);
      for (int tries = 0; tries < 30 && eta > 1e-8; ++tries, eta *= 0.5) {
        std::vector<double> next(static_cast<size_t>(n));
        bool positive = true;
        for (int i = 0; i < n; ++i) {
          next[static_cast<size_t>(i)] = (*pi)[i] + eta * delta[static_cast<size_t>(i)];
          positive = positive && next[static_cast<size_t>(i)] > 0.0;
        }
        if (!positive) continue;
        Policy candidate = Policy::normalized(std::move(next));
        if (sup_distance(candidate, apply_map(spec, beta, candidate)) < defect) {
          *pi = std::move(candidate);
          stepped = true;
          break;
        }
      }
    }
    if (!stepped) {
      // small damped map step; keeps progress when the quadratic model is bad
      const double d = std::min(0.25, spec.tau);
      std::vector<double> next(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        next[static_cast<size_t>(i)] = (1.0 - d) * (*pi)[i] + d * mapped[i];
      *pi = Policy::normalized(std::move(next));
    }
  }
  return sup_distance(*pi, apply_map(spec, beta, *pi)) <= tol;
}

// Temperature continuation: solve a sequence of games halving tau from an
// easily solvable level down to the target, warm-starting each level. The
// plain damped iteration diverges once the map's expansion constant
// (proportional to 1/tau) passes the damping floor's stability range; Newton
// on the defect has no such limit. Iterations are charged against `budget`.
bool annealed_newton(const GameSpec& spec, double beta, double tol, long budget,
                     Policy* pi, long* iterations) {
  double level = std::max(spec.tau, 0.1);
  while (true) {
    const GameSpec level_spec(spec.prefs, spec.ref_policy, level);
    const double level_tol = level == spec.tau ? tol : std::min(1e-9, tol * 1e3);
    const long level_budget = std::min<long>(400, budget - *iterations);
    if (level_budget <= 0) return false;
    if (!newton_descent(level_spec, beta, level_tol, level_budget, pi, iterations))
      return false;
    if (level == spec.tau) return true;
    level = std::max(spec.tau, 0.5 * level);
  }
}

FixedPointReport solve_fixed_point(const GameSpec& spec, double beta, double tol,
                                   long max_iter, double damping,
                                   const std::optional<Policy>& init) {
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0))
    throw std::invalid_argument("solver: damping must be in (0, 1]");
  if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");

  Policy pi = init ? *init : spec.ref_policy;
  double d = damping;
  double prev_residual = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  double stall_mark = std::numeric_limits<double>::infinity();
  Policy best = pi;
  const long picard_budget = std::min<long>(max_iter, 20000);

  long used = 0;
  auto picard_step = [&](const Policy& mapped, double residual) {
    if (residual > prev_residual * 1.05 && d > 1.0 / 64.0) d *= 0.5;
    prev_residual = residual;
    std::vector<double> next(static_cast<size_t>(pi.size()));
    for (int y = 0; y < pi.size(); ++y)
      next[static_cast<size_t>(y)] = (1.0 - d) * pi[y] + d * mapped[y];
    pi = Policy::normalized(std::move(next));
  };

  bool stalled = false;
  while (used < picard_budget && !stalled) {
    ++used;
    const Policy mapped = apply_map(spec, beta, pi);
    const double residual = sup_distance(pi, mapped);
    if (residual <= tol) return FixedPointReport{pi, residual, used, true};
    if (residual < best_residual) {
      best_residual = residual;
      best = pi;
    }
    // no meaningful progress across a full window: hand over to Newton
    if (used % 1000 == 0) {
      stalled = best_residual > 0.9 * stall_mark;
      stall_mark = best_residual;
    }
    picard_step(mapped, residual);
  }

  // Polish the best iterate by temperature continuation with Newton steps.
  if (used < max_iter && best.interior()) {
    Policy polished = best;
    long total = used;
    if (annealed_newton(spec, beta, tol, max_iter, &polished, &total)) {
      const double residual = sup_distance(polished, apply_map(spec, beta, polished));
      if (residual <= tol) return FixedPointReport{polished, residual, total, true};
    }
    used = total;
  }

  // Honest fallback: keep iterating the damped map with the remaining budget.
  while (used < max_iter) {
    ++used;
    const Policy mapped = apply_map(spec, beta, pi);
    const double residual = sup_distance(pi, mapped);
    if (residual <= tol) return FixedPointReport{pi, residual, used, true};
    picard_step(mapped, residual);
  }
  const Policy mapped = apply_map(spec, beta, pi);
  const double residual = sup_distance(pi, mapped);
  return FixedPointReport{pi, residual, max_iter, residual <= tol};
}

}  // namespace

Policy best_response(const GameSpec& spec, const Policy& mu) {
  const int n = spec.size();
  std::vector<double> score(static_cast<size_t>(n));
  for (int y = 0; y < n; ++y)
    score[static_cast<size_t>(y)] = preference_vs_policy(spec.prefs, y, mu);
  return tilt(spec.ref_policy, spec.tau, score);
}

Policy rlhf_closed_form(const Policy& ref, double tau,
                        const std::vector<double>& reward) {
  if (!(tau > 0.0)) throw std::invalid_argument("rlhf_closed_form: tau must be > 0");
  if (static_cast<int>(reward.size()) != ref.size())
    throw std::invalid_argument("rlhf_closed_form: reward size mismatch");
  return tilt(ref, tau, reward);
}

FixedPointReport solve_regularised_nash(const GameSpec& spec, double tol,
                                        long max_iter, double damping,
                                        const std::optional<Policy>& init) {
  return solve_fixed_point(spec, 0.0, tol, max_iter, damping, init);
}

FixedPointReport solve_ipo_md_fixed_point(const GameSpec& spec, double beta,
                                          double tol, long max_iter,
                                          double damping,
                                          const std::optional<Policy>& init) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("solve_ipo_md_fixed_point: beta must be in [0,1]");
  return solve_fixed_point(spec, beta, tol, max_iter, damping, init);
}

double fixed_point_defect(const GameSpec& spec, double beta, const Policy& pi) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("fixed_point_defect: beta must be in [0,1]");
  return sup_distance(pi, apply_map(spec, beta, pi));
}

double verify_modified_tau(const GameSpec& spec, double beta,
                           const Policy& pi_star_beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument(
        "verify_modified_tau: beta must be in [0,1); the modified temperature "
        "is undefined at beta = 1");
  const Policy pi_prime = geometric_mixture(pi_star_beta, spec.ref_policy, beta);
  const GameSpec modified(spec.prefs, spec.ref_policy, spec.tau / (1.0 - beta));
  const Policy mapped = best_response(modified, pi_prime);
  double d = 0.0;
  for (int y = 0; y < pi_prime.size(); ++y)
    d = std::max(d, std::abs(pi_prime[y] - mapped[y]));
  return d;
}

double exploitability(const GameSpec& spec, const Policy& pi) {
  const Policy br = best_response(spec, pi);
  const double gain = payoff(spec, br, pi) - payoff(spec, pi, pi);
  return std::max(gain, 0.0);
}

}  // namespace prefgame::solvers
