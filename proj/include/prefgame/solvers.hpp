#pragma once

#include <optional>
#include <vector>

#include "prefgame/core.hpp"

namespace prefgame::solvers {

struct FixedPointReport {
  Policy policy;
  double residual = 0.0;  // sup-norm of pi - map(pi) at the returned policy
  long iterations = 0;
  bool converged = false;
};

// Closed-form regularised best response against a fixed opponent:
// pi(y) proportional to ref(y) * exp(p(y > mu) / tau), normalised in
// log space.
Policy best_response(const GameSpec& spec, const Policy& mu);

// pi(y) proportional to ref(y) * exp(r(y) / tau): the maximiser of
// E[r] - tau KL(pi || ref).
Policy rlhf_closed_form(const Policy& ref, double tau,
                        const std::vector<double>& reward);

// Damped Picard iteration pi <- (1-d) pi + d * best_response(pi), starting
// from the reference policy (or `init`). Damping is halved (floor 1/64) when
// the residual grows, which stabilises small-tau games.
FixedPointReport solve_regularised_nash(const GameSpec& spec,
                                        double tol = 1e-12,
                                        long max_iter = 1000000,
                                        double damping = 0.5,
                                        const std::optional<Policy>& init = {});

// Same iteration with the map pi -> best_response(mixture(pi, ref, beta)).
// beta = 0 coincides with the regularised equilibrium; beta = 1 reaches the
// best response against the reference in one application.
FixedPointReport solve_ipo_md_fixed_point(
    const GameSpec& spec, double beta, double tol = 1e-12,
    long max_iter = 1000000, double damping = 0.5,
    const std::optional<Policy>& init = {});

// Sup-norm defect of pi under the mixture best-response map,
// || pi - best_response(mixture(pi, ref, beta)) ||_inf; zero exactly at the
// fixed point. beta = 0 measures the regularised-equilibrium defect.
double fixed_point_defect(const GameSpec& spec, double beta, const Policy& pi);

// Given a solved mixture fixed point pi_star_beta, form
// mixture(pi_star_beta, ref, beta) and return its fixed-point defect for the
// game with temperature tau / (1 - beta). Rejects beta = 1.
double verify_modified_tau(const GameSpec& spec, double beta,
                           const Policy& pi_star_beta);

// payoff(best_response(pi), pi) - payoff(pi, pi); zero exactly at the
// regularised equilibrium.
double exploitability(const GameSpec& spec, const Policy& pi);

}  // namespace prefgame::solvers
