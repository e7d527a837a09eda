#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefgame/core.hpp"

namespace prefgame::checks {

// One named numerical check: `observed` must stay within `tolerance` for the
// check to pass (for sign/count checks, observed is the number of
// violations and the tolerance is zero).
struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double tolerance = 0.0;
  std::string note;
};

// Exact gradients of the pair losses against central finite differences,
// across all sampling schemes, on random games.
std::vector<CheckResult> gradient_suite(std::uint64_t seed);

// Update-direction identities: self-play collinearity of the online squared
// loss, the update-kernel assembly at general mixing, the shared fixed point
// of the two mixture-sampled dynamics, and the modified-temperature
// correspondence.
std::vector<CheckResult> proposition_suite(std::uint64_t seed);

// Contrastive versus non-contrastive estimates: shared mean, the
// variance-reduction condition, the covariance identity and the variance
// decomposition.
std::vector<CheckResult> variance_suite(std::uint64_t seed);

// Stationarity analysis of the online log-sigmoid loss: the two-action sign
// pattern, score-model stationarity, the cyclic-game uniform policy, the
// off-support rescaling degeneracy and the scalar identities they rest on.
std::vector<CheckResult> dpo_analysis_suite(std::uint64_t seed);

// suite is one of gradients | propositions | variance | dpo-analysis | all.
std::vector<CheckResult> run_suite(const std::string& suite, std::uint64_t seed);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace prefgame::checks
