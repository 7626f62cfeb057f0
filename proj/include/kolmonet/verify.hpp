#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kolmonet {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured numbers, thresholds, counterexamples
  double seconds = 0.0;
};

inline constexpr std::uint64_t kVerifySeed = 0x6b6f6c6d6full;

// Construction-level invariants: exact payoff networks, parameter-count
// formulas, multichannel identity, serialization round trips.
std::vector<CheckResult> verify_core(std::uint64_t seed = kVerifySeed);

// SDE invariants: affine flow identity, solution-map recovery, Euler
// cross-check of the exact sampler, moment bound, coefficient affinity.
std::vector<CheckResult> verify_sde(std::uint64_t seed = kVerifySeed);

// Monte-Carlo invariants: the L2 error identity, the L^p error bound,
// estimator unbiasedness, norm-moment bounds.
std::vector<CheckResult> verify_mc(std::uint64_t seed = kVerifySeed);

// The twelve end-to-end acceptance checks, full problem sizes.
std::vector<CheckResult> verify_e2e(std::uint64_t seed = kVerifySeed);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace kolmonet
