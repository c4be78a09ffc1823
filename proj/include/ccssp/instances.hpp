#pragma once

#include <cstdint>

#include "ccssp/problem.hpp"

namespace ccssp {

// Seeded random tiny instances: fixtures for the oracle-equivalence and
// augmentation-guarantee suites. Deterministic in (params, seed).

struct TinyParams {
  std::uint32_t max_states = 5;
  std::uint32_t max_actions = 3;
  int max_horizon = 3;
  std::uint32_t max_successors = 3;
  int num_risk_criteria = 1;     // risk criteria (delta drawn >= r(s0))
  int num_global_criteria = 0;   // GlobalChance cost criteria
  bool mixed_sense = true;       // draw min/max per instance
  bool integer_costs = true;     // global criterion costs in {0,1,2,3}
};

ProblemSpec random_tiny_instance(const TinyParams& params, std::uint64_t seed);

}  // namespace ccssp
