#pragma once

#include <cstdint>
#include <vector>

#include "ccssp/gcc.hpp"
#include "ccssp/graph.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"

namespace ccssp {

// Brute-force ground truth for tiny instances; a test oracle, not a solver.

struct Run {
  std::vector<std::uint32_t> nodes;  // graph node per step, length h+1
  double prob = 0.0;
  double utility = 0.0;              // sum over steps 0..h-1
  std::vector<double> costs;         // per cost criterion of the spec
};

struct RunDistribution {
  std::vector<Run> runs;
};

struct OracleCaps {
  std::uint64_t run_cap = 1'000'000;
  std::uint64_t policy_cap = 10'000'000;
};

// Every positive-probability run of a deterministic policy with its exact
// probability (product of T along arcs). Throws RunCapExceeded.
RunDistribution enumerate_runs(const LayeredGraph& graph,
                               const ProblemSpec& spec, const Policy& policy,
                               const OracleCaps& caps = {});

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
  Policy policy;
  std::uint64_t feasible_count = 0;
  std::uint64_t policies_scanned = 0;
};

// Exhaustive scan of deterministic time-dependent policies over the graph's
// decision nodes: objective via run enumeration, chance constraints via the
// exact failure probability 1 - sum_runs p * prod_t (1 - r(s_t)), global
// constraints via exact Pr(sum C > P). Ties broken lexicographically by
// action ids in node order. Throws PolicySpaceCapExceeded.
BruteForceResult brute_force_optimal(const ProblemSpec& spec,
                                     const OracleCaps& caps = {});

// Exact Pr(sum_t C(S_t, pi(S_t)) > P) of a deterministic policy, strict
// inequality, exact rational arithmetic over the runs.
double exact_chance(const ProblemSpec& spec, const Policy& policy,
                    const CostCriterion& criterion,
                    const OracleCaps& caps = {});

// Exact failure probability 1 - E[prod_t (1 - r(S_t))] for a risk criterion
// (rational arithmetic); the enumeration counterpart of exec_risk_recursive.
double exact_execution_risk(const ProblemSpec& spec, const Policy& policy,
                            const RiskCriterion& criterion,
                            const OracleCaps& caps = {});

}  // namespace ccssp
