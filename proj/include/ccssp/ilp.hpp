#pragma once

#include <vector>

#include "ccssp/graph.hpp"
#include "ccssp/model.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"
#include "ccssp/risk.hpp"

namespace ccssp {

// The constraint criteria a model is built against; GlobalChance cost
// criteria must be reduced to risk criteria first (gcc.hpp).
struct SolveCriteria {
  std::vector<RiskCriterion> risks;
  std::vector<CostCriterion> expected_costs;

  // All risks plus ExpectedBudget costs of the spec; throws ValidationError
  // if the spec still carries GlobalChance criteria.
  static SolveCriteria from_spec(const ProblemSpec& spec);
};

// Emits the exact ILP over the reachable layered DAG: per criterion
// j in {0} u N the flow constraints (layers 1..h-1 plus the root row), one
// risk row per j in N with RHS Delta^j - r^j(s0), binding rows x <= z and
// per-node rows sum_a z <= 1, objective sum x^0 U. `relaxed` downgrades z to
// continuous. Throws InfeasibleAtRoot when r^j(s0) > Delta^j.
ModelIR build_ilp(const LayeredGraph& graph, const ProblemSpec& spec,
                  const SolveCriteria& criteria, bool relaxed);

// Appends one expected-cost row sum_{k,s,a} x^0(s,k,a) C(s,a) <= P.
void add_expected_cost_constraint(ModelIR& model, const LayeredGraph& graph,
                                  const CostCriterion& cost);

struct ExtractedPolicy {
  Policy policy;
  bool integral = false;           // all z within 1e-6 of {0,1}
  bool uniform_fallback = false;   // some fractional node had all-zero flows
};

// Policy from a model solution: deterministic when z is integral (zero-flow
// nodes get the action optimizing immediate utility, ties by lowest
// ActionId), stochastic from normalized j=0 flows otherwise.
ExtractedPolicy extract_policy(const std::vector<double>& solution,
                               const ModelIR& model, const LayeredGraph& graph,
                               const ProblemSpec& spec);

// j=0 flows of a solution as a FlowAssignment.
FlowAssignment flows_from_solution(const std::vector<double>& solution,
                                   const ModelIR& model,
                                   std::uint32_t criterion_j);

}  // namespace ccssp
