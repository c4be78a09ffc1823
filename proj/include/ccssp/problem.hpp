#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccssp/types.hpp"

namespace ccssp {

struct Successor {
  StateId state;
  double prob;
};

// Successor generator; the full |S|x|A|x|S| table is never materialized
// (the grid benchmark has 1e8 states). Generators must be re-entrant.
struct TransitionModel {
  std::uint32_t num_actions = 0;
  std::function<std::vector<Successor>(StateId, ActionId)> successors;
};

struct UtilityModel {
  std::function<double(StateId, ActionId)> value;
  Sense sense = Sense::Minimize;
};

// Local chance constraint: r(s) is the failure probability at s, Delta the
// budget on the probability of failing at any step of the run.
struct RiskCriterion {
  int index = 0;
  std::function<double(StateId)> risk;
  double delta = 0.0;
};

struct CostCriterion {
  enum class Kind { ExpectedBudget, GlobalChance };
  int index = 0;
  std::function<double(StateId, ActionId)> cost;
  double bound = 0.0;  // P
  Kind kind = Kind::ExpectedBudget;
  double delta = 0.0;  // GlobalChance only
};

struct ProblemSpec {
  TransitionModel transition;
  UtilityModel utility;
  StateId initial_state = 0;
  int horizon = 1;
  std::vector<RiskCriterion> risks;
  std::vector<CostCriterion> costs;

  // Optional presentation hooks.
  std::function<std::string(StateId)> state_label;
  std::vector<std::string> action_names;

  std::string label(StateId s) const;
  std::string action_name(ActionId a) const;
};

// Tolerances: model inputs are exact by construction, solver outputs carry
// LP round-off.
inline constexpr double kModelProbTol = 1e-12;
inline constexpr double kSolverProbTol = 1e-9;

struct ValidateOptions {
  std::uint64_t node_cap = 10'000'000;
};

// Checks every type invariant on all states reachable within `horizon`
// steps. Diagnostics are returned, never thrown; empty means valid.
std::vector<std::string> validate_problem(const ProblemSpec& spec,
                                          const ValidateOptions& opts = {});

}  // namespace ccssp
