#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccssp/errors.hpp"
#include "ccssp/graph.hpp"
#include "ccssp/ilp.hpp"
#include "ccssp/milp.hpp"
#include "ccssp/policy.hpp"

namespace ccssp {

struct RoundingConfig {
  std::uint64_t seed = 0;
  int max_outer_iterations = 1000;
  bool record_trace = false;
  // Tighten z to max_j x^j before sampling; stays LP-feasible and makes the
  // sampling mass equal the flow mass.
  bool normalize_z = true;
};

struct RoundingOutcome {
  Policy policy;                      // deterministic
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> risks;          // per criterion, exec risk of policy
  std::vector<std::string> trace;     // per-iteration summaries when recorded
};

// Raised when max_outer_iterations sweeps all failed the risk check; carries
// the best (lowest max violation) policy seen.
class NoFeasibleRounding : public Error {
 public:
  NoFeasibleRounding(std::string what, RoundingOutcome best)
      : Error(std::move(what)), best_attempt(std::move(best)) {}
  RoundingOutcome best_attempt;
};

// Iteratively samples an action per node proportional to relaxed z-mass,
// rescales downstream flows by forward propagation under the partially fixed
// policy, and restarts from the LP solution until every risk row holds.
RoundingOutcome round(const Solution& lp_solution, const ModelIR& model,
                      const LayeredGraph& graph, const ProblemSpec& spec,
                      const SolveCriteria& criteria,
                      const RoundingConfig& config);

struct RatioTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  double ratio = 0.0;
  int iterations = 0;
  std::vector<double> risks;
  double seconds = 0.0;
  double objective = 0.0;
};

struct RatioExperiment {
  double ilp_objective = 0.0;
  double lp_objective = 0.0;
  double ilp_seconds = 0.0;
  double lp_seconds = 0.0;
  double mean = 0.0;
  double ci_half_width = 0.0;  // not applicable when n < 2 (reported as 0)
  double min_ratio = 0.0;
  double confidence = 0.99;
  std::vector<RatioTrial> trials;
};

// Runs `round` n_trials times with derived seeds against the instance's
// exact ILP optimum. Ratio is rounding/ILP for max sense and ILP/rounding
// for min sense, so ratio <= 1 always means "within optimal". Throws when
// the ILP is infeasible (ratio undefined).
RatioExperiment approximation_ratio_experiment(const ProblemSpec& spec,
                                               int n_trials,
                                               std::uint64_t seed,
                                               double confidence = 0.99,
                                               const SolverConfig& solver = {},
                                               const RoundingConfig& rcfg = {});

}  // namespace ccssp
