#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ccssp/model.hpp"

namespace ccssp {

enum class SolveStatus { Optimal, Infeasible, IterationLimit, NodeLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

struct SolveStats {
  std::int64_t simplex_iterations = 0;
  std::int64_t bb_nodes = 0;
  double wall_seconds = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  SolveStats stats;
  // Phase-1 certificate: rows whose artificials stayed positive.
  std::vector<std::uint32_t> infeasible_rows;
};

enum class BranchRule { MostFractional };
// Bland: pure lowest-index rule. DantzigBland: most-negative reduced cost,
// falling back to Bland while the objective stalls (deterministic and
// cycle-free either way; the hybrid is much faster on degenerate flow LPs).
enum class PivotRule { Bland, DantzigBland };

struct SolverConfig {
  double feas_tol = 1e-6;
  double int_tol = 1e-6;
  std::int64_t iteration_limit = 5'000'000;
  std::int64_t node_limit = 1'000'000;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  BranchRule branching = BranchRule::MostFractional;
  PivotRule pivot = PivotRule::DantzigBland;
};

// Two-phase bounded-variable primal simplex (deterministic, cycle-free).
// Throws ValidationError if the model carries integrality flags; build with
// relaxed=true or use solve_milp.
Solution solve_lp(const ModelIR& model, const SolverConfig& config = {});

// Per-variable bound overrides for branch-and-bound subproblems.
struct BoundOverride {
  std::uint32_t var;
  double lb;
  double ub;
};

// Internal entry point shared with B&B: solves the continuous relaxation of
// `model` under the overrides, ignoring integrality flags.
Solution solve_relaxation(const ModelIR& model,
                          const std::vector<BoundOverride>& overrides,
                          const SolverConfig& config);

}  // namespace ccssp
