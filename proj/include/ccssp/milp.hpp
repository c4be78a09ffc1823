#pragma once

#include "ccssp/simplex.hpp"

namespace ccssp {

// Best-first branch-and-bound on the binary z variables with LP bounding.
// Branches on the most fractional integral variable (ties by lowest index);
// deterministic given model + config. NodeLimit returns the incumbent.
Solution solve_milp(const ModelIR& model, const SolverConfig& config = {});

}  // namespace ccssp
