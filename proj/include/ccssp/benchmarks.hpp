#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccssp/problem.hpp"

namespace ccssp {

struct GridParams {
  std::uint32_t width = 10000;
  std::uint32_t height = 10000;
  std::uint32_t start_x = 5000;
  std::uint32_t start_y = 5000;
  double success_prob = 0.8;
  double risky_fraction = 0.05;
  double cheap_fraction = 0.10;
  double cheap_cost = 1.0;
  double default_cost = 2.0;
  double delta = 0.05;
  std::uint64_t seed = 0;
};

// 2-D grid robot: intended move succeeds with success_prob, the remainder is
// split uniformly over the other three directions; off-board mass is
// redistributed proportionally among legal successors. Risky/cheap cells are
// independent seeded per-cell marks (start cell never risky); minimization
// sense. Classification is lazy, the board is never materialized.
ProblemSpec gen_grid(const GridParams& params);

struct HvParams {
  std::uint32_t lane = 0;
  std::uint32_t pos = 0;
  int drift = 0;  // constant relative longitudinal advance per step
};

struct HighwayParams {
  std::uint32_t lanes = 3;
  std::uint32_t cells = 8;
  std::uint32_t ego_lane = 1;
  std::uint32_t ego_pos = 2;
  std::vector<HvParams> hvs;  // empty -> `num_hvs` seeded placements
  std::uint32_t num_hvs = 6;
  double keep_prob = 0.8;      // centered HV keeps its lane
  double complete_prob = 0.7;  // deviating HV completes the change
  // maintain, speed up, slow down, left lane, right lane
  std::vector<double> action_costs = {2, 1, 4, 3, 3};
  double delta = 0.05;
  std::uint64_t seed = 0;
};

// Three-lane highway in an ego-relative window: joint state = ego lane plus
// per-HV (lane, cell, deviation stage). Ego speed actions shift HVs by -+1
// cell (clamped at the window edges); HVs stage lane changes through a
// deviated sub-state; risk is 1 exactly on ego/HV cell collisions;
// minimization sense. Throws ValidationError on an initial overlap.
ProblemSpec gen_highway(const HighwayParams& params);

struct MonotonicityCell {
  int horizon = 0;
  double delta = 0.0;
  std::string status;  // "optimal" or an annotation
  double ilp_objective = 0.0;
  double ilp_seconds = 0.0;
  double rounding_objective = 0.0;
  double rounding_seconds = 0.0;
  std::uint64_t graph_nodes = 0;
  std::string tree_nodes;
};

struct MonotonicityTable {
  std::vector<MonotonicityCell> cells;
  // "objective at larger delta exceeds smaller" / "objective/h increased"
  std::vector<std::string> violations;
};

// Re-horizons the spec per cell, solves ILP and LP+rounding, and checks the
// objective patterns: non-increasing in delta (min sense) and objective/h
// non-increasing in h. Per-cell failures annotate the cell, the suite
// completes.
MonotonicityTable monotonicity_suite(
    const ProblemSpec& spec, const std::vector<int>& horizons,
    const std::vector<double>& deltas, std::uint64_t rounding_seed = 1,
    std::optional<std::uint64_t> node_cap = std::nullopt);

}  // namespace ccssp
