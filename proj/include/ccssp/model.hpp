#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccssp/types.hpp"

namespace ccssp {

enum class Relation { Eq, Le };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = 1.0;
  bool integral = false;
};

struct LinearRow {
  std::string name;
  std::vector<std::uint32_t> idx;
  std::vector<double> coef;
  Relation rel = Relation::Le;
  double rhs = 0.0;
};

// Flow structure of a CC-SSP model, kept so the solver can crash-start from
// a policy basis instead of an all-artificial one.
struct FlowLayout {
  // Decision nodes (layers 0..h-1) in graph order.
  std::vector<std::uint64_t> pair_begin;  // per node
  std::vector<std::uint64_t> pair_end;
  std::vector<std::uint32_t> layer;
  // Row of the flow-conservation (or root) constraint per (criterion, node).
  std::vector<std::vector<std::uint32_t>> flow_row;
  // Row of the x^0 <= z binding constraint per pair.
  std::vector<std::uint32_t> bind0_row;
};

// Solver-independent linear program. Constraint rows reference only declared
// variables; objective is a dense coefficient vector.
struct ModelIR {
  std::vector<Variable> vars;
  std::vector<LinearRow> rows;
  std::vector<double> objective;
  Sense sense = Sense::Minimize;
  std::optional<FlowLayout> layout;

  // CC-SSP layout metadata (set by build_ilp; zero otherwise). x variables
  // come first, grouped by criterion j = 0..num_flow_criteria-1, each block
  // holding pairs_per_criterion (node, action) pairs in graph order; z
  // variables follow in the same pair order.
  std::uint32_t num_flow_criteria = 0;
  std::uint64_t pairs_per_criterion = 0;

  std::uint32_t x_index(std::uint32_t j, std::uint64_t pair) const {
    return static_cast<std::uint32_t>(j * pairs_per_criterion + pair);
  }
  std::uint32_t z_index(std::uint64_t pair) const {
    return static_cast<std::uint32_t>(num_flow_criteria * pairs_per_criterion +
                                      pair);
  }

  std::uint32_t add_var(std::string name, double lb, double ub, bool integral);
  void add_row(std::string name, std::vector<std::uint32_t> idx,
               std::vector<double> coef, Relation rel, double rhs);

  // Max violation of rows/bounds at a point (absolute).
  double max_violation(const std::vector<double>& x) const;
  double objective_value(const std::vector<double>& x) const;
};

}  // namespace ccssp
