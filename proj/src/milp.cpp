#include "ccssp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

struct BBNode {
  double bound = 0.0;  // this node's own LP objective
  std::int64_t id = 0;
  std::vector<BoundOverride> fixes;
  std::vector<double> x;
};

struct NodeOrder {
  Sense sense;
  // Best bound first, ties by lowest id: deterministic best-first.
  bool operator()(const std::shared_ptr<BBNode>& a,
                  const std::shared_ptr<BBNode>& b) const {
    if (a->bound != b->bound) {
      return sense == Sense::Maximize ? a->bound < b->bound : a->bound > b->bound;
    }
    return a->id > b->id;
  }
};

// Most fractional integral variable, ties by lowest index; -1 if integral.
int pick_branch_var(const ModelIR& model, const std::vector<double>& x,
                    double int_tol) {
  int var = -1;
  double best = int_tol;
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    if (!model.vars[j].integral) continue;
    const double dist = std::min(x[j], 1.0 - x[j]);
    if (dist > best + 1e-12) {
      best = dist;
      var = static_cast<int>(j);
    }
  }
  return var;
}

// Fixing z(pair) = 1 logically forces the node's sibling pairs to 0 through
// the at-most-one-action row.
void append_fix(const ModelIR& model, std::vector<BoundOverride>& fixes,
                std::uint32_t var, double value) {
  fixes.push_back(BoundOverride{var, value, value});
  if (value != 1.0 || !model.layout || model.num_flow_criteria == 0) return;
  const std::uint64_t first_z =
      model.num_flow_criteria * model.pairs_per_criterion;
  if (var < first_z) return;
  const std::uint64_t pair = var - first_z;
  const FlowLayout& L = *model.layout;
  auto it = std::upper_bound(L.pair_begin.begin(), L.pair_begin.end(), pair);
  const std::size_t ni = static_cast<std::size_t>(it - L.pair_begin.begin()) - 1;
  for (std::uint64_t p = L.pair_begin[ni]; p < L.pair_end[ni]; ++p) {
    if (p != pair) fixes.push_back(BoundOverride{model.z_index(p), 0.0, 0.0});
  }
}

// Deterministic incumbent heuristic for flow-structured models: pick the
// max-z action per node (respecting branching fixes), propagate the
// per-criterion flows of that policy, and accept the point when it satisfies
// every row. Costs one pass over the matrix.
struct RoundedPoint {
  double objective;
  std::vector<double> x;
};

std::optional<RoundedPoint> round_flows(const ModelIR& model,
                                        const std::vector<double>& lp_x,
                                        const std::vector<BoundOverride>& fixes) {
  if (!model.layout || model.num_flow_criteria == 0) return std::nullopt;
  const FlowLayout& L = *model.layout;
  const std::uint32_t nq = model.num_flow_criteria;
  const std::uint64_t P = model.pairs_per_criterion;

  std::vector<double> zlb(P, 0.0), zub(P, 1.0);
  for (std::uint64_t p = 0; p < P; ++p) {
    const auto& v = model.vars[model.z_index(p)];
    zlb[p] = v.lb;
    zub[p] = v.ub;
  }
  const std::uint64_t first_z = nq * P;
  for (const auto& ov : fixes) {
    if (ov.var >= first_z) {
      const std::uint64_t p = ov.var - first_z;
      zlb[p] = std::max(zlb[p], ov.lb);
      zub[p] = std::min(zub[p], ov.ub);
    }
  }

  std::vector<double> x(model.vars.size(), 0.0);
  const std::size_t n_nodes = L.pair_begin.size();
  std::vector<std::int64_t> pick(n_nodes, -1);
  for (std::size_t ni = 0; ni < n_nodes; ++ni) {
    double inflow0;
    if (L.layer[ni] == 0) {
      inflow0 = 1.0;
    } else {
      inflow0 = 0.0;
      const LinearRow& row = model.rows[L.flow_row[0][ni]];
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (row.coef[t] < 0.0) inflow0 += -row.coef[t] * x[row.idx[t]];
      }
    }
    // Forced action if some z is fixed to 1; otherwise max z mass among
    // non-forbidden pairs, ties by lowest pair.
    std::int64_t chosen = -1;
    double best_mass = -1.0;
    for (std::uint64_t p = L.pair_begin[ni]; p < L.pair_end[ni]; ++p) {
      if (zlb[p] > 0.5) {
        chosen = static_cast<std::int64_t>(p);
        break;
      }
      if (zub[p] < 0.5) continue;
      const double mass = lp_x[model.z_index(p)];
      if (mass > best_mass + 1e-15) {
        best_mass = mass;
        chosen = static_cast<std::int64_t>(p);
      }
    }
    if (chosen < 0) {
      if (inflow0 > 1e-12) return std::nullopt;  // reached, but no action left
      pick[ni] = -1;
      continue;
    }
    pick[ni] = chosen;
    x[model.z_index(static_cast<std::uint64_t>(chosen))] = 1.0;
    x[model.x_index(0, static_cast<std::uint64_t>(chosen))] = inflow0;
  }
  // Remaining criteria flows under the same action choices.
  for (std::uint32_t j = 1; j < nq; ++j) {
    for (std::size_t ni = 0; ni < n_nodes; ++ni) {
      if (pick[ni] < 0) continue;
      double inflow;
      if (L.layer[ni] == 0) {
        inflow = 1.0;
      } else {
        inflow = 0.0;
        const LinearRow& row = model.rows[L.flow_row[j][ni]];
        for (std::size_t t = 0; t < row.idx.size(); ++t) {
          if (row.coef[t] < 0.0) inflow += -row.coef[t] * x[row.idx[t]];
        }
      }
      x[model.x_index(j, static_cast<std::uint64_t>(pick[ni]))] = inflow;
    }
  }
  if (model.max_violation(x) > 1e-9) return std::nullopt;
  return RoundedPoint{model.objective_value(x), std::move(x)};
}

}  // namespace

Solution solve_milp(const ModelIR& model, const SolverConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& v : model.vars) {
    if (v.integral && (v.lb < -1e-9 || v.ub > 1.0 + 1e-9)) {
      throw ValidationError("solve_milp: integral variables must be binary");
    }
  }

  Solution result;
  result.status = SolveStatus::Infeasible;
  std::int64_t nodes = 0;
  std::int64_t iters = 0;
  bool have_incumbent = false;
  double incumbent_obj = 0.0;
  std::vector<double> incumbent_x;

  const bool maximize = model.sense == Sense::Maximize;
  auto better = [&](double a, double b) {
    return maximize ? a > b + 1e-9 : a < b - 1e-9;
  };
  auto prunable = [&](double bound) {
    if (!have_incumbent) return false;
    return maximize ? bound <= incumbent_obj + 1e-9
                    : bound >= incumbent_obj - 1e-9;
  };
  auto offer_incumbent = [&](double obj, const std::vector<double>& x) {
    if (!have_incumbent || better(obj, incumbent_obj)) {
      have_incumbent = true;
      incumbent_obj = obj;
      incumbent_x = x;
    }
  };

  static const bool debug = std::getenv("CCSSP_MILP_DEBUG") != nullptr;
  std::int64_t next_id = 0;
  auto make_node = [&](std::vector<BoundOverride> fixes) -> std::shared_ptr<BBNode> {
    Solution lp = solve_relaxation(model, fixes, config);
    ++nodes;
    iters += lp.stats.simplex_iterations;
    if (debug) {
      std::fprintf(stderr,
                   "[milp] node=%lld fixes=%zu lp_status=%s obj=%.9g its=%lld "
                   "lp_s=%.3f incumbent=%s%.9g\n",
                   static_cast<long long>(nodes), fixes.size(),
                   to_string(lp.status), lp.objective,
                   static_cast<long long>(lp.stats.simplex_iterations),
                   lp.stats.wall_seconds, have_incumbent ? "" : "none ",
                   have_incumbent ? incumbent_obj : 0.0);
    }
    if (lp.status == SolveStatus::IterationLimit) {
      throw Error("solve_milp: node LP hit the iteration limit");
    }
    if (lp.status != SolveStatus::Optimal) return nullptr;
    auto node = std::make_shared<BBNode>();
    node->bound = lp.objective;
    node->id = next_id++;
    node->fixes = std::move(fixes);
    node->x = std::move(lp.x);
    return node;
  };

  auto try_round = [&](const std::shared_ptr<BBNode>& node) {
    if (auto cand = round_flows(model, node->x, node->fixes)) {
      offer_incumbent(cand->objective, cand->x);
    }
  };

  auto root = make_node({});
  std::priority_queue<std::shared_ptr<BBNode>, std::vector<std::shared_ptr<BBNode>>,
                      NodeOrder>
      open(NodeOrder{model.sense});
  if (root) {
    try_round(root);
    if (!prunable(root->bound)) open.push(root);
  }

  bool hit_node_limit = false;
  while (!open.empty()) {
    if (nodes > config.node_limit) {
      hit_node_limit = true;
      break;
    }
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count() > config.time_limit_seconds) {
      hit_node_limit = true;
      break;
    }
    auto node = open.top();
    open.pop();
    // Best-first: once the best open bound is prunable, everything is.
    if (prunable(node->bound)) break;

    const int branch_var = pick_branch_var(model, node->x, config.int_tol);
    if (branch_var < 0) {
      offer_incumbent(node->bound, node->x);
      continue;
    }
    for (double fix : {0.0, 1.0}) {
      auto fixes = node->fixes;
      append_fix(model, fixes, static_cast<std::uint32_t>(branch_var), fix);
      if (auto child = make_node(std::move(fixes))) {
        const int frac = pick_branch_var(model, child->x, config.int_tol);
        if (frac < 0) {
          offer_incumbent(child->bound, child->x);
          continue;
        }
        try_round(child);
        if (!prunable(child->bound)) open.push(child);
      }
    }
  }

  result.stats.bb_nodes = nodes;
  result.stats.simplex_iterations = iters;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (have_incumbent) {
    result.status = hit_node_limit ? SolveStatus::NodeLimit : SolveStatus::Optimal;
    result.objective = incumbent_obj;
    // Snap integral variables onto {0,1}.
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
      if (model.vars[j].integral) incumbent_x[j] = std::round(incumbent_x[j]);
    }
    result.x = std::move(incumbent_x);
  } else {
    result.status =
        hit_node_limit ? SolveStatus::NodeLimit : SolveStatus::Infeasible;
  }
  return result;
}

}  // namespace ccssp
