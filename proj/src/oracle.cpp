#include "ccssp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

// All decision nodes (layers 0..h-1) with their available-action counts.
struct DecisionSpace {
  std::vector<std::uint32_t> nodes;
  std::vector<std::uint32_t> arity;
};

DecisionSpace decision_space(const LayeredGraph& graph) {
  DecisionSpace d;
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      d.nodes.push_back(ni);
      d.arity.push_back(
          static_cast<std::uint32_t>(graph.node(ni).actions.size()));
    }
  }
  return d;
}

// Chosen action ordinal per node under a deterministic policy.
std::vector<std::uint32_t> action_ordinals(const LayeredGraph& graph,
                                           const Policy& policy) {
  std::vector<std::uint32_t> ord(graph.num_nodes(), 0);
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      const ActionId a = policy.action_at(node.state, k);
      bool found = false;
      for (std::size_t o = 0; o < node.actions.size(); ++o) {
        if (node.actions[o].action == a) {
          ord[ni] = static_cast<std::uint32_t>(o);
          found = true;
          break;
        }
      }
      if (!found) {
        throw PolicyGraphMismatch("policy picks unavailable action at state " +
                                  std::to_string(node.state) + " step " +
                                  std::to_string(k));
      }
    }
  }
  return ord;
}

void enumerate_rec(const LayeredGraph& graph, const ProblemSpec& spec,
                   const std::vector<std::uint32_t>& ord, int k,
                   std::uint32_t ni, double prob, double util,
                   std::vector<double>& costs, std::vector<std::uint32_t>& path,
                   const OracleCaps& caps, RunDistribution& out) {
  path.push_back(ni);
  if (k == graph.horizon()) {
    if (out.runs.size() >= caps.run_cap) {
      throw RunCapExceeded("run enumeration exceeded cap " +
                           std::to_string(caps.run_cap));
    }
    out.runs.push_back(Run{path, prob, util, costs});
    path.pop_back();
    return;
  }
  const GraphNode& node = graph.node(ni);
  const ActionArcs& aa = node.actions[ord[ni]];
  const double u = spec.utility.value(node.state, aa.action);
  for (std::size_t c = 0; c < spec.costs.size(); ++c) {
    costs[c] += spec.costs[c].cost(node.state, aa.action);
  }
  for (const Arc& arc : aa.arcs) {
    if (arc.prob == 0.0) continue;
    enumerate_rec(graph, spec, ord, k + 1, arc.to, prob * arc.prob, util + u,
                  costs, path, caps, out);
  }
  for (std::size_t c = 0; c < spec.costs.size(); ++c) {
    costs[c] -= spec.costs[c].cost(node.state, aa.action);
  }
  path.pop_back();
}

// Exact rational evaluation of one deterministic policy over the run tree.
struct RationalEval {
  Rational fail_prob_sum;  // sum over runs of p * (1 - prod (1 - r))
};

void rational_rec(const LayeredGraph& graph, const ProblemSpec& spec,
                  const std::vector<std::uint32_t>& ord,
                  const std::function<double(StateId)>& risk, int k,
                  std::uint32_t ni, const Rational& prob,
                  const Rational& survive, Rational& fail_acc) {
  const Rational r = to_rational(risk(graph.node(ni).state));
  const Rational survive_here = survive * (1 - r);
  if (k == graph.horizon()) {
    fail_acc += prob * (1 - survive_here);
    return;
  }
  const ActionArcs& aa = graph.node(ni).actions[ord[ni]];
  for (const Arc& arc : aa.arcs) {
    if (arc.prob == 0.0) continue;
    rational_rec(graph, spec, ord, risk, k + 1, arc.to,
                 prob * to_rational(arc.prob), survive_here, fail_acc);
  }
}

}  // namespace

RunDistribution enumerate_runs(const LayeredGraph& graph,
                               const ProblemSpec& spec, const Policy& policy,
                               const OracleCaps& caps) {
  RunDistribution out;
  const auto ord = action_ordinals(graph, policy);
  std::vector<double> costs(spec.costs.size(), 0.0);
  std::vector<std::uint32_t> path;
  enumerate_rec(graph, spec, ord, 0, 0, 1.0, 0.0, costs, path, caps, out);
  return out;
}

BruteForceResult brute_force_optimal(const ProblemSpec& spec,
                                     const OracleCaps& caps) {
  const LayeredGraph graph = expand(spec);
  const DecisionSpace dec = decision_space(graph);

  double total = 1.0;
  for (auto a : dec.arity) {
    total *= static_cast<double>(a);
    if (total > static_cast<double>(caps.policy_cap)) {
      throw PolicySpaceCapExceeded("policy space exceeds cap " +
                                   std::to_string(caps.policy_cap));
    }
  }

  const bool minimize = spec.utility.sense == Sense::Minimize;
  BruteForceResult best;
  std::vector<std::uint32_t> choice(dec.nodes.size(), 0);
  std::vector<std::uint32_t> ord(graph.num_nodes(), 0);

  // Reusable buffers for the run scan.
  struct Frame {
    std::uint32_t node;
    double prob;
  };

  for (;;) {
    for (std::size_t i = 0; i < dec.nodes.size(); ++i) {
      ord[dec.nodes[i]] = choice[i];
    }
    ++best.policies_scanned;

    // Run enumeration in doubles: objective, exact-form chance constraints,
    // expected and global cost criteria.
    double objective = 0.0;
    std::vector<double> fail(spec.risks.size(), 0.0);
    std::vector<double> exp_cost(spec.costs.size(), 0.0);
    std::vector<double> chance(spec.costs.size(), 0.0);
    {
      // Iterative DFS over runs: stack of (node, step partial products).
      struct St {
        std::uint32_t ni;
        int k;
        double prob;
        double util;
        std::vector<double> survive;  // per risk criterion
        std::vector<double> cost;     // per cost criterion
      };
      std::vector<St> stack;
      St root;
      root.ni = 0;
      root.k = 0;
      root.prob = 1.0;
      root.util = 0.0;
      root.survive.assign(spec.risks.size(), 1.0);
      root.cost.assign(spec.costs.size(), 0.0);
      stack.push_back(std::move(root));
      while (!stack.empty()) {
        St f = std::move(stack.back());
        stack.pop_back();
        const StateId s = graph.node(f.ni).state;
        for (std::size_t j = 0; j < spec.risks.size(); ++j) {
          f.survive[j] *= 1.0 - spec.risks[j].risk(s);
        }
        if (f.k == graph.horizon()) {
          objective += f.prob * f.util;
          for (std::size_t j = 0; j < spec.risks.size(); ++j) {
            fail[j] += f.prob * (1.0 - f.survive[j]);
          }
          for (std::size_t c = 0; c < spec.costs.size(); ++c) {
            exp_cost[c] += f.prob * f.cost[c];
            if (f.cost[c] > spec.costs[c].bound) chance[c] += f.prob;
          }
          continue;
        }
        const ActionArcs& aa = graph.node(f.ni).actions[ord[f.ni]];
        const double u = spec.utility.value(s, aa.action);
        for (const Arc& arc : aa.arcs) {
          if (arc.prob == 0.0) continue;
          St g = f;
          g.ni = arc.to;
          g.k = f.k + 1;
          g.prob = f.prob * arc.prob;
          g.util = f.util + u;
          for (std::size_t c = 0; c < spec.costs.size(); ++c) {
            g.cost[c] += spec.costs[c].cost(s, aa.action);
          }
          stack.push_back(std::move(g));
        }
      }
    }

    bool feasible = true;
    for (std::size_t j = 0; j < spec.risks.size() && feasible; ++j) {
      if (fail[j] > spec.risks[j].delta + 1e-12) feasible = false;
    }
    for (std::size_t c = 0; c < spec.costs.size() && feasible; ++c) {
      if (spec.costs[c].kind == CostCriterion::Kind::ExpectedBudget) {
        if (exp_cost[c] > spec.costs[c].bound + 1e-12) feasible = false;
      } else {
        if (chance[c] > spec.costs[c].delta + 1e-12) feasible = false;
      }
    }

    if (feasible) {
      ++best.feasible_count;
      const bool improves =
          !best.feasible ||
          (minimize ? objective < best.objective - 1e-12
                    : objective > best.objective + 1e-12);
      if (improves) {
        best.feasible = true;
        best.objective = objective;
        Policy p(Policy::Kind::Deterministic);
        for (std::size_t i = 0; i < dec.nodes.size(); ++i) {
          const std::uint32_t ni = dec.nodes[i];
          const int k = graph.layer_of(ni);
          p.set_action(graph.node(ni).state, k,
                       graph.node(ni).actions[choice[i]].action);
        }
        best.policy = std::move(p);
      }
    }

    // Next assignment, lexicographic in node order.
    std::size_t pos = dec.nodes.size();
    while (pos > 0) {
      --pos;
      if (++choice[pos] < dec.arity[pos]) break;
      choice[pos] = 0;
      if (pos == 0) return best;
    }
    if (dec.nodes.empty()) return best;
  }
}

double exact_chance(const ProblemSpec& spec, const Policy& policy,
                    const CostCriterion& criterion, const OracleCaps& caps) {
  const LayeredGraph graph = expand(spec);
  const auto ord = action_ordinals(graph, policy);
  const Rational bound = to_rational(criterion.bound);
  Rational violating = 0;

  struct St {
    std::uint32_t ni;
    int k;
    Rational prob;
    Rational cost;
  };
  std::uint64_t runs = 0;
  std::vector<St> stack;
  stack.push_back(St{0, 0, Rational(1), Rational(0)});
  while (!stack.empty()) {
    St f = std::move(stack.back());
    stack.pop_back();
    if (f.k == graph.horizon()) {
      if (++runs > caps.run_cap) {
        throw RunCapExceeded("run enumeration exceeded cap");
      }
      if (f.cost > bound) violating += f.prob;  // strict inequality
      continue;
    }
    const GraphNode& node = graph.node(f.ni);
    const ActionArcs& aa = node.actions[ord[f.ni]];
    const Rational step_cost = to_rational(criterion.cost(node.state, aa.action));
    for (const Arc& arc : aa.arcs) {
      if (arc.prob == 0.0) continue;
      stack.push_back(
          St{arc.to, f.k + 1, f.prob * to_rational(arc.prob), f.cost + step_cost});
    }
  }
  return static_cast<double>(violating);
}

double exact_execution_risk(const ProblemSpec& spec, const Policy& policy,
                            const RiskCriterion& criterion,
                            const OracleCaps& caps) {
  (void)caps;
  const LayeredGraph graph = expand(spec);
  const auto ord = action_ordinals(graph, policy);
  Rational fail = 0;
  rational_rec(graph, spec, ord, criterion.risk, 0, 0, Rational(1), Rational(1),
               fail);
  return static_cast<double>(fail);
}

}  // namespace ccssp
