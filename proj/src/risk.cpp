#include "ccssp/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "ccssp/errors.hpp"
#include "ccssp/rng.hpp"

namespace ccssp {

namespace {

const RiskCriterion& criterion_at(const ProblemSpec& spec, int j) {
  if (j < 1 || j > static_cast<int>(spec.risks.size())) {
    throw std::out_of_range("risk criterion index " + std::to_string(j));
  }
  return spec.risks[j - 1];
}

// Action distribution of the policy at a graph node, aligned to the node's
// action ordinals. Throws PolicyGraphMismatch for actions outside the node.
std::vector<double> policy_weights(const LayeredGraph& graph,
                                   const Policy& policy, std::uint32_t ni,
                                   int k) {
  const GraphNode& node = graph.node(ni);
  const auto& dist = policy.distribution(node.state, k);
  std::vector<double> w(node.actions.size(), 0.0);
  for (const auto& ap : dist) {
    bool found = false;
    for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
      if (node.actions[ord].action == ap.action) {
        w[ord] = ap.prob;
        found = true;
        break;
      }
    }
    if (!found && ap.prob > 0.0) {
      throw PolicyGraphMismatch("policy assigns mass to unavailable action at " +
                                std::to_string(node.state) + " step " +
                                std::to_string(k));
    }
  }
  return w;
}

}  // namespace

std::vector<double> node_risks(const LayeredGraph& graph,
                               const ProblemSpec& spec, int criterion_j) {
  std::vector<double> r(graph.num_nodes(), 0.0);
  if (criterion_j == 0) return r;
  const auto& crit = criterion_at(spec, criterion_j);
  for (std::uint32_t ni = 0; ni < graph.num_nodes(); ++ni) {
    r[ni] = crit.risk(graph.node(ni).state);
  }
  return r;
}

double exec_risk_recursive(const LayeredGraph& graph, const ProblemSpec& spec,
                           const Policy& policy, int criterion_j) {
  const std::vector<double> r = node_risks(graph, spec, criterion_j);
  const int h = graph.horizon();
  std::vector<double> er(graph.num_nodes(), 0.0);
  for (std::uint32_t ni = graph.layer_begin(h); ni < graph.layer_end(h); ++ni) {
    er[ni] = r[ni];
  }
  for (int k = h - 1; k >= 0; --k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      const auto w = policy_weights(graph, policy, ni, k);
      double acc = 0.0;
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        if (w[ord] == 0.0) continue;
        double inner = 0.0;
        for (const Arc& arc : node.actions[ord].arcs) {
          inner += er[arc.to] * risk_adjusted_transition(arc.prob, r[ni]);
        }
        acc += w[ord] * inner;
      }
      er[ni] = r[ni] + acc;
    }
  }
  return er[0];
}

double exec_risk_linear(const LayeredGraph& graph, const ProblemSpec& spec,
                        const FlowAssignment& flows, int criterion_j) {
  if (flows.x.size() != graph.num_pairs()) {
    throw FlowInconsistency("flow assignment size mismatch");
  }
  const std::vector<double> r = node_risks(graph, spec, criterion_j);
  const int h = graph.horizon();

  // Conservation check (conf2 at the root, conf1 for layers 1..h-1).
  constexpr double kConsTol = 1e-6;
  {
    double root = 0.0;
    for (std::size_t ord = 0; ord < graph.node(0).actions.size(); ++ord) {
      root += flows.x[graph.pair_index(0, ord)];
    }
    if (std::abs(root - 1.0) > kConsTol) {
      throw FlowInconsistency("root flows sum to " + std::to_string(root));
    }
    for (int k = 1; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
           ++ni) {
        double out = 0.0;
        for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
          out += flows.x[graph.pair_index(ni, ord)];
        }
        double in = 0.0;
        for (const auto& ia : graph.incoming(ni)) {
          in += flows.x[graph.pair_index(ia.from, ia.action_ordinal)] *
                risk_adjusted_transition(ia.prob, r[ia.from]);
        }
        if (std::abs(out - in) > kConsTol) {
          throw FlowInconsistency("flow conservation violated at layer " +
                                  std::to_string(k) + " by " +
                                  std::to_string(std::abs(out - in)));
        }
      }
    }
  }

  double er = r[0];
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        const double xv = flows.x[graph.pair_index(ni, ord)];
        if (xv == 0.0) continue;
        double inner = 0.0;
        for (const Arc& arc : node.actions[ord].arcs) {
          inner += r[arc.to] * risk_adjusted_transition(arc.prob, r[ni]);
        }
        er += xv * inner;
      }
    }
  }
  return er;
}

FlowAssignment flows_from_policy(const LayeredGraph& graph,
                                 const ProblemSpec& spec, const Policy& policy,
                                 int criterion_j) {
  const std::vector<double> r = node_risks(graph, spec, criterion_j);
  const int h = graph.horizon();
  FlowAssignment f;
  f.x.assign(graph.num_pairs(), 0.0);
  std::vector<double> mass(graph.num_nodes(), 0.0);
  mass[0] = 1.0;
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      if (mass[ni] == 0.0 && k > 0) {
        // Unreached nodes still need defined flows (all zero); the policy
        // entry is consulted anyway so mismatches surface.
        policy_weights(graph, policy, ni, k);
        continue;
      }
      const GraphNode& node = graph.node(ni);
      const auto w = policy_weights(graph, policy, ni, k);
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        const double xv = mass[ni] * w[ord];
        f.x[graph.pair_index(ni, ord)] = xv;
        if (xv == 0.0) continue;
        for (const Arc& arc : node.actions[ord].arcs) {
          mass[arc.to] += xv * risk_adjusted_transition(arc.prob, r[ni]);
        }
      }
    }
  }
  return f;
}

SampledRisk exec_risk_sampled(const ProblemSpec& spec, const Policy& policy,
                              int criterion_j, std::uint64_t n,
                              std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("exec_risk_sampled: n must be >= 1");
  const auto& crit = criterion_at(spec, criterion_j);
  std::uint64_t failures = 0;
  for (std::uint64_t run = 0; run < n; ++run) {
    SplitMix rng(mix(seed, run, 0x5a5a5a5aull));
    StateId s = spec.initial_state;
    bool failed = false;
    for (int k = 0; k <= spec.horizon; ++k) {
      const double r = crit.risk(s);
      if (r > 0.0 && rng.uniform() < r) {
        failed = true;
        break;
      }
      if (k == spec.horizon) break;
      const ActionId a = policy.sample(s, k, rng.next());
      const auto succ = spec.transition.successors(s, a);
      double u = rng.uniform();
      double acc = 0.0;
      StateId next = succ.back().state;
      for (const auto& t : succ) {
        acc += t.prob;
        if (u < acc) {
          next = t.state;
          break;
        }
      }
      s = next;
    }
    if (failed) ++failures;
  }
  SampledRisk out;
  out.n = n;
  out.estimate = static_cast<double>(failures) / static_cast<double>(n);
  const double z99 = 2.5758293035489004;  // Phi^{-1}(0.995)
  out.half_width =
      z99 * std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(n));
  return out;
}

double expected_utility(const LayeredGraph& graph, const ProblemSpec& spec,
                        const Policy& policy) {
  FlowAssignment f = flows_from_policy(graph, spec, policy, 0);
  double total = 0.0;
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        const double xv = f.x[graph.pair_index(ni, ord)];
        if (xv != 0.0) {
          total += xv * spec.utility.value(node.state, node.actions[ord].action);
        }
      }
    }
  }
  return total;
}

RiskReport risk_report(const LayeredGraph& graph, const ProblemSpec& spec,
                       const Policy& policy, std::uint64_t samples,
                       std::uint64_t seed) {
  RiskReport rep;
  rep.expected_utility = expected_utility(graph, spec, policy);
  for (int j = 1; j <= static_cast<int>(spec.risks.size()); ++j) {
    RiskReportEntry e;
    e.criterion_index = spec.risks[j - 1].index;
    e.delta = spec.risks[j - 1].delta;
    e.er_recursive = exec_risk_recursive(graph, spec, policy, j);
    e.er_linear =
        exec_risk_linear(graph, spec, flows_from_policy(graph, spec, policy, j), j);
    if (samples > 0) {
      e.has_sampled = true;
      e.sampled = exec_risk_sampled(spec, policy, j, samples,
                                    mix(seed, static_cast<std::uint64_t>(j)));
    }
    rep.criteria.push_back(std::move(e));
  }
  return rep;
}

}  // namespace ccssp
