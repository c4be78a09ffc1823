#pragma once

#include <cstdint>
#include <vector>

#include "ccssp/graph.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"

namespace ccssp {

// Risk-adjusted transition: the transition probability times the source
// state's survival probability. Criterion 0 leaves T unchanged.
inline double risk_adjusted_transition(double trans_prob, double source_risk) {
  return trans_prob * (1.0 - source_risk);
}

// Survival-weighted occupancy flows x^j over the graph's (node, action)
// pairs, layers 0..h-1.
struct FlowAssignment {
  std::vector<double> x;  // indexed by LayeredGraph::pair_index
};

// Per-node risk values r^j for criterion j in {0} u N; j = 0 is identically
// zero (T~^0 := T).
std::vector<double> node_risks(const LayeredGraph& graph,
                               const ProblemSpec& spec, int criterion_j);

// Backward induction over the layered graph (the canonical evaluator):
// Er(s_h) = r(s_h), Er(s_k) = r(s_k) + sum_a pi(s_k,a) sum_s' Er(s') T~.
double exec_risk_recursive(const LayeredGraph& graph, const ProblemSpec& spec,
                           const Policy& policy, int criterion_j);

// Linear-in-flows form: Er(s0) = r(s0) + sum over arcs into layers 1..h of
// r(s_{k+1}) x^j(s,k,a) T~^j. Flows violating conservation by more than
// 1e-6 are rejected.
double exec_risk_linear(const LayeredGraph& graph, const ProblemSpec& spec,
                        const FlowAssignment& flows, int criterion_j);

// Forward propagation of a policy into survival-weighted flows:
// x(s,0,a) = pi(s0,a); x(s,k,a) = pi(s_k,a) * incoming mass under T~^j.
FlowAssignment flows_from_policy(const LayeredGraph& graph,
                                 const ProblemSpec& spec, const Policy& policy,
                                 int criterion_j);

struct SampledRisk {
  double estimate = 0.0;
  double half_width = 0.0;  // 99% normal-approximation half-width
  std::uint64_t n = 0;
};

// Monte Carlo estimate: each run fails if any visited state's independent
// Bernoulli(r(s)) draw fires. Per-run seeds derive from (seed, run index),
// so results do not depend on any worker partitioning.
SampledRisk exec_risk_sampled(const ProblemSpec& spec, const Policy& policy,
                              int criterion_j, std::uint64_t n,
                              std::uint64_t seed);

// Expected cumulative utility of a policy over the graph (sum over steps
// 0..h-1, plain T flows).
double expected_utility(const LayeredGraph& graph, const ProblemSpec& spec,
                        const Policy& policy);

struct RiskReportEntry {
  int criterion_index = 0;
  double delta = 0.0;
  double er_recursive = 0.0;
  double er_linear = 0.0;
  bool has_sampled = false;
  SampledRisk sampled;
};

struct RiskReport {
  std::vector<RiskReportEntry> criteria;
  double expected_utility = 0.0;
};

// Evaluates every risk criterion of the spec three ways (Monte Carlo skipped
// when samples == 0).
RiskReport risk_report(const LayeredGraph& graph, const ProblemSpec& spec,
                       const Policy& policy, std::uint64_t samples,
                       std::uint64_t seed);

}  // namespace ccssp
