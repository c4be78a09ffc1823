#include "ccssp/rounding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ccssp/rng.hpp"

namespace ccssp {

namespace {

struct Prepared {
  // Conditional action distribution z / sum z per (node, action ordinal),
  // flattened by pair index; nodes with zero mass keep zeros.
  std::vector<double> cond;
  std::vector<bool> has_mass;  // per node
};

Prepared prepare(const Solution& lp, const ModelIR& model,
                 const LayeredGraph& graph, bool normalize_z) {
  Prepared p;
  p.cond.assign(graph.num_pairs(), 0.0);
  p.has_mass.assign(graph.num_nodes(), false);
  const std::uint32_t q = model.num_flow_criteria;
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const auto& acts = graph.node(ni).actions;
      double total = 0.0;
      for (std::size_t ord = 0; ord < acts.size(); ++ord) {
        const std::uint64_t pair = graph.pair_index(ni, ord);
        double zv = lp.x[model.z_index(pair)];
        if (normalize_z) {
          double xmax = 0.0;
          for (std::uint32_t j = 0; j < q; ++j) {
            xmax = std::max(xmax, lp.x[model.x_index(j, pair)]);
          }
          zv = xmax;
        }
        p.cond[pair] = std::max(zv, 0.0);
        total += p.cond[pair];
      }
      if (total > 1e-12) {
        p.has_mass[ni] = true;
        for (std::size_t ord = 0; ord < acts.size(); ++ord) {
          p.cond[graph.pair_index(ni, ord)] /= total;
        }
      } else {
        for (std::size_t ord = 0; ord < acts.size(); ++ord) {
          p.cond[graph.pair_index(ni, ord)] = 0.0;
        }
      }
    }
  }
  return p;
}

ActionId fallback_action(const GraphNode& node, const ProblemSpec& spec) {
  ActionId best = node.actions[0].action;
  double best_u = spec.utility.value(node.state, best);
  for (std::size_t ord = 1; ord < node.actions.size(); ++ord) {
    const ActionId a = node.actions[ord].action;
    const double u = spec.utility.value(node.state, a);
    const bool better = spec.utility.sense == Sense::Minimize ? u < best_u
                                                              : u > best_u;
    if (better) {
      best = a;
      best_u = u;
    }
  }
  return best;
}

}  // namespace

RoundingOutcome round(const Solution& lp_solution, const ModelIR& model,
                      const LayeredGraph& graph, const ProblemSpec& spec,
                      const SolveCriteria& criteria,
                      const RoundingConfig& config) {
  if (lp_solution.status != SolveStatus::Optimal) {
    throw Error("round: LP solution is not optimal/feasible");
  }
  if (model.max_violation(lp_solution.x) > 1e-6) {
    throw Error("round: LP solution violates the relaxation beyond 1e-6");
  }
  const int h = graph.horizon();
  const std::size_t q = criteria.risks.size();
  const Prepared prep =
      prepare(lp_solution, model, graph, config.normalize_z);

  // Per-criterion node risks and root risks.
  std::vector<std::vector<double>> risk(q + 1);
  for (std::size_t j = 0; j <= q; ++j) {
    risk[j].assign(graph.num_nodes(), 0.0);
    if (j >= 1) {
      for (std::uint32_t ni = 0; ni < graph.num_nodes(); ++ni) {
        risk[j][ni] = criteria.risks[j - 1].risk(graph.node(ni).state);
      }
    }
  }

  RoundingOutcome best;
  double best_violation = std::numeric_limits<double>::infinity();

  std::vector<std::uint32_t> chosen(graph.num_nodes(), 0);
  std::vector<bool> sampled(graph.num_nodes(), false);
  // Survival-weighted reach mass per criterion and node.
  std::vector<std::vector<double>> mass(q + 1);

  for (int iter = 1; iter <= config.max_outer_iterations; ++iter) {
    SplitMix rng(mix(config.seed, static_cast<std::uint64_t>(iter)));
    for (std::size_t j = 0; j <= q; ++j) {
      mass[j].assign(graph.num_nodes(), 0.0);
      mass[j][0] = 1.0;
    }
    std::fill(sampled.begin(), sampled.end(), false);

    // Layer sweep in graph order; sampling uses the rescaled z, whose
    // conditional per node equals the LP conditional wherever the node keeps
    // positive mass under the partially fixed policy.
    for (int k = 0; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
           ++ni) {
        const auto& acts = graph.node(ni).actions;
        const bool reachable = mass[0][ni] > 0.0;
        if (!prep.has_mass[ni] || !reachable) continue;
        double u = rng.uniform();
        std::size_t pick = acts.size() - 1;
        double acc = 0.0;
        for (std::size_t ord = 0; ord < acts.size(); ++ord) {
          acc += prep.cond[graph.pair_index(ni, ord)];
          if (u < acc) {
            pick = ord;
            break;
          }
        }
        chosen[ni] = static_cast<std::uint32_t>(pick);
        sampled[ni] = true;
        for (std::size_t j = 0; j <= q; ++j) {
          const double m = mass[j][ni];
          if (m == 0.0) continue;
          for (const Arc& arc : acts[pick].arcs) {
            mass[j][arc.to] +=
                m * risk_adjusted_transition(arc.prob, risk[j][ni]);
          }
        }
      }
    }

    // Risk check: linear form on the rounded flows equals the recursive risk
    // of the induced total policy (unsampled nodes carry zero mass).
    std::vector<double> er(q, 0.0);
    bool feasible = true;
    double max_violation = 0.0;
    for (std::size_t j = 1; j <= q; ++j) {
      double v = risk[j][0];
      for (int k = 0; k < h; ++k) {
        for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
             ++ni) {
          if (!sampled[ni] || mass[j][ni] == 0.0) continue;
          const auto& arcs = graph.node(ni).actions[chosen[ni]].arcs;
          double inner = 0.0;
          for (const Arc& arc : arcs) {
            inner += risk[j][arc.to] *
                     risk_adjusted_transition(arc.prob, risk[j][ni]);
          }
          v += mass[j][ni] * inner;
        }
      }
      er[j - 1] = v;
      const double delta = criteria.risks[j - 1].delta;
      if (v > delta + 1e-9) feasible = false;
      max_violation = std::max(max_violation, v - delta);
    }

    // Materialize the deterministic policy (fallback actions off-support).
    auto make_policy = [&]() {
      Policy p(Policy::Kind::Deterministic);
      for (int k = 0; k < h; ++k) {
        for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
             ++ni) {
          const GraphNode& node = graph.node(ni);
          p.set_action(node.state, k,
                       sampled[ni] ? node.actions[chosen[ni]].action
                                   : fallback_action(node, spec));
        }
      }
      return p;
    };
    auto objective_of = [&]() {
      double obj = 0.0;
      for (int k = 0; k < h; ++k) {
        for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
             ++ni) {
          if (!sampled[ni] || mass[0][ni] == 0.0) continue;
          const GraphNode& node = graph.node(ni);
          obj += mass[0][ni] *
                 spec.utility.value(node.state, node.actions[chosen[ni]].action);
        }
      }
      return obj;
    };

    if (config.record_trace) {
      std::string line = "iter " + std::to_string(iter) + ": ";
      for (std::size_t j = 0; j < q; ++j) {
        line += "er" + std::to_string(j + 1) + "=" + std::to_string(er[j]) + " ";
      }
      line += feasible ? "feasible" : "infeasible";
      best.trace.push_back(line);
    }

    if (feasible) {
      RoundingOutcome out;
      out.policy = make_policy();
      out.objective = objective_of();
      out.iterations = iter;
      out.risks = er;
      out.trace = std::move(best.trace);
      return out;
    }
    if (max_violation < best_violation) {
      best_violation = max_violation;
      best.policy = make_policy();
      best.objective = objective_of();
      best.iterations = iter;
      best.risks = er;
    }
  }
  best.iterations = config.max_outer_iterations;
  throw NoFeasibleRounding(
      "rounding found no feasible policy in " +
          std::to_string(config.max_outer_iterations) + " iterations",
      std::move(best));
}

RatioExperiment approximation_ratio_experiment(const ProblemSpec& spec,
                                               int n_trials, std::uint64_t seed,
                                               double confidence,
                                               const SolverConfig& solver,
                                               const RoundingConfig& rcfg) {
  using Clock = std::chrono::steady_clock;
  RatioExperiment exp;
  exp.confidence = confidence;

  const LayeredGraph graph = expand(spec);
  const SolveCriteria criteria = SolveCriteria::from_spec(spec);

  const ModelIR ilp = build_ilp(graph, spec, criteria, /*relaxed=*/false);
  auto t0 = Clock::now();
  const Solution exact = solve_milp(ilp, solver);
  exp.ilp_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (exact.status != SolveStatus::Optimal) {
    throw Error("approximation ratio undefined: ILP status " +
                std::string(to_string(exact.status)));
  }
  exp.ilp_objective = exact.objective;

  const ModelIR lp_model = build_ilp(graph, spec, criteria, /*relaxed=*/true);
  t0 = Clock::now();
  const Solution lp = solve_lp(lp_model, solver);
  exp.lp_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (lp.status != SolveStatus::Optimal) {
    throw Error("LP relaxation not solvable: " +
                std::string(to_string(lp.status)));
  }
  exp.lp_objective = lp.objective;

  const bool minimize = spec.utility.sense == Sense::Minimize;
  double sum = 0.0, sumsq = 0.0;
  exp.min_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_trials; ++t) {
    RoundingConfig cfg = rcfg;
    cfg.seed = mix(seed, static_cast<std::uint64_t>(t));
    auto tb = Clock::now();
    RoundingOutcome out = round(lp, lp_model, graph, spec, criteria, cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - tb).count();
    // Ratio <= 1 means "within optimal" under both senses.
    const double ratio = minimize ? exact.objective / out.objective
                                  : out.objective / exact.objective;
    RatioTrial row;
    row.trial = t;
    row.seed = cfg.seed;
    row.ratio = ratio;
    row.iterations = out.iterations;
    row.risks = out.risks;
    row.seconds = secs;
    row.objective = out.objective;
    exp.trials.push_back(std::move(row));
    sum += ratio;
    sumsq += ratio * ratio;
    exp.min_ratio = std::min(exp.min_ratio, ratio);
  }
  const double n = static_cast<double>(n_trials);
  exp.mean = n > 0 ? sum / n : 0.0;
  if (n_trials >= 2) {
    const double var = std::max(0.0, (sumsq - n * exp.mean * exp.mean) / (n - 1));
    const double z = normal_quantile(0.5 + confidence / 2.0);
    exp.ci_half_width = z * std::sqrt(var / n);
  }
  return exp;
}

}  // namespace ccssp
