#include "ccssp/ilp.hpp"

#include <algorithm>
#include <cmath>

#include "ccssp/errors.hpp"

namespace ccssp {

SolveCriteria SolveCriteria::from_spec(const ProblemSpec& spec) {
  SolveCriteria c;
  c.risks = spec.risks;
  for (const auto& cc : spec.costs) {
    if (cc.kind == CostCriterion::Kind::GlobalChance) {
      throw ValidationError(
          "GlobalChance criterion " + std::to_string(cc.index) +
          " must be reduced to a risk criterion first (see gcc reduction)");
    }
    c.expected_costs.push_back(cc);
  }
  return c;
}

namespace {

std::string pair_tag(const LayeredGraph& graph, int k, std::uint32_t ni,
                     std::size_t ord) {
  const std::uint32_t state_ord = ni - graph.layer_begin(k);
  return std::to_string(k) + "_" + std::to_string(state_ord) + "_" +
         std::to_string(graph.node(ni).actions[ord].action);
}

}  // namespace

ModelIR build_ilp(const LayeredGraph& graph, const ProblemSpec& spec,
                  const SolveCriteria& criteria, bool relaxed) {
  if (graph.num_nodes() == 0) throw ValidationError("empty graph");
  const int h = graph.horizon();
  const std::uint32_t q = static_cast<std::uint32_t>(criteria.risks.size());

  ModelIR m;
  m.sense = spec.utility.sense;
  m.num_flow_criteria = q + 1;
  m.pairs_per_criterion = graph.num_pairs();

  // Per-criterion risk values at nodes; j = 0 is the plain flow.
  std::vector<std::vector<double>> risk(q + 1,
                                        std::vector<double>(graph.num_nodes(), 0.0));
  for (std::uint32_t j = 1; j <= q; ++j) {
    const auto& crit = criteria.risks[j - 1];
    for (std::uint32_t ni = 0; ni < graph.num_nodes(); ++ni) {
      risk[j][ni] = crit.risk(graph.node(ni).state);
    }
    if (risk[j][0] > crit.delta) {
      throw InfeasibleAtRoot("criterion " + std::to_string(crit.index) +
                             ": r(s0) = " + std::to_string(risk[j][0]) +
                             " exceeds delta = " + std::to_string(crit.delta));
    }
  }

  // Variables: x blocks per criterion, then z.
  for (std::uint32_t j = 0; j <= q; ++j) {
    for (int k = 0; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
        for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
          m.add_var("x" + std::to_string(j) + "_" + pair_tag(graph, k, ni, ord),
                    0.0, 1.0, false);
        }
      }
    }
  }
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
        m.add_var("z_" + pair_tag(graph, k, ni, ord), 0.0, 1.0, !relaxed);
      }
    }
  }

  // Objective: sum over j=0 pairs of U(s,a).
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        m.objective[m.x_index(0, graph.pair_index(ni, ord))] =
            spec.utility.value(node.state, node.actions[ord].action);
      }
    }
  }

  // Flow constraints per criterion: root row, then conservation for layers
  // 1..h-1 under the risk-adjusted transitions. Layout metadata records the
  // row of each (criterion, node) for the solver's crash start.
  const std::uint32_t n_flow_nodes = graph.layer_begin(h);
  FlowLayout layout;
  layout.pair_begin.resize(n_flow_nodes);
  layout.pair_end.resize(n_flow_nodes);
  layout.layer.resize(n_flow_nodes);
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      layout.pair_begin[ni] = graph.pair_index(ni, 0);
      layout.pair_end[ni] =
          graph.pair_index(ni, 0) + graph.node(ni).actions.size();
      layout.layer[ni] = static_cast<std::uint32_t>(k);
    }
  }
  layout.flow_row.assign(q + 1, std::vector<std::uint32_t>(n_flow_nodes, 0));
  layout.bind0_row.assign(graph.num_pairs(), 0);

  for (std::uint32_t j = 0; j <= q; ++j) {
    {
      std::vector<std::uint32_t> idx;
      std::vector<double> coef;
      for (std::size_t ord = 0; ord < graph.node(0).actions.size(); ++ord) {
        idx.push_back(m.x_index(j, graph.pair_index(0, ord)));
        coef.push_back(1.0);
      }
      layout.flow_row[j][0] = static_cast<std::uint32_t>(m.rows.size());
      m.add_row("root" + std::to_string(j), std::move(idx), std::move(coef),
                Relation::Eq, 1.0);
    }
    for (int k = 1; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
        std::vector<std::uint32_t> idx;
        std::vector<double> coef;
        for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
          idx.push_back(m.x_index(j, graph.pair_index(ni, ord)));
          coef.push_back(1.0);
        }
        for (const auto& ia : graph.incoming(ni)) {
          idx.push_back(m.x_index(j, graph.pair_index(ia.from, ia.action_ordinal)));
          coef.push_back(-risk_adjusted_transition(ia.prob, risk[j][ia.from]));
        }
        layout.flow_row[j][ni] = static_cast<std::uint32_t>(m.rows.size());
        m.add_row("flow" + std::to_string(j) + "_" + std::to_string(k) + "_" +
                      std::to_string(ni - graph.layer_begin(k)),
                  std::move(idx), std::move(coef), Relation::Eq, 0.0);
      }
    }
  }

  // Risk rows: sum over arcs into layers 1..h of r(child) Ttilde x <= delta - r(s0).
  for (std::uint32_t j = 1; j <= q; ++j) {
    std::vector<std::uint32_t> idx;
    std::vector<double> coef;
    for (int k = 0; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
        const GraphNode& node = graph.node(ni);
        for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
          double c = 0.0;
          for (const Arc& arc : node.actions[ord].arcs) {
            c += risk[j][arc.to] * risk_adjusted_transition(arc.prob, risk[j][ni]);
          }
          if (c != 0.0) {
            idx.push_back(m.x_index(j, graph.pair_index(ni, ord)));
            coef.push_back(c);
          }
        }
      }
    }
    m.add_row("risk" + std::to_string(j), std::move(idx), std::move(coef),
              Relation::Le, criteria.risks[j - 1].delta - risk[j][0]);
  }

  // z rows: at most one action per node; x bound by z across all criteria.
  for (int k = 0; k < h; ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      std::vector<std::uint32_t> idx;
      std::vector<double> coef;
      for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
        idx.push_back(m.z_index(graph.pair_index(ni, ord)));
        coef.push_back(1.0);
      }
      m.add_row("one_" + std::to_string(k) + "_" +
                    std::to_string(ni - graph.layer_begin(k)),
                std::move(idx), std::move(coef), Relation::Le, 1.0);
    }
  }
  for (std::uint32_t j = 0; j <= q; ++j) {
    for (int k = 0; k < h; ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
        for (std::size_t ord = 0; ord < graph.node(ni).actions.size(); ++ord) {
          const std::uint64_t pair = graph.pair_index(ni, ord);
          if (j == 0) {
            layout.bind0_row[pair] = static_cast<std::uint32_t>(m.rows.size());
          }
          m.add_row("bind" + std::to_string(j) + "_" + pair_tag(graph, k, ni, ord),
                    {m.x_index(j, pair), m.z_index(pair)}, {1.0, -1.0},
                    Relation::Le, 0.0);
        }
      }
    }
  }

  for (const auto& cc : criteria.expected_costs) {
    add_expected_cost_constraint(m, graph, cc);
  }
  m.layout = std::move(layout);
  return m;
}

void add_expected_cost_constraint(ModelIR& model, const LayeredGraph& graph,
                                  const CostCriterion& cost) {
  std::vector<std::uint32_t> idx;
  std::vector<double> coef;
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
        const double c = cost.cost(node.state, node.actions[ord].action);
        if (c != 0.0) {
          idx.push_back(model.x_index(0, graph.pair_index(ni, ord)));
          coef.push_back(c);
        }
      }
    }
  }
  model.add_row("ecost" + std::to_string(cost.index), std::move(idx),
                std::move(coef), Relation::Le, cost.bound);
}

namespace {

ActionId fallback_action(const GraphNode& node, const ProblemSpec& spec) {
  // Zero-flow nodes still need an action for policy totality: the action
  // optimizing immediate utility, ties by lowest ActionId.
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

ExtractedPolicy extract_policy(const std::vector<double>& solution,
                               const ModelIR& model, const LayeredGraph& graph,
                               const ProblemSpec& spec) {
  constexpr double kIntTol = 1e-6;
  ExtractedPolicy out;
  bool integral = true;
  for (std::uint64_t p = 0; p < model.pairs_per_criterion && integral; ++p) {
    const double z = solution[model.z_index(p)];
    if (std::abs(z - std::round(z)) > kIntTol) integral = false;
  }
  out.integral = integral;
  out.policy.set_kind(integral ? Policy::Kind::Deterministic
                               : Policy::Kind::Stochastic);

  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      const GraphNode& node = graph.node(ni);
      if (integral) {
        ActionId chosen = 0;
        bool found = false;
        for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
          if (solution[model.z_index(graph.pair_index(ni, ord))] > 0.5) {
            chosen = node.actions[ord].action;
            found = true;
            break;
          }
        }
        out.policy.set_action(node.state, k,
                              found ? chosen : fallback_action(node, spec));
      } else {
        double total = 0.0;
        for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
          total += solution[model.x_index(0, graph.pair_index(ni, ord))];
        }
        std::vector<ActionProb> dist;
        if (total > 1e-12) {
          for (std::size_t ord = 0; ord < node.actions.size(); ++ord) {
            const double x = solution[model.x_index(0, graph.pair_index(ni, ord))];
            if (x > 0.0) {
              dist.push_back(ActionProb{node.actions[ord].action, x / total});
            }
          }
        } else {
          out.uniform_fallback = true;
          const double u = 1.0 / static_cast<double>(node.actions.size());
          for (const auto& aa : node.actions) {
            dist.push_back(ActionProb{aa.action, u});
          }
        }
        out.policy.set_distribution(node.state, k, std::move(dist));
      }
    }
  }
  return out;
}

FlowAssignment flows_from_solution(const std::vector<double>& solution,
                                   const ModelIR& model,
                                   std::uint32_t criterion_j) {
  FlowAssignment f;
  f.x.resize(model.pairs_per_criterion);
  for (std::uint64_t p = 0; p < model.pairs_per_criterion; ++p) {
    f.x[p] = solution[model.x_index(criterion_j, p)];
  }
  return f;
}

}  // namespace ccssp
