#include "ccssp/problem.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

namespace ccssp {

std::string ProblemSpec::label(StateId s) const {
  if (state_label) return state_label(s);
  return std::to_string(s);
}

std::string ProblemSpec::action_name(ActionId a) const {
  if (a < action_names.size()) return action_names[a];
  return "a" + std::to_string(a);
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::vector<std::string> validate_problem(const ProblemSpec& spec,
                                          const ValidateOptions& opts) {
  std::vector<std::string> out;
  if (spec.horizon < 1) {
    out.push_back("horizon must be >= 1, got " + std::to_string(spec.horizon));
    return out;
  }
  if (spec.transition.num_actions == 0 || !spec.transition.successors) {
    out.push_back("transition model has no actions or no successor generator");
    return out;
  }

  std::set<int> risk_indices, cost_indices;
  for (const auto& rc : spec.risks) {
    if (!risk_indices.insert(rc.index).second) {
      out.push_back("duplicate risk criterion index " + std::to_string(rc.index));
    }
    if (!(rc.delta >= 0.0 && rc.delta <= 1.0)) {
      out.push_back("risk criterion " + std::to_string(rc.index) +
                    ": delta out of [0,1]: " + fmt("%g", rc.delta));
    }
    if (!rc.risk) {
      out.push_back("risk criterion " + std::to_string(rc.index) +
                    " has no risk function");
    }
  }
  for (const auto& cc : spec.costs) {
    if (!cost_indices.insert(cc.index).second) {
      out.push_back("duplicate cost criterion index " + std::to_string(cc.index));
    }
    if (!cc.cost) {
      out.push_back("cost criterion " + std::to_string(cc.index) +
                    " has no cost function");
    }
    if (cc.kind == CostCriterion::Kind::GlobalChance &&
        !(cc.delta >= 0.0 && cc.delta <= 1.0)) {
      out.push_back("cost criterion " + std::to_string(cc.index) +
                    ": delta out of [0,1]: " + fmt("%g", cc.delta));
    }
  }
  if (!out.empty()) return out;

  // Reachable scan, breadth-first up to the horizon (bounded by node_cap
  // state nodes summed over layers).
  std::vector<StateId> frontier{spec.initial_state};
  std::unordered_set<StateId> seen_layer;
  std::uint64_t visited = 1;
  for (int k = 0; k < spec.horizon && out.empty(); ++k) {
    std::vector<StateId> next;
    seen_layer.clear();
    for (StateId s : frontier) {
      bool has_action = false;
      for (const auto& rc : spec.risks) {
        double r = rc.risk(s);
        if (!(r >= 0.0 && r <= 1.0)) {
          out.push_back("risk criterion " + std::to_string(rc.index) +
                        ": r(" + spec.label(s) + ") out of [0,1]: " +
                        fmt("%g", r));
        }
      }
      for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
        auto succ = spec.transition.successors(s, a);
        if (succ.empty()) continue;
        has_action = true;
        double sum = 0.0;
        std::unordered_set<StateId> dup;
        for (const auto& t : succ) {
          sum += t.prob;
          if (t.prob < 0.0) {
            out.push_back("negative probability at (" + spec.label(s) + ", " +
                          spec.action_name(a) + ")");
          }
          if (!dup.insert(t.state).second) {
            out.push_back("duplicate successor " + spec.label(t.state) +
                          " at (" + spec.label(s) + ", " + spec.action_name(a) +
                          ")");
          }
        }
        if (std::abs(sum - 1.0) > kModelProbTol) {
          out.push_back("probabilities at (" + spec.label(s) + ", " +
                        spec.action_name(a) + ") sum to " + fmt("%.15g", sum));
        }
        double u = spec.utility.value ? spec.utility.value(s, a) : 0.0;
        if (u < 0.0) {
          out.push_back("negative utility at (" + spec.label(s) + ", " +
                        spec.action_name(a) + "): " + fmt("%g", u));
        }
        for (const auto& cc : spec.costs) {
          if (cc.kind == CostCriterion::Kind::ExpectedBudget &&
              cc.cost(s, a) < 0.0) {
            out.push_back("cost criterion " + std::to_string(cc.index) +
                          ": negative cost at (" + spec.label(s) + ", " +
                          spec.action_name(a) + ")");
          }
        }
        for (const auto& t : succ) {
          if (seen_layer.insert(t.state).second) {
            next.push_back(t.state);
            if (++visited > opts.node_cap) {
              out.push_back("reachable set exceeds node cap " +
                            std::to_string(opts.node_cap));
              return out;
            }
          }
        }
      }
      if (!has_action) {
        out.push_back("state " + spec.label(s) + " reachable at step " +
                      std::to_string(k) + " has no available action");
      }
    }
    frontier = std::move(next);
  }
  // Layer-h states still carry risk.
  for (StateId s : frontier) {
    for (const auto& rc : spec.risks) {
      double r = rc.risk(s);
      if (!(r >= 0.0 && r <= 1.0)) {
        out.push_back("risk criterion " + std::to_string(rc.index) + ": r(" +
                      spec.label(s) + ") out of [0,1]: " + fmt("%g", r));
      }
    }
  }
  return out;
}

}  // namespace ccssp
