#include "ccssp/gcc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>

#include "ccssp/errors.hpp"
#include "ccssp/graph.hpp"
#include "ccssp/ilp.hpp"
#include "ccssp/instances.hpp"
#include "ccssp/milp.hpp"
#include "ccssp/oracle.hpp"
#include "ccssp/rng.hpp"

namespace ccssp {

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw ValidationError("non-finite value in exact mode");
  if (v == 0.0) return Rational(0);
  int exp = 0;
  const double mant = std::frexp(v, &exp);  // v = mant * 2^exp, |mant| in [0.5,1)
  const auto num = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational r(num);
  const int e = exp - 53;
  if (e >= 0) {
    r *= Rational(boost::multiprecision::cpp_int(1) << e);
  } else {
    r /= Rational(boost::multiprecision::cpp_int(1) << -e);
  }
  return r;
}

namespace {

Rational rational_ceil_div(const Rational& a, const Rational& b) {
  using boost::multiprecision::cpp_int;
  const Rational q = a / b;
  cpp_int num = boost::multiprecision::numerator(q);
  cpp_int den = boost::multiprecision::denominator(q);  // > 0 canonical
  cpp_int fl = num / den;
  if (num < 0 && fl * den != num) fl -= 1;  // floor for negatives
  if (fl * den == num) return Rational(fl);
  return Rational(fl + 1);
}

// Interned <base, g> states; ids are sequential in first-touch order.
template <typename G>
class Interner final : public AugmentedStateTable {
 public:
  explicit Interner(std::uint64_t cap) : cap_(cap) {}

  StateId intern(StateId base, const std::vector<G>& g) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(base, g);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    if (rev_.size() >= cap_) {
      throw AugmentationBlowup(
          "augmented state space exceeded the cap of " + std::to_string(cap_) +
          "; use the discretized reduction");
    }
    const StateId id = static_cast<StateId>(rev_.size());
    ids_.emplace(std::move(key), id);
    rev_.push_back({base, g});
    return id;
  }

  std::pair<StateId, std::vector<G>> entry(StateId id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return rev_.at(id);
  }

  std::size_t size() const override {
    std::lock_guard<std::mutex> lock(mu_);
    return rev_.size();
  }

  Decoded decode(StateId augmented) const override {
    auto [base, g] = entry(augmented);
    Decoded d;
    d.base = base;
    if constexpr (std::is_same_v<G, Rational>) {
      d.g_exact = g;
    } else {
      d.g_ticks = g;
    }
    return d;
  }

 private:
  std::uint64_t cap_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<StateId, std::vector<G>>, StateId> ids_;
  mutable std::vector<std::pair<StateId, std::vector<G>>> rev_;
};

std::vector<const CostCriterion*> global_criteria(const ProblemSpec& spec) {
  std::vector<const CostCriterion*> out;
  for (const auto& cc : spec.costs) {
    if (cc.kind == CostCriterion::Kind::GlobalChance) out.push_back(&cc);
  }
  return out;
}

int next_risk_index(const ProblemSpec& spec) {
  int idx = 0;
  for (const auto& rc : spec.risks) idx = std::max(idx, rc.index);
  return idx + 1;
}

// Shared reduction skeleton: G is the accumulated-cost entry type.
template <typename G>
ProblemSpec reduce_common(
    const ProblemSpec& spec, std::shared_ptr<Interner<G>> interner,
    std::vector<std::function<G(StateId, ActionId)>> step_cost,
    std::vector<std::function<bool(const G&)>> risky,
    std::vector<double> deltas) {
  const auto base_succ = spec.transition.successors;
  const std::size_t n_glob = step_cost.size();

  ProblemSpec out;
  out.horizon = spec.horizon;
  out.utility.sense = spec.utility.sense;
  out.action_names = spec.action_names;

  const StateId s0 = interner->intern(spec.initial_state, std::vector<G>(n_glob, G(0)));
  out.initial_state = s0;

  out.transition.num_actions = spec.transition.num_actions;
  out.transition.successors =
      [interner, base_succ, step_cost](StateId aug, ActionId a) {
        auto [base, g] = interner->entry(aug);
        auto succ = base_succ(base, a);
        if (succ.empty()) return succ;
        std::vector<G> g2 = g;
        for (std::size_t j = 0; j < step_cost.size(); ++j) {
          g2[j] = G(g[j] + step_cost[j](base, a));
        }
        std::vector<Successor> out_succ;
        out_succ.reserve(succ.size());
        for (const auto& t : succ) {
          out_succ.push_back(Successor{interner->intern(t.state, g2), t.prob});
        }
        return out_succ;
      };

  const auto base_util = spec.utility.value;
  out.utility.value = [interner, base_util](StateId aug, ActionId a) {
    return base_util(interner->entry(aug).first, a);
  };

  // Lifted local risk criteria keep their indices and deltas.
  for (const auto& rc : spec.risks) {
    RiskCriterion lifted = rc;
    const auto base_risk = rc.risk;
    lifted.risk = [interner, base_risk](StateId aug) {
      return base_risk(interner->entry(aug).first);
    };
    out.risks.push_back(std::move(lifted));
  }
  // One new risk criterion per global chance criterion: r = 1 iff the
  // accumulated entry is over budget.
  int idx = next_risk_index(spec);
  for (std::size_t j = 0; j < n_glob; ++j) {
    RiskCriterion rc;
    rc.index = idx++;
    rc.delta = deltas[j];
    auto pred = risky[j];
    rc.risk = [interner, pred, j](StateId aug) {
      return pred(interner->entry(aug).second[j]) ? 1.0 : 0.0;
    };
    out.risks.push_back(std::move(rc));
  }
  // Expected-budget criteria lift unchanged.
  for (const auto& cc : spec.costs) {
    if (cc.kind != CostCriterion::Kind::ExpectedBudget) continue;
    CostCriterion lifted = cc;
    const auto base_cost = cc.cost;
    lifted.cost = [interner, base_cost](StateId aug, ActionId a) {
      return base_cost(interner->entry(aug).first, a);
    };
    out.costs.push_back(std::move(lifted));
  }

  const auto base_label = spec.state_label;
  out.state_label = [interner, base_label](StateId aug) {
    auto [base, g] = interner->entry(aug);
    std::ostringstream os;
    if (base_label) {
      os << base_label(base);
    } else {
      os << base;
    }
    os << "|g=[";
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j) os << ",";
      os << g[j];
    }
    os << "]";
    return os.str();
  };
  return out;
}

}  // namespace

ReducedProblem reduce_exact(const ProblemSpec& spec, const ReduceOptions& opts) {
  const auto globals = global_criteria(spec);
  auto interner = std::make_shared<Interner<Rational>>(opts.state_cap);

  std::vector<std::function<Rational(StateId, ActionId)>> step;
  std::vector<std::function<bool(const Rational&)>> risky;
  std::vector<double> deltas;
  for (const auto* cc : globals) {
    const auto cost = cc->cost;
    step.push_back([cost](StateId s, ActionId a) { return to_rational(cost(s, a)); });
    const Rational bound = to_rational(cc->bound);
    risky.push_back([bound](const Rational& g) { return g > bound; });
    deltas.push_back(cc->delta);
  }

  ReducedProblem out;
  out.spec = reduce_common<Rational>(spec, interner, std::move(step),
                                     std::move(risky), std::move(deltas));
  out.states = interner;
  return out;
}

DiscretizationPlan make_plan(const ProblemSpec& spec, double epsilon,
                             const ReduceOptions& opts) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("epsilon must be in (0,1), got " +
                          std::to_string(epsilon));
  }
  const auto globals = global_criteria(spec);
  DiscretizationPlan plan;
  if (globals.empty()) return plan;

  // Max reachable |C| per criterion, over states reachable within h steps.
  ExpandOptions eo;
  eo.node_cap = opts.state_cap;
  const LayeredGraph graph = expand(spec, eo);
  const Rational eps = to_rational(epsilon);
  const Rational h(spec.horizon);

  for (const auto* cc : globals) {
    DiscretizationPlan::PerCriterion pc;
    pc.criterion_index = cc->index;
    pc.epsilon = epsilon;
    double cmax = 0.0;
    bool negative = false;
    for (int k = 0; k < graph.horizon(); ++k) {
      for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k);
           ++ni) {
        for (const auto& aa : graph.node(ni).actions) {
          const double c = cc->cost(graph.node(ni).state, aa.action);
          if (c < 0.0) negative = true;
          cmax = std::max(cmax, std::abs(c));
        }
      }
    }
    pc.c_max = cmax;
    pc.negative_costs = negative;
    pc.tick_size = to_rational(cmax) * eps / h;
    // h * ceil(h / eps)
    const Rational cap = h * rational_ceil_div(h, eps);
    pc.tick_cap =
        static_cast<std::int64_t>(boost::multiprecision::numerator(cap));
    plan.entries.push_back(std::move(pc));
  }
  return plan;
}

ReducedProblem reduce_discretized(const ProblemSpec& spec,
                                  const DiscretizationPlan& plan,
                                  const ReduceOptions& opts) {
  const auto globals = global_criteria(spec);
  if (globals.size() != plan.entries.size()) {
    throw ValidationError("discretization plan does not match the problem's "
                          "global criteria");
  }
  auto interner = std::make_shared<Interner<std::int64_t>>(opts.state_cap);

  std::vector<std::function<std::int64_t(StateId, ActionId)>> step;
  std::vector<std::function<bool(const std::int64_t&)>> risky;
  std::vector<double> deltas;
  for (std::size_t j = 0; j < globals.size(); ++j) {
    const auto* cc = globals[j];
    const auto& pc = plan.entries[j];
    if (!pc.negative_costs && pc.c_max > cc->bound + 1e-12) {
      throw ValidationError(
          "criterion " + std::to_string(cc->index) + ": C_max = " +
          std::to_string(pc.c_max) + " exceeds the budget P = " +
          std::to_string(cc->bound) +
          "; the augmentation guarantee assumes C_max <= P");
    }
    const Rational K = pc.tick_size;
    const auto cost = cc->cost;
    if (K == 0) {
      // All costs are zero; ticks stay zero.
      step.push_back([](StateId, ActionId) { return std::int64_t{0}; });
    } else {
      step.push_back([cost, K](StateId s, ActionId a) {
        const Rational t = rational_ceil_div(to_rational(cost(s, a)), K);
        return static_cast<std::int64_t>(boost::multiprecision::numerator(t));
      });
    }
    // r = 1 iff K * g_ticks > (1 + eps) * P.
    const Rational threshold =
        (Rational(1) + to_rational(pc.epsilon)) * to_rational(cc->bound);
    risky.push_back([K, threshold](const std::int64_t& g) {
      return K * Rational(g) > threshold;
    });
    deltas.push_back(cc->delta);
  }

  ReducedProblem out;
  out.spec = reduce_common<std::int64_t>(spec, interner, std::move(step),
                                         std::move(risky), std::move(deltas));
  out.states = interner;
  return out;
}

AugmentationReport verify_augmentation_guarantee(const ProblemSpec& tiny_spec,
                                                 double epsilon, int n_random,
                                                 std::uint64_t seed) {
  AugmentationReport report;

  auto check_instance = [&](const ProblemSpec& spec, std::uint64_t inst_seed) {
    AugmentationReport::InstanceResult res;
    res.instance_seed = inst_seed;
    const auto globals = global_criteria(spec);
    if (globals.empty()) {
      report.violations.push_back("instance has no global chance criterion");
      return;
    }
    res.delta = globals[0]->delta;

    // Exact GCC optimum: brute force over deterministic base policies with
    // exact chance evaluation.
    const BruteForceResult exact = brute_force_optimal(spec);
    res.exact_optimum = exact.feasible ? exact.objective : 0.0;

    const DiscretizationPlan plan = make_plan(spec, epsilon);
    const ReducedProblem red = reduce_discretized(spec, plan);
    const LayeredGraph graph = expand(red.spec);

    // Tick bound: no reachable augmented node exceeds h * ceil(h/eps).
    for (std::uint32_t ni = 0; ni < graph.num_nodes(); ++ni) {
      const auto dec = red.states->decode(graph.node(ni).state);
      for (std::size_t j = 0; j < dec.g_ticks.size(); ++j) {
        if (std::llabs(dec.g_ticks[j]) > plan.entries[j].tick_cap) {
          report.violations.push_back(
              "tick count " + std::to_string(dec.g_ticks[j]) +
              " exceeds cap " + std::to_string(plan.entries[j].tick_cap));
        }
      }
    }

    const SolveCriteria criteria = SolveCriteria::from_spec(red.spec);
    Solution sol;
    try {
      const ModelIR model = build_ilp(graph, red.spec, criteria, false);
      sol = solve_milp(model);
      if (sol.status == SolveStatus::Optimal) {
        res.discretized_optimum = sol.objective;
        const ExtractedPolicy ep =
            extract_policy(sol.x, model, graph, red.spec);

        // (a) Super-optimality against the exact GCC optimum.
        if (exact.feasible) {
          const bool min = spec.utility.sense == Sense::Minimize;
          res.super_optimal = min
                                  ? sol.objective <= exact.objective + 1e-9
                                  : sol.objective >= exact.objective - 1e-9;
          if (!res.super_optimal) {
            report.violations.push_back(
                "discretized optimum " + std::to_string(sol.objective) +
                " is not super-optimal vs exact " +
                std::to_string(exact.objective));
          }
        } else {
          res.super_optimal = true;
        }

        // (b) Pr(sum C > (1+eps) P) <= Delta by exact enumeration on the
        // augmented graph with base costs.
        for (std::size_t j = 0; j < globals.size(); ++j) {
          const auto* cc = globals[j];
          const Rational threshold =
              (Rational(1) + to_rational(epsilon)) * to_rational(cc->bound);
          Rational violating = 0;
          struct St {
            std::uint32_t ni;
            int k;
            Rational prob;
            Rational cost;
          };
          std::vector<St> stack{St{0, 0, Rational(1), Rational(0)}};
          while (!stack.empty()) {
            St f = std::move(stack.back());
            stack.pop_back();
            if (f.k == graph.horizon()) {
              if (f.cost > threshold) violating += f.prob;
              continue;
            }
            const GraphNode& node = graph.node(f.ni);
            const StateId base = red.states->decode(node.state).base;
            const ActionId a = ep.policy.action_at(node.state, f.k);
            for (const auto& aa : node.actions) {
              if (aa.action != a) continue;
              const Rational step = to_rational(cc->cost(base, a));
              for (const Arc& arc : aa.arcs) {
                stack.push_back(St{arc.to, f.k + 1,
                                   f.prob * to_rational(arc.prob),
                                   f.cost + step});
              }
            }
          }
          const double p = static_cast<double>(violating);
          res.violation_probability = std::max(res.violation_probability, p);
          res.augmented_feasible = p <= cc->delta + 1e-12;
          if (!res.augmented_feasible) {
            report.violations.push_back(
                "discretized policy violates the augmented constraint: Pr = " +
                std::to_string(p) + " > delta = " + std::to_string(cc->delta));
          }
        }
      } else if (exact.feasible) {
        report.violations.push_back(
            "exact GCC optimum exists but the discretized reduction is " +
            std::string(to_string(sol.status)));
      } else {
        res.super_optimal = true;
        res.augmented_feasible = true;
      }
    } catch (const InfeasibleAtRoot&) {
      if (exact.feasible) {
        report.violations.push_back(
            "exact GCC optimum exists but the discretized reduction is root-"
            "infeasible");
      } else {
        res.super_optimal = true;
        res.augmented_feasible = true;
      }
    }
    report.results.push_back(std::move(res));
    ++report.instances;
  };

  check_instance(tiny_spec, seed);
  TinyParams params;
  params.num_global_criteria = 1;
  params.num_risk_criteria = 0;
  params.max_states = 4;
  params.max_actions = 2;
  params.max_horizon = 3;
  for (int i = 0; i < n_random; ++i) {
    const std::uint64_t s = mix(seed, static_cast<std::uint64_t>(i + 1));
    check_instance(random_tiny_instance(params, s), s);
  }
  return report;
}

}  // namespace ccssp
