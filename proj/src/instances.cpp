#include "ccssp/instances.hpp"

#include <algorithm>
#include <memory>
#include <vector>

#include "ccssp/rng.hpp"

namespace ccssp {

namespace {

struct TinyData {
  std::uint32_t n_states;
  std::uint32_t n_actions;
  std::vector<std::vector<std::vector<Successor>>> succ;  // [s][a]
  std::vector<std::vector<double>> util;                  // [s][a]
  std::vector<std::vector<double>> risk;                  // [criterion][s]
  std::vector<std::vector<std::vector<double>>> cost;     // [criterion][s][a]
};

}  // namespace

ProblemSpec random_tiny_instance(const TinyParams& params, std::uint64_t seed) {
  SplitMix rng(splitmix64(seed ^ 0x74696e79ull));
  auto data = std::make_shared<TinyData>();
  data->n_states = 2 + static_cast<std::uint32_t>(rng.next() % (params.max_states - 1));
  data->n_actions = 1 + static_cast<std::uint32_t>(rng.next() % params.max_actions);
  const int horizon = 1 + static_cast<int>(rng.next() % params.max_horizon);

  data->succ.resize(data->n_states);
  data->util.resize(data->n_states);
  for (std::uint32_t s = 0; s < data->n_states; ++s) {
    data->succ[s].resize(data->n_actions);
    data->util[s].resize(data->n_actions);
    for (std::uint32_t a = 0; a < data->n_actions; ++a) {
      const std::uint32_t fanout =
          1 + static_cast<std::uint32_t>(
                  rng.next() % std::min(params.max_successors, data->n_states));
      std::vector<StateId> pool(data->n_states);
      for (std::uint32_t i = 0; i < data->n_states; ++i) pool[i] = i;
      for (std::uint32_t i = 0; i < fanout; ++i) {
        std::swap(pool[i], pool[i + rng.next() % (data->n_states - i)]);
      }
      std::vector<double> w(fanout);
      double total = 0.0;
      for (auto& v : w) {
        v = 1.0 + static_cast<double>(rng.next() % 7);
        total += v;
      }
      double partial = 0.0;
      for (std::uint32_t i = 0; i < fanout; ++i) {
        double p = i + 1 == fanout ? 1.0 - partial : w[i] / total;
        partial += p;
        data->succ[s][a].push_back(Successor{pool[i], p});
      }
      data->util[s][a] = static_cast<double>(rng.next() % 10);
    }
  }

  ProblemSpec spec;
  spec.horizon = horizon;
  spec.initial_state = 0;
  spec.transition.num_actions = data->n_actions;
  spec.transition.successors = [data](StateId s, ActionId a) {
    return data->succ[s][a];
  };
  spec.utility.sense = params.mixed_sense && (rng.next() & 1)
                           ? Sense::Maximize
                           : Sense::Minimize;
  spec.utility.value = [data](StateId s, ActionId a) { return data->util[s][a]; };

  for (int j = 0; j < params.num_risk_criteria; ++j) {
    std::vector<double> r(data->n_states, 0.0);
    for (std::uint32_t s = 0; s < data->n_states; ++s) {
      if (rng.uniform() < 0.5) {
        r[s] = 0.05 + 0.55 * rng.uniform();
      }
    }
    data->risk.push_back(std::move(r));
    RiskCriterion rc;
    rc.index = j + 1;
    const double r0 = data->risk[j][0];
    rc.delta = std::min(1.0, r0 + 0.05 + 0.6 * rng.uniform());
    const std::size_t idx = data->risk.size() - 1;
    rc.risk = [data, idx](StateId s) { return data->risk[idx][s]; };
    spec.risks.push_back(std::move(rc));
  }

  for (int j = 0; j < params.num_global_criteria; ++j) {
    std::vector<std::vector<double>> c(data->n_states,
                                       std::vector<double>(data->n_actions, 0.0));
    double cmax = 0.0;
    for (std::uint32_t s = 0; s < data->n_states; ++s) {
      for (std::uint32_t a = 0; a < data->n_actions; ++a) {
        c[s][a] = params.integer_costs
                      ? static_cast<double>(rng.next() % 4)
                      : rng.uniform() * 3.0;
        cmax = std::max(cmax, c[s][a]);
      }
    }
    data->cost.push_back(std::move(c));
    CostCriterion cc;
    cc.kind = CostCriterion::Kind::GlobalChance;
    cc.index = 100 + j;
    // Theorem-2 normalization C_max <= P, budgets that bind sometimes.
    cc.bound = std::max(cmax, 1.0) + static_cast<double>(rng.next() % (horizon + 1));
    cc.delta = 0.1 + 0.8 * rng.uniform();
    const std::size_t idx = data->cost.size() - 1;
    cc.cost = [data, idx](StateId s, ActionId a) { return data->cost[idx][s][a]; };
    spec.costs.push_back(std::move(cc));
  }

  spec.state_label = [](StateId s) { return "s" + std::to_string(s); };
  return spec;
}

}  // namespace ccssp
