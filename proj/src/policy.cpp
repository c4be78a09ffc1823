#include "ccssp/policy.hpp"

#include <algorithm>
#include <cmath>

#include "ccssp/errors.hpp"
#include "ccssp/rng.hpp"

namespace ccssp {

void Policy::set_action(StateId s, int step, ActionId a) {
  map_[NodeKey{s, step}] = {ActionProb{a, 1.0}};
}

void Policy::set_distribution(StateId s, int step, std::vector<ActionProb> dist) {
  std::sort(dist.begin(), dist.end(),
            [](const ActionProb& a, const ActionProb& b) {
              return a.action < b.action;
            });
  map_[NodeKey{s, step}] = std::move(dist);
}

bool Policy::contains(StateId s, int step) const {
  return map_.count(NodeKey{s, step}) > 0;
}

const std::vector<ActionProb>& Policy::distribution(StateId s, int step) const {
  auto it = map_.find(NodeKey{s, step});
  if (it == map_.end()) {
    throw PolicyGraphMismatch("policy has no entry for state " +
                              std::to_string(s) + " at step " +
                              std::to_string(step));
  }
  return it->second;
}

ActionId Policy::action_at(StateId s, int step) const {
  const auto& d = distribution(s, step);
  if (d.size() == 1 && std::abs(d[0].prob - 1.0) < 1e-12) return d[0].action;
  throw PolicyGraphMismatch("stochastic entry queried as deterministic at state " +
                            std::to_string(s) + " step " + std::to_string(step));
}

ActionId Policy::sample(StateId s, int step, std::uint64_t seed) const {
  const auto& d = distribution(s, step);
  if (d.size() == 1) return d[0].action;
  double u = to_unit(mix(seed, s, static_cast<std::uint64_t>(step)));
  double acc = 0.0;
  for (const auto& ap : d) {
    acc += ap.prob;
    if (u < acc) return ap.action;
  }
  return d.back().action;  // guard against round-off at u ~ 1
}

}  // namespace ccssp
