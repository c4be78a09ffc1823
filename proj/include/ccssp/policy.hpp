#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ccssp/types.hpp"

namespace ccssp {

struct ActionProb {
  ActionId action;
  double prob;
};

// Time-dependent action map over (state, step) nodes.
class Policy {
 public:
  enum class Kind { Deterministic, Stochastic };

  Policy() = default;
  explicit Policy(Kind kind) : kind_(kind) {}

  Kind kind() const { return kind_; }
  void set_kind(Kind k) { kind_ = k; }

  void set_action(StateId s, int step, ActionId a);
  void set_distribution(StateId s, int step, std::vector<ActionProb> dist);

  bool contains(StateId s, int step) const;
  std::size_t size() const { return map_.size(); }

  // Distribution at (s, step); throws PolicyGraphMismatch when absent.
  const std::vector<ActionProb>& distribution(StateId s, int step) const;

  // Deterministic lookup; throws if the entry is not a point mass.
  ActionId action_at(StateId s, int step) const;

  // Pure function of (policy, s, step, seed): deterministic policies return
  // their mapped action, stochastic ones sample reproducibly from
  // (seed, s, step).
  ActionId sample(StateId s, int step, std::uint64_t seed) const;

  const std::unordered_map<NodeKey, std::vector<ActionProb>, NodeKeyHash>&
  entries() const {
    return map_;
  }

 private:
  Kind kind_ = Kind::Deterministic;
  std::unordered_map<NodeKey, std::vector<ActionProb>, NodeKeyHash> map_;
};

inline ActionId policy_action(const Policy& p, StateId s, int step,
                              std::uint64_t seed) {
  return p.sample(s, step, seed);
}

}  // namespace ccssp
