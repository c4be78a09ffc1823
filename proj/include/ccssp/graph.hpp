#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"
#include "ccssp/types.hpp"

namespace ccssp {

using BigInt = boost::multiprecision::cpp_int;

struct Arc {
  std::uint32_t to;  // node index in the next layer
  double prob;
};

struct ActionArcs {
  ActionId action;
  std::vector<Arc> arcs;
};

struct GraphNode {
  StateId state;
  std::vector<ActionArcs> actions;  // empty at layer h
};

// Time-layered DAG of the states reachable from s0 within h steps. Layer k
// holds exactly the states reachable in exactly k steps; arcs only go
// k -> k+1; a state appearing in multiple layers yields distinct nodes.
// Immutable after expansion and safe to share across readers.
class LayeredGraph {
 public:
  int horizon() const { return horizon_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::uint32_t layer_begin(int k) const { return layer_begin_[k]; }
  std::uint32_t layer_end(int k) const { return layer_begin_[k + 1]; }
  std::size_t layer_size(int k) const { return layer_end(k) - layer_begin(k); }
  int layer_of(std::uint32_t node) const;

  const GraphNode& node(std::uint32_t i) const { return nodes_[i]; }
  std::optional<std::uint32_t> find(int k, StateId s) const;

  // Flattened (node, action) pair indexing over layers 0..h-1; the variable
  // layout of the ILP and of flow assignments.
  std::uint64_t pair_index(std::uint32_t node, std::size_t action_ordinal) const {
    return pair_offset_[node] + action_ordinal;
  }
  std::uint64_t pair_offset(std::uint32_t node) const { return pair_offset_[node]; }
  std::uint64_t num_pairs() const { return num_pairs_; }

  // Incoming arcs of a node as (from_node, action_ordinal, prob).
  struct InArc {
    std::uint32_t from;
    std::uint32_t action_ordinal;
    double prob;
  };
  const std::vector<InArc>& incoming(std::uint32_t node) const {
    return incoming_[node];
  }

  // Deserialization support for the graph cache.
  struct Parts {
    int horizon = 0;
    std::vector<std::uint32_t> layer_begin;
    std::vector<StateId> states;
    std::vector<std::vector<ActionArcs>> actions;
  };
  static LayeredGraph assemble(Parts parts);

 private:
  friend LayeredGraph expand(const ProblemSpec&, const struct ExpandOptions&);
  int horizon_ = 0;
  std::vector<GraphNode> nodes_;
  std::vector<std::uint32_t> layer_begin_;
  std::vector<std::uint64_t> pair_offset_;
  std::uint64_t num_pairs_ = 0;
  std::vector<std::unordered_map<StateId, std::uint32_t>> index_;
  std::vector<std::vector<InArc>> incoming_;
};

struct ExpandOptions {
  std::uint64_t node_cap = 10'000'000;
};

// Breadth-first expansion with sorted successor ids; deterministic node
// ordering, duplicate successor arcs pre-merged. Throws NodeCapExceeded when
// the instance is too large.
LayeredGraph expand(const ProblemSpec& spec, const ExpandOptions& opts = {});

struct NodeCensus {
  std::uint64_t graph_nodes = 0;
  BigInt tree_nodes;  // And-Or history tree: state and action nodes counted
  std::string tree_nodes_decimal() const { return tree_nodes.str(); }
  std::string tree_nodes_scientific() const;
};

NodeCensus census(const LayeredGraph& graph);

// True when the policy has an entry for every node in layers 0..h-1.
bool policy_covers(const LayeredGraph& graph, const Policy& policy);

}  // namespace ccssp
