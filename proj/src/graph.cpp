#include "ccssp/graph.hpp"

#include <algorithm>
#include <cstdio>

#include "ccssp/errors.hpp"

namespace ccssp {

int LayeredGraph::layer_of(std::uint32_t node) const {
  auto it = std::upper_bound(layer_begin_.begin(), layer_begin_.end(), node);
  return static_cast<int>(it - layer_begin_.begin()) - 1;
}

std::optional<std::uint32_t> LayeredGraph::find(int k, StateId s) const {
  if (k < 0 || k > horizon_) return std::nullopt;
  auto it = index_[k].find(s);
  if (it == index_[k].end()) return std::nullopt;
  return it->second;
}

LayeredGraph expand(const ProblemSpec& spec, const ExpandOptions& opts) {
  LayeredGraph g;
  const int h = spec.horizon;
  g.horizon_ = h;
  g.index_.resize(h + 1);
  g.layer_begin_.assign(1, 0);

  g.nodes_.push_back(GraphNode{spec.initial_state, {}});
  g.index_[0].emplace(spec.initial_state, 0);
  g.layer_begin_.push_back(1);

  for (int k = 0; k < h; ++k) {
    const std::uint32_t begin = g.layer_begin_[k];
    const std::uint32_t end = g.layer_begin_[k + 1];
    for (std::uint32_t ni = begin; ni < end; ++ni) {
      const StateId s = g.nodes_[ni].state;
      std::vector<ActionArcs> acts;
      for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
        auto succ = spec.transition.successors(s, a);
        if (succ.empty()) continue;
        // Sorted successor ids; duplicate arcs merged.
        std::sort(succ.begin(), succ.end(),
                  [](const Successor& x, const Successor& y) {
                    return x.state < y.state;
                  });
        ActionArcs aa;
        aa.action = a;
        for (std::size_t i = 0; i < succ.size(); ++i) {
          double p = succ[i].prob;
          while (i + 1 < succ.size() && succ[i + 1].state == succ[i].state) {
            p += succ[++i].prob;
          }
          StateId to_state = succ[i].state;
          auto it = g.index_[k + 1].find(to_state);
          std::uint32_t to;
          if (it == g.index_[k + 1].end()) {
            if (g.nodes_.size() >= opts.node_cap) {
              throw NodeCapExceeded(
                  "expansion exceeded the state-node cap of " +
                  std::to_string(opts.node_cap) +
                  " at layer " + std::to_string(k + 1));
            }
            to = static_cast<std::uint32_t>(g.nodes_.size());
            g.nodes_.push_back(GraphNode{to_state, {}});
            g.index_[k + 1].emplace(to_state, to);
          } else {
            to = it->second;
          }
          aa.arcs.push_back(Arc{to, p});
        }
        acts.push_back(std::move(aa));
      }
      g.nodes_[ni].actions = std::move(acts);
    }
    g.layer_begin_.push_back(static_cast<std::uint32_t>(g.nodes_.size()));
  }

  // Pair indexing over layers 0..h-1 and incoming-arc lists.
  g.pair_offset_.assign(g.nodes_.size(), 0);
  g.incoming_.assign(g.nodes_.size(), {});
  std::uint64_t pairs = 0;
  for (std::uint32_t ni = 0; ni < g.layer_begin_[h]; ++ni) {
    g.pair_offset_[ni] = pairs;
    pairs += g.nodes_[ni].actions.size();
  }
  g.num_pairs_ = pairs;
  for (std::uint32_t ni = 0; ni < g.layer_begin_[h]; ++ni) {
    const auto& acts = g.nodes_[ni].actions;
    for (std::uint32_t ord = 0; ord < acts.size(); ++ord) {
      for (const Arc& arc : acts[ord].arcs) {
        g.incoming_[arc.to].push_back(LayeredGraph::InArc{ni, ord, arc.prob});
      }
    }
  }
  return g;
}

LayeredGraph LayeredGraph::assemble(Parts parts) {
  LayeredGraph g;
  g.horizon_ = parts.horizon;
  g.layer_begin_ = std::move(parts.layer_begin);
  if (g.layer_begin_.size() != static_cast<std::size_t>(g.horizon_) + 2) {
    throw IoError("graph cache: layer table does not match horizon");
  }
  const std::size_t n = parts.states.size();
  if (parts.actions.size() != n || g.layer_begin_.back() != n) {
    throw IoError("graph cache: node tables inconsistent");
  }
  g.nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes_[i].state = parts.states[i];
    g.nodes_[i].actions = std::move(parts.actions[i]);
  }
  g.index_.resize(g.horizon_ + 1);
  for (int k = 0; k <= g.horizon_; ++k) {
    for (std::uint32_t ni = g.layer_begin_[k]; ni < g.layer_begin_[k + 1]; ++ni) {
      g.index_[k].emplace(g.nodes_[ni].state, ni);
    }
  }
  g.pair_offset_.assign(n, 0);
  g.incoming_.assign(n, {});
  std::uint64_t pairs = 0;
  for (std::uint32_t ni = 0; ni < g.layer_begin_[g.horizon_]; ++ni) {
    g.pair_offset_[ni] = pairs;
    pairs += g.nodes_[ni].actions.size();
  }
  g.num_pairs_ = pairs;
  for (std::uint32_t ni = 0; ni < g.layer_begin_[g.horizon_]; ++ni) {
    const auto& acts = g.nodes_[ni].actions;
    for (std::uint32_t ord = 0; ord < acts.size(); ++ord) {
      for (const Arc& arc : acts[ord].arcs) {
        if (arc.to >= n) throw IoError("graph cache: arc target out of range");
        g.incoming_[arc.to].push_back(LayeredGraph::InArc{ni, ord, arc.prob});
      }
    }
  }
  return g;
}

NodeCensus census(const LayeredGraph& graph) {
  NodeCensus c;
  c.graph_nodes = graph.num_nodes();
  // N(state node at layer h) = 1; otherwise
  // N(node) = 1 + sum_a (1 + sum_arcs N(child)): state and action nodes of
  // the history tree both counted.
  const int h = graph.horizon();
  std::vector<BigInt> n(graph.num_nodes());
  for (std::uint32_t ni = graph.layer_begin(h); ni < graph.layer_end(h); ++ni) {
    n[ni] = 1;
  }
  for (int k = h - 1; k >= 0; --k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      BigInt total = 1;
      for (const auto& aa : graph.node(ni).actions) {
        BigInt sub = 1;
        for (const Arc& arc : aa.arcs) sub += n[arc.to];
        total += sub;
      }
      n[ni] = total;
    }
  }
  c.tree_nodes = n.empty() ? BigInt(0) : n[0];
  return c;
}

std::string NodeCensus::tree_nodes_scientific() const {
  std::string dec = tree_nodes.str();
  if (dec.size() <= 6) return dec;
  std::string mant = dec.substr(0, 1) + "." + dec.substr(1, 2);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%se%zu", mant.c_str(), dec.size() - 1);
  return buf;
}

bool policy_covers(const LayeredGraph& graph, const Policy& policy) {
  for (int k = 0; k < graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      if (!policy.contains(graph.node(ni).state, k)) return false;
    }
  }
  return true;
}

}  // namespace ccssp
