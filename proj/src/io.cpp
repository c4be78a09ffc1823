#include "ccssp/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "ccssp/benchmarks.hpp"
#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

struct TableData {
  std::uint32_t num_actions = 0;
  // [state][action] -> successors; empty vector means unavailable.
  std::vector<std::vector<std::vector<Successor>>> succ;
  std::vector<std::vector<double>> util;
  std::vector<std::vector<double>> risk;                 // [criterion][state]
  std::vector<std::vector<std::vector<double>>> cost;    // [criterion][s][a]
  std::vector<std::string> state_names;
};

StateId require_state(const std::unordered_map<std::string, StateId>& ids,
                      const std::string& name) {
  auto it = ids.find(name);
  if (it == ids.end()) throw IoError("unknown state name: " + name);
  return it->second;
}

ActionId require_action(const std::map<std::string, ActionId>& ids,
                        const std::string& name) {
  auto it = ids.find(name);
  if (it == ids.end()) throw IoError("unknown action name: " + name);
  return it->second;
}

LoadedProblem load_table_problem(const Json& j) {
  LoadedProblem out;
  out.source = "table";

  const auto& trans = j.at("transitions");
  std::set<std::string> state_set;
  std::set<std::string> action_set;
  state_set.insert(j.at("initial_state").get<std::string>());
  for (auto it = trans.begin(); it != trans.end(); ++it) {
    state_set.insert(it.key());
    for (auto at = it.value().begin(); at != it.value().end(); ++at) {
      action_set.insert(at.key());
      for (const auto& arc : at.value()) {
        state_set.insert(arc.at(0).get<std::string>());
      }
    }
  }
  std::vector<std::string> action_names;
  if (j.contains("actions")) {
    for (const auto& a : j.at("actions")) {
      action_names.push_back(a.get<std::string>());
    }
  } else {
    action_names.assign(action_set.begin(), action_set.end());
  }
  std::map<std::string, ActionId> action_ids;
  for (std::size_t i = 0; i < action_names.size(); ++i) {
    action_ids[action_names[i]] = static_cast<ActionId>(i);
  }

  auto data = std::make_shared<TableData>();
  data->state_names.assign(state_set.begin(), state_set.end());
  for (std::size_t i = 0; i < data->state_names.size(); ++i) {
    out.state_ids[data->state_names[i]] = static_cast<StateId>(i);
  }
  data->num_actions = static_cast<std::uint32_t>(action_names.size());
  const std::size_t n = data->state_names.size();
  data->succ.assign(n, std::vector<std::vector<Successor>>(data->num_actions));
  data->util.assign(n, std::vector<double>(data->num_actions, 0.0));

  for (auto it = trans.begin(); it != trans.end(); ++it) {
    const StateId s = require_state(out.state_ids, it.key());
    for (auto at = it.value().begin(); at != it.value().end(); ++at) {
      const ActionId a = require_action(action_ids, at.key());
      for (const auto& arc : at.value()) {
        data->succ[s][a].push_back(
            Successor{require_state(out.state_ids, arc.at(0).get<std::string>()),
                      arc.at(1).get<double>()});
      }
    }
  }
  if (j.contains("utility")) {
    for (auto it = j.at("utility").begin(); it != j.at("utility").end(); ++it) {
      const StateId s = require_state(out.state_ids, it.key());
      for (auto at = it.value().begin(); at != it.value().end(); ++at) {
        data->util[s][require_action(action_ids, at.key())] =
            at.value().get<double>();
      }
    }
  }

  ProblemSpec& spec = out.spec;
  spec.horizon = j.at("horizon").get<int>();
  spec.initial_state =
      require_state(out.state_ids, j.at("initial_state").get<std::string>());
  spec.action_names = action_names;
  spec.transition.num_actions = data->num_actions;
  spec.transition.successors = [data](StateId s, ActionId a) {
    if (s >= data->succ.size() || a >= data->num_actions) {
      return std::vector<Successor>{};
    }
    return data->succ[s][a];
  };
  spec.utility.sense =
      j.value("sense", std::string("min")) == "max" ? Sense::Maximize
                                                    : Sense::Minimize;
  spec.utility.value = [data](StateId s, ActionId a) { return data->util[s][a]; };
  spec.state_label = [data](StateId s) {
    return s < data->state_names.size() ? data->state_names[s]
                                        : std::to_string(s);
  };

  int risk_index = 1;
  if (j.contains("risks")) {
    for (const auto& rj : j.at("risks")) {
      std::vector<double> r(n, 0.0);
      if (rj.contains("risky_states")) {
        for (auto it = rj.at("risky_states").begin();
             it != rj.at("risky_states").end(); ++it) {
          r[require_state(out.state_ids, it.key())] = it.value().get<double>();
        }
      }
      data->risk.push_back(std::move(r));
      RiskCriterion rc;
      rc.index = rj.value("index", risk_index);
      rc.delta = rj.at("delta").get<double>();
      const std::size_t idx = data->risk.size() - 1;
      rc.risk = [data, idx](StateId s) {
        return s < data->risk[idx].size() ? data->risk[idx][s] : 0.0;
      };
      spec.risks.push_back(std::move(rc));
      ++risk_index;
    }
  }
  int cost_index = 1;
  if (j.contains("costs")) {
    for (const auto& cj : j.at("costs")) {
      std::vector<std::vector<double>> c(
          n, std::vector<double>(data->num_actions, cj.value("default", 0.0)));
      if (cj.contains("values")) {
        for (auto it = cj.at("values").begin(); it != cj.at("values").end();
             ++it) {
          const StateId s = require_state(out.state_ids, it.key());
          for (auto at = it.value().begin(); at != it.value().end(); ++at) {
            c[s][require_action(action_ids, at.key())] = at.value().get<double>();
          }
        }
      }
      data->cost.push_back(std::move(c));
      CostCriterion cc;
      cc.index = cj.value("index", cost_index);
      const std::string kind = cj.at("kind").get<std::string>();
      if (kind == "expected") {
        cc.kind = CostCriterion::Kind::ExpectedBudget;
      } else if (kind == "global_chance") {
        cc.kind = CostCriterion::Kind::GlobalChance;
        cc.delta = cj.at("delta").get<double>();
      } else {
        throw IoError("unknown cost kind: " + kind);
      }
      cc.bound = cj.at("bound").get<double>();
      const std::size_t idx = data->cost.size() - 1;
      cc.cost = [data, idx](StateId s, ActionId a) {
        return data->cost[idx][s][a];
      };
      spec.costs.push_back(std::move(cc));
      ++cost_index;
    }
  }
  return out;
}

LoadedProblem load_generator_problem(const Json& j) {
  LoadedProblem out;
  const auto& gj = j.at("generator");
  const std::string name = gj.at("name").get<std::string>();
  double delta = 0.05;
  if (j.contains("risks") && !j.at("risks").empty()) {
    delta = j.at("risks").at(0).value("delta", delta);
  }
  if (name == "grid") {
    GridParams p;
    p.width = gj.value("width", p.width);
    p.height = gj.value("height", p.height);
    if (gj.contains("start")) {
      p.start_x = gj.at("start").at(0).get<std::uint32_t>();
      p.start_y = gj.at("start").at(1).get<std::uint32_t>();
    } else {
      p.start_x = p.width / 2;
      p.start_y = p.height / 2;
    }
    p.success_prob = gj.value("success_prob", p.success_prob);
    p.risky_fraction = gj.value("risky_fraction", p.risky_fraction);
    p.cheap_fraction = gj.value("cheap_fraction", p.cheap_fraction);
    p.cheap_cost = gj.value("cheap_cost", p.cheap_cost);
    p.default_cost = gj.value("default_cost", p.default_cost);
    p.seed = gj.value("seed", p.seed);
    p.delta = delta;
    out.spec = gen_grid(p);
    out.source = "grid";
  } else if (name == "highway") {
    HighwayParams p;
    p.lanes = gj.value("lanes", p.lanes);
    p.cells = gj.value("cells", p.cells);
    if (gj.contains("ego")) {
      p.ego_lane = gj.at("ego").at(0).get<std::uint32_t>();
      p.ego_pos = gj.at("ego").at(1).get<std::uint32_t>();
    }
    if (gj.contains("hvs")) {
      for (const auto& hv : gj.at("hvs")) {
        HvParams h;
        h.lane = hv.at(0).get<std::uint32_t>();
        h.pos = hv.at(1).get<std::uint32_t>();
        if (hv.size() > 2) h.drift = hv.at(2).get<int>();
        p.hvs.push_back(h);
      }
      p.num_hvs = static_cast<std::uint32_t>(p.hvs.size());
    } else {
      p.num_hvs = gj.value("num_hvs", p.num_hvs);
    }
    p.keep_prob = gj.value("keep_prob", p.keep_prob);
    p.complete_prob = gj.value("complete_prob", p.complete_prob);
    if (gj.contains("action_costs")) {
      p.action_costs = gj.at("action_costs").get<std::vector<double>>();
    }
    p.seed = gj.value("seed", p.seed);
    p.delta = delta;
    out.spec = gen_highway(p);
    out.source = "highway";
  } else {
    throw IoError("unknown generator: " + name);
  }
  out.spec.horizon = j.at("horizon").get<int>();
  return out;
}

}  // namespace

LoadedProblem load_problem(const Json& j) {
  if (j.contains("generator")) return load_generator_problem(j);
  if (j.contains("transitions")) return load_table_problem(j);
  throw IoError("problem file needs either `transitions` or `generator`");
}

LoadedProblem load_problem_file(const std::string& path) {
  return load_problem(load_json_file(path));
}

Json problem_to_json(const ProblemSpec& spec, std::uint64_t node_cap) {
  // Reachable state scan.
  std::vector<StateId> order{spec.initial_state};
  std::set<StateId> seen{spec.initial_state};
  std::vector<StateId> frontier{spec.initial_state};
  for (int k = 0; k < spec.horizon; ++k) {
    std::vector<StateId> next;
    for (StateId s : frontier) {
      for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
        for (const auto& t : spec.transition.successors(s, a)) {
          if (seen.insert(t.state).second) {
            order.push_back(t.state);
            next.push_back(t.state);
            if (order.size() > node_cap) {
              throw NodeCapExceeded(
                  "explicit-table export exceeds the state cap of " +
                  std::to_string(node_cap));
            }
          }
        }
      }
    }
    frontier = std::move(next);
  }

  Json trans = Json::object();
  Json util = Json::object();
  for (StateId s : order) {
    Json per_action = Json::object();
    Json per_action_util = Json::object();
    for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
      const auto succ = spec.transition.successors(s, a);
      if (succ.empty()) continue;
      Json arcs = Json::array();
      for (const auto& t : succ) {
        arcs.push_back(Json::array({spec.label(t.state), t.prob}));
      }
      per_action[spec.action_name(a)] = std::move(arcs);
      per_action_util[spec.action_name(a)] = spec.utility.value(s, a);
    }
    if (!per_action.empty()) {
      trans[spec.label(s)] = std::move(per_action);
      util[spec.label(s)] = std::move(per_action_util);
    }
  }

  Json j;
  j["horizon"] = spec.horizon;
  j["initial_state"] = spec.label(spec.initial_state);
  j["sense"] = spec.utility.sense == Sense::Maximize ? "max" : "min";
  Json actions = Json::array();
  for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
    actions.push_back(spec.action_name(a));
  }
  j["actions"] = std::move(actions);
  j["transitions"] = std::move(trans);
  j["utility"] = std::move(util);

  Json risks = Json::array();
  for (const auto& rc : spec.risks) {
    Json rj;
    rj["index"] = rc.index;
    rj["delta"] = rc.delta;
    Json risky = Json::object();
    for (StateId s : order) {
      const double r = rc.risk(s);
      if (r != 0.0) risky[spec.label(s)] = r;
    }
    rj["risky_states"] = std::move(risky);
    risks.push_back(std::move(rj));
  }
  j["risks"] = std::move(risks);

  Json costs = Json::array();
  for (const auto& cc : spec.costs) {
    Json cj;
    cj["index"] = cc.index;
    cj["kind"] = cc.kind == CostCriterion::Kind::ExpectedBudget
                     ? "expected"
                     : "global_chance";
    cj["bound"] = cc.bound;
    if (cc.kind == CostCriterion::Kind::GlobalChance) cj["delta"] = cc.delta;
    Json values = Json::object();
    for (StateId s : order) {
      Json per_action = Json::object();
      for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
        if (spec.transition.successors(s, a).empty()) continue;
        const double c = cc.cost(s, a);
        if (c != 0.0) per_action[spec.action_name(a)] = c;
      }
      if (!per_action.empty()) values[spec.label(s)] = std::move(per_action);
    }
    cj["values"] = std::move(values);
    costs.push_back(std::move(cj));
  }
  j["costs"] = std::move(costs);
  return j;
}

Json policy_to_json(const Policy& policy, const ProblemSpec& spec) {
  Json j;
  j["kind"] = policy.kind() == Policy::Kind::Deterministic ? "deterministic"
                                                           : "stochastic";
  j["horizon"] = spec.horizon;
  // Sorted for reproducible files.
  std::vector<std::pair<NodeKey, const std::vector<ActionProb>*>> items;
  for (const auto& [key, dist] : policy.entries()) {
    items.emplace_back(key, &dist);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.first.step != b.first.step ? a.first.step < b.first.step
                                        : a.first.state < b.first.state;
  });
  Json entries = Json::array();
  for (const auto& [key, dist] : items) {
    Json e;
    e["state"] = spec.label(key.state);
    e["step"] = key.step;
    if (dist->size() == 1 && (*dist)[0].prob == 1.0) {
      e["action"] = spec.action_name((*dist)[0].action);
    } else {
      Json d = Json::array();
      for (const auto& ap : *dist) {
        d.push_back(Json::array({spec.action_name(ap.action), ap.prob}));
      }
      e["dist"] = std::move(d);
    }
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

Policy policy_from_json(const Json& j, const ProblemSpec& spec,
                        const LayeredGraph& graph) {
  Policy p(j.value("kind", std::string("deterministic")) == "stochastic"
               ? Policy::Kind::Stochastic
               : Policy::Kind::Deterministic);
  // Label -> state per layer.
  std::vector<std::unordered_map<std::string, StateId>> labels(graph.horizon() + 1);
  for (int k = 0; k <= graph.horizon(); ++k) {
    for (std::uint32_t ni = graph.layer_begin(k); ni < graph.layer_end(k); ++ni) {
      labels[k][spec.label(graph.node(ni).state)] = graph.node(ni).state;
    }
  }
  std::map<std::string, ActionId> action_ids;
  for (ActionId a = 0; a < spec.transition.num_actions; ++a) {
    action_ids[spec.action_name(a)] = a;
  }
  for (const auto& e : j.at("entries")) {
    const int step = e.at("step").get<int>();
    if (step < 0 || step >= graph.horizon()) {
      throw IoError("policy entry step out of range");
    }
    const std::string name = e.at("state").get<std::string>();
    auto it = labels[step].find(name);
    if (it == labels[step].end()) {
      throw IoError("policy references unknown state " + name + " at step " +
                    std::to_string(step));
    }
    if (e.contains("action")) {
      p.set_action(it->second, step,
                   require_action(action_ids, e.at("action").get<std::string>()));
    } else {
      std::vector<ActionProb> dist;
      for (const auto& ap : e.at("dist")) {
        dist.push_back(ActionProb{
            require_action(action_ids, ap.at(0).get<std::string>()),
            ap.at(1).get<double>()});
      }
      p.set_distribution(it->second, step, std::move(dist));
    }
  }
  return p;
}

Json risk_report_to_json(const RiskReport& report) {
  Json j;
  j["expected_utility"] = report.expected_utility;
  Json arr = Json::array();
  for (const auto& e : report.criteria) {
    Json c;
    c["index"] = e.criterion_index;
    c["delta"] = e.delta;
    c["er_recursive"] = e.er_recursive;
    c["er_linear"] = e.er_linear;
    if (e.has_sampled) {
      c["er_sampled"] = {{"estimate", e.sampled.estimate},
                         {"half_width_99", e.sampled.half_width},
                         {"n", e.sampled.n}};
    }
    arr.push_back(std::move(c));
  }
  j["criteria"] = std::move(arr);
  return j;
}

Json census_to_json(const NodeCensus& c) {
  Json j;
  j["graph_nodes"] = c.graph_nodes;
  j["tree_nodes"] = c.tree_nodes_decimal();
  j["tree_nodes_scientific"] = c.tree_nodes_scientific();
  return j;
}

Json graph_to_json(const LayeredGraph& graph) {
  Json j;
  j["horizon"] = graph.horizon();
  Json layers = Json::array();
  for (int k = 0; k <= graph.horizon(); ++k) layers.push_back(graph.layer_begin(k));
  layers.push_back(graph.layer_end(graph.horizon()));
  j["layer_begin"] = std::move(layers);
  Json nodes = Json::array();
  Json arcs = Json::array();
  for (std::uint32_t ni = 0; ni < graph.num_nodes(); ++ni) {
    // StateIds can exceed 2^53: stored as decimal strings.
    nodes.push_back(std::to_string(graph.node(ni).state));
    for (const auto& aa : graph.node(ni).actions) {
      for (const Arc& arc : aa.arcs) {
        arcs.push_back(Json::array({ni, aa.action, arc.to, arc.prob}));
      }
    }
  }
  j["nodes"] = std::move(nodes);
  j["arcs"] = std::move(arcs);
  return j;
}

LayeredGraph graph_from_json(const Json& j) {
  LayeredGraph::Parts parts;
  parts.horizon = j.at("horizon").get<int>();
  for (const auto& v : j.at("layer_begin")) {
    parts.layer_begin.push_back(v.get<std::uint32_t>());
  }
  for (const auto& v : j.at("nodes")) {
    parts.states.push_back(std::stoull(v.get<std::string>()));
  }
  parts.actions.resize(parts.states.size());
  for (const auto& arc : j.at("arcs")) {
    const auto from = arc.at(0).get<std::uint32_t>();
    const auto action = arc.at(1).get<ActionId>();
    const auto to = arc.at(2).get<std::uint32_t>();
    const auto prob = arc.at(3).get<double>();
    if (from >= parts.actions.size()) throw IoError("graph cache: bad arc");
    auto& acts = parts.actions[from];
    if (acts.empty() || acts.back().action != action) {
      acts.push_back(ActionArcs{action, {}});
    }
    acts.back().arcs.push_back(Arc{to, prob});
  }
  return LayeredGraph::assemble(std::move(parts));
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

Json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  Json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace ccssp
