#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ccssp/graph.hpp"
#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"
#include "ccssp/risk.hpp"

namespace ccssp {

using Json = nlohmann::json;

// A problem parsed from the JSON interchange format: either an explicit
// transition table (the oracle-test interchange form) or a named builtin
// generator reference (grid, highway).
struct LoadedProblem {
  ProblemSpec spec;
  std::string source;  // "table", "grid", "highway"
  // Explicit-table problems: state name -> id (ids are positions in the
  // sorted name list; generators label states themselves).
  std::unordered_map<std::string, StateId> state_ids;
};

LoadedProblem load_problem(const Json& j);
LoadedProblem load_problem_file(const std::string& path);

// Explicit-table export of a spec's reachable fragment (small instances
// only; enumerates states reachable within the horizon).
Json problem_to_json(const ProblemSpec& spec, std::uint64_t node_cap = 200000);

Json policy_to_json(const Policy& policy, const ProblemSpec& spec);
// Resolves state labels against the expanded graph of `spec`.
Policy policy_from_json(const Json& j, const ProblemSpec& spec,
                        const LayeredGraph& graph);

Json risk_report_to_json(const RiskReport& report);
Json census_to_json(const NodeCensus& c);

// Graph cache format: node table + arc table, deterministic field order.
Json graph_to_json(const LayeredGraph& graph);
LayeredGraph graph_from_json(const Json& j);
void save_json(const Json& j, const std::string& path);
Json load_json_file(const std::string& path);

std::string csv_escape(const std::string& field);

}  // namespace ccssp
