#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccssp/benchmarks.hpp"
#include "ccssp/errors.hpp"
#include "ccssp/gcc.hpp"
#include "ccssp/graph.hpp"
#include "ccssp/ilp.hpp"
#include "ccssp/io.hpp"
#include "ccssp/milp.hpp"
#include "ccssp/mps.hpp"
#include "ccssp/oracle.hpp"
#include "ccssp/rng.hpp"
#include "ccssp/rounding.hpp"

namespace {

using namespace ccssp;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

// Exit codes: success, infeasible, limit, capacity, usage are disjoint.
enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kInfeasible = 2,
  kLimit = 3,
  kCapacity = 4,
  kUsage = 64,
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ProblemSource {
  std::string file;
  std::string builtin;  // "grid" | "highway" | ""
  // Generator knobs.
  std::uint32_t size = 100;
  std::uint32_t lanes = 3;
  std::uint32_t cells = 8;
  std::uint32_t hvs = 2;
  double success_prob = 0.8;
  double risky_fraction = 0.05;
  double cheap_fraction = 0.10;
  std::uint64_t gen_seed = 0;

  std::optional<int> horizon;
  std::optional<double> delta;

  void add_options(CLI::App* cmd, bool positional = true) {
    if (positional) {
      cmd->add_option("problem", file, "Problem JSON file");
    }
    cmd->add_option("--builtin", builtin, "Builtin generator: grid or highway")
        ->check(CLI::IsMember({"grid", "highway"}));
    cmd->add_option("--size", size, "Grid side length (builtin grid)");
    cmd->add_option("--lanes", lanes, "Highway lanes");
    cmd->add_option("--cells", cells, "Highway longitudinal cells");
    cmd->add_option("--hvs", hvs, "Highway human-driven vehicle count");
    cmd->add_option("--success-prob", success_prob, "Grid move success probability");
    cmd->add_option("--risky-fraction", risky_fraction, "Grid risky cell fraction");
    cmd->add_option("--cheap-fraction", cheap_fraction, "Grid cheap cell fraction");
    cmd->add_option("--gen-seed", gen_seed, "Generator seed");
    int* h_ptr = nullptr;
    (void)h_ptr;
    cmd->add_option_function<int>(
           "--horizon,--h", [this](const int& v) { horizon = v; },
           "Planning horizon");
    cmd->add_option_function<double>(
           "--delta", [this](const double& v) { delta = v; },
           "Risk budget applied to every risk criterion");
  }

  ProblemSpec resolve() const {
    ProblemSpec spec;
    if (!file.empty()) {
      spec = load_problem_file(file).spec;
    } else if (builtin == "grid") {
      GridParams p;
      p.width = p.height = size;
      p.start_x = p.start_y = size / 2;
      p.success_prob = success_prob;
      p.risky_fraction = risky_fraction;
      p.cheap_fraction = cheap_fraction;
      p.seed = gen_seed;
      if (delta) p.delta = *delta;
      spec = gen_grid(p);
    } else if (builtin == "highway") {
      HighwayParams p;
      p.lanes = lanes;
      p.cells = cells;
      p.num_hvs = hvs;
      p.ego_lane = lanes / 2;
      p.ego_pos = cells / 3;
      p.seed = gen_seed;
      if (delta) p.delta = *delta;
      spec = gen_highway(p);
    } else {
      throw CLI::ValidationError(
          "problem", "give a problem file or --builtin {grid,highway}");
    }
    if (horizon) spec.horizon = *horizon;
    if (delta) {
      for (auto& rc : spec.risks) rc.delta = *delta;
    }
    return spec;
  }

  std::string describe() const { return file.empty() ? "builtin:" + builtin : file; }
};

std::uint64_t node_cap_from_env() {
  if (const char* v = std::getenv("CCSSP_NODE_CAP")) {
    return std::strtoull(v, nullptr, 10);
  }
  return ExpandOptions{}.node_cap;
}

std::string hash_config(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void write_manifest(const std::string& out_prefix, const std::string& command,
                    const std::string& source, std::uint64_t seed,
                    const Json& timings, const std::string& config_text) {
  Json m;
  m["command"] = command;
  m["problem"] = source;
  m["config_hash"] = hash_config(config_text);
  m["seed"] = seed;
  m["version"] = kVersion;
  m["timings"] = timings;
  save_json(m, out_prefix + ".manifest.json");
}

int map_exception() {
  try {
    throw;
  } catch (const InfeasibleAtRoot& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NoFeasibleRounding& e) {
    std::cerr << "limit: " << e.what() << "\n";
    return kLimit;
  } catch (const NodeCapExceeded& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kCapacity;
  } catch (const AugmentationBlowup& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kCapacity;
  } catch (const RunCapExceeded& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kCapacity;
  } catch (const PolicySpaceCapExceeded& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kCapacity;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}

int cmd_solve(const ProblemSource& src, const std::string& mode,
              std::uint64_t seed, const std::string& out,
              std::uint64_t samples) {
  const ProblemSpec spec = src.resolve();
  Json timings;

  auto t0 = Clock::now();
  ExpandOptions eo;
  eo.node_cap = node_cap_from_env();
  const LayeredGraph graph = expand(spec, eo);
  timings["expand_s"] = seconds_since(t0);
  const NodeCensus cen = census(graph);

  const SolveCriteria criteria = SolveCriteria::from_spec(spec);
  t0 = Clock::now();
  const ModelIR model = build_ilp(graph, spec, criteria, mode != "ilp");
  timings["build_s"] = seconds_since(t0);

  Policy policy;
  double objective = 0.0;
  std::string status = "optimal";
  SolveStats stats;
  int code = kOk;

  if (mode == "ilp") {
    t0 = Clock::now();
    const Solution sol = solve_milp(model);
    timings["solve_s"] = seconds_since(t0);
    stats = sol.stats;
    status = to_string(sol.status);
    if (sol.status == SolveStatus::Optimal) {
      policy = extract_policy(sol.x, model, graph, spec).policy;
      objective = sol.objective;
    } else {
      code = sol.status == SolveStatus::Infeasible ? kInfeasible : kLimit;
    }
  } else if (mode == "lp") {
    t0 = Clock::now();
    const Solution sol = solve_lp(model);
    timings["solve_s"] = seconds_since(t0);
    stats = sol.stats;
    status = to_string(sol.status);
    if (sol.status == SolveStatus::Optimal) {
      policy = extract_policy(sol.x, model, graph, spec).policy;
      objective = sol.objective;
    } else {
      code = sol.status == SolveStatus::Infeasible ? kInfeasible : kLimit;
    }
  } else {  // round
    t0 = Clock::now();
    const Solution lp = solve_lp(model);
    timings["solve_s"] = seconds_since(t0);
    status = to_string(lp.status);
    stats = lp.stats;
    if (lp.status != SolveStatus::Optimal) {
      code = lp.status == SolveStatus::Infeasible ? kInfeasible : kLimit;
    } else {
      RoundingConfig rcfg;
      rcfg.seed = seed;
      t0 = Clock::now();
      const RoundingOutcome ro = round(lp, model, graph, spec, criteria, rcfg);
      timings["round_s"] = seconds_since(t0);
      policy = ro.policy;
      objective = ro.objective;
      status = "feasible";
    }
  }

  Json summary;
  summary["status"] = status;
  summary["graph_nodes"] = cen.graph_nodes;
  summary["tree_nodes"] = cen.tree_nodes_scientific();
  summary["simplex_iterations"] = stats.simplex_iterations;
  summary["bb_nodes"] = stats.bb_nodes;
  if (code == kOk) {
    summary["objective"] = objective;
    t0 = Clock::now();
    const RiskReport rep = risk_report(graph, spec, policy, samples, seed);
    timings["verify_s"] = seconds_since(t0);
    summary["risk"] = risk_report_to_json(rep);
    if (!out.empty()) {
      save_json(policy_to_json(policy, spec), out + ".policy.json");
      save_json(summary["risk"], out + ".risk.json");
    }
  }
  summary["timings"] = timings;
  std::cout << summary.dump(2) << "\n";
  if (!out.empty()) {
    std::ostringstream cfg;
    cfg << src.describe() << "|" << mode << "|" << seed;
    write_manifest(out, "solve", src.describe(), seed, timings, cfg.str());
    save_json(summary, out + ".summary.json");
  }
  return code;
}

int cmd_table(const std::string& benchmark, std::vector<int> horizons,
              std::vector<double> deltas, const std::string& out,
              std::uint32_t size, std::uint32_t hvs, std::uint64_t seed) {
  ProblemSource src;
  src.builtin = benchmark;
  src.size = size;
  src.hvs = hvs;
  src.gen_seed = seed;
  ProblemSpec spec = src.resolve();

  std::ostringstream csv;
  csv << "benchmark,horizon,delta,ilp_objective,ilp_seconds,rounding_objective,"
         "rounding_seconds,graph_nodes,tree_nodes,status\n";
  MonotonicityTable table;
  if (!horizons.empty() && !deltas.empty()) {
    table = monotonicity_suite(spec, horizons, deltas, seed);
  }
  for (const auto& c : table.cells) {
    csv << benchmark << "," << c.horizon << "," << c.delta << ","
        << c.ilp_objective << "," << c.ilp_seconds << "," << c.rounding_objective
        << "," << c.rounding_seconds << "," << c.graph_nodes << ","
        << c.tree_nodes << "," << csv_escape(c.status) << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out);
    os << csv.str();
    std::cout << "wrote " << out << "\n";
  }
  for (const auto& v : table.violations) {
    std::cerr << "monotonicity violation: " << v << "\n";
  }
  return kOk;
}

int cmd_ratio(const ProblemSource& src, int trials, double confidence,
              std::uint64_t seed, const std::string& out) {
  const ProblemSpec spec = src.resolve();
  const RatioExperiment exp =
      approximation_ratio_experiment(spec, trials, seed, confidence);

  std::ostringstream csv;
  csv << "trial,seed,ratio,iterations,seconds,objective";
  const std::size_t q = exp.trials.empty() ? 0 : exp.trials[0].risks.size();
  for (std::size_t j = 1; j <= q; ++j) csv << ",risk_" << j;
  csv << "\n";
  for (const auto& t : exp.trials) {
    csv << t.trial << "," << t.seed << "," << t.ratio << "," << t.iterations
        << "," << t.seconds << "," << t.objective;
    for (double r : t.risks) csv << "," << r;
    csv << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out);
    os << csv.str();
  }
  Json summary;
  summary["ilp_objective"] = exp.ilp_objective;
  summary["lp_objective"] = exp.lp_objective;
  summary["ilp_seconds"] = exp.ilp_seconds;
  summary["lp_seconds"] = exp.lp_seconds;
  summary["mean_ratio"] = exp.mean;
  summary["min_ratio"] = exp.min_ratio;
  summary["confidence"] = exp.confidence;
  if (exp.trials.size() >= 2) {
    summary["ci_half_width"] = exp.ci_half_width;
  } else {
    summary["ci_half_width"] = "n/a";
  }
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_reduce_gcc(const std::string& file, double epsilon,
                   const std::string& mode, bool strict_budget,
                   const std::string& out) {
  LoadedProblem lp = load_problem_file(file);
  ProblemSpec spec = lp.spec;
  if (strict_budget) {
    // Land the augmented guarantee on the original P by pre-deflating.
    for (auto& cc : spec.costs) {
      if (cc.kind == CostCriterion::Kind::GlobalChance) {
        cc.bound /= 1.0 + epsilon;
      }
    }
  }
  ReducedProblem red;
  Json plan_json = Json::object();
  if (mode == "exact") {
    red = reduce_exact(spec);
  } else {
    const DiscretizationPlan plan = make_plan(spec, epsilon);
    red = reduce_discretized(spec, plan);
    Json entries = Json::array();
    for (const auto& pc : plan.entries) {
      Json e;
      e["criterion"] = pc.criterion_index;
      e["epsilon"] = pc.epsilon;
      e["c_max"] = pc.c_max;
      e["tick_size"] = static_cast<double>(pc.tick_size);
      e["tick_cap"] = pc.tick_cap;
      entries.push_back(std::move(e));
    }
    plan_json["entries"] = std::move(entries);
  }
  const Json problem = problem_to_json(red.spec);
  Json result;
  result["problem"] = problem;
  result["mode"] = mode;
  if (mode == "discretized") result["plan"] = plan_json;
  result["augmented_states"] = red.states->size();
  if (out.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    save_json(problem, out);
    result.erase("problem");
    std::cout << result.dump(2) << "\n";
  }
  return kOk;
}

int cmd_export(const ProblemSource& src, const std::string& out, bool relaxed,
               const std::string& format) {
  const ProblemSpec spec = src.resolve();
  ExpandOptions eo;
  eo.node_cap = node_cap_from_env();
  const LayeredGraph graph = expand(spec, eo);
  const ModelIR model =
      build_ilp(graph, spec, SolveCriteria::from_spec(spec), relaxed);
  std::ofstream os(out);
  if (!os) throw IoError("cannot open for writing: " + out);
  if (format == "lp") {
    write_lp_format(model, os);
  } else {
    write_mps(model, os);
  }
  std::cout << "wrote " << out << " (" << model.vars.size() << " vars, "
            << model.rows.size() << " rows)\n";
  return kOk;
}

int cmd_eval(const ProblemSource& src, const std::string& policy_file,
             std::uint64_t samples, std::uint64_t seed) {
  const ProblemSpec spec = src.resolve();
  ExpandOptions eo;
  eo.node_cap = node_cap_from_env();
  const LayeredGraph graph = expand(spec, eo);
  const Policy policy =
      policy_from_json(load_json_file(policy_file), spec, graph);
  const RiskReport rep = risk_report(graph, spec, policy, samples, seed);
  std::cout << risk_report_to_json(rep).dump(2) << "\n";
  return kOk;
}

int cmd_expand(const ProblemSource& src, const std::string& out) {
  const ProblemSpec spec = src.resolve();
  auto t0 = Clock::now();
  ExpandOptions eo;
  eo.node_cap = node_cap_from_env();
  const LayeredGraph graph = expand(spec, eo);
  const double secs = seconds_since(t0);
  const NodeCensus cen = census(graph);
  Json j = census_to_json(cen);
  j["expand_s"] = secs;
  Json sizes = Json::array();
  for (int k = 0; k <= graph.horizon(); ++k) sizes.push_back(graph.layer_size(k));
  j["layer_sizes"] = std::move(sizes);
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) save_json(graph_to_json(graph), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon chance-constrained SSP planner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  // Frees the single-dash -h so subcommands can alias --h for --horizon.
  app.set_help_flag("--help", "Print help");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a CC-SSP instance");
  ProblemSource solve_src;
  solve_src.add_options(solve);
  std::string mode = "ilp";
  solve->add_option("--mode", mode, "ilp | lp | round")
      ->check(CLI::IsMember({"ilp", "lp", "round"}));
  std::uint64_t seed = 0;
  solve->add_option("--seed", seed, "Seed for rounding / evaluation");
  std::string out;
  solve->add_option("--out", out, "Output file prefix");
  std::uint64_t samples = 0;
  solve->add_option("--samples", samples, "Monte Carlo samples for the report");

  // table
  auto* table = app.add_subcommand("table", "Benchmark objective/time table");
  std::string benchmark = "grid";
  table->add_option("--benchmark", benchmark, "grid | highway")
      ->check(CLI::IsMember({"grid", "highway"}));
  std::vector<int> horizons;
  table->add_option("--horizons", horizons, "Horizons")->delimiter(',');
  std::vector<double> deltas;
  table->add_option("--deltas", deltas, "Risk budgets")->delimiter(',');
  std::string table_out;
  table->add_option("--out", table_out, "CSV output path");
  std::uint32_t table_size = 100;
  table->add_option("--size", table_size, "Grid side length");
  std::uint32_t table_hvs = 2;
  table->add_option("--hvs", table_hvs, "Highway HV count");
  std::uint64_t table_seed = 0;
  table->add_option("--seed", table_seed, "Generator / rounding seed");

  // ratio
  auto* ratio = app.add_subcommand("ratio", "Randomized-rounding ratio trials");
  ProblemSource ratio_src;
  ratio_src.add_options(ratio);
  int trials = 100;
  ratio->add_option("--trials", trials, "Number of trials");
  double confidence = 0.99;
  ratio->add_option("--confidence", confidence, "Confidence level");
  std::uint64_t ratio_seed = 0;
  ratio->add_option("--seed", ratio_seed, "Trial seed");
  std::string ratio_out;
  ratio->add_option("--out", ratio_out, "Trial CSV path");

  // reduce-gcc
  auto* reduce = app.add_subcommand("reduce-gcc",
                                    "Reduce global chance constraints");
  std::string reduce_file;
  reduce->add_option("problem", reduce_file, "Problem JSON file")->required();
  double epsilon = 0.1;
  reduce->add_option("--epsilon", epsilon, "Discretization parameter in (0,1)");
  std::string reduce_mode = "discretized";
  reduce->add_option("--mode", reduce_mode, "exact | discretized")
      ->check(CLI::IsMember({"exact", "discretized"}));
  bool strict_budget = false;
  reduce->add_flag("--strict-budget", strict_budget,
                   "Pre-deflate P so the (1+eps) guarantee lands on P");
  std::string reduce_out;
  reduce->add_option("--out", reduce_out, "Reduced problem JSON path");

  // export-mps
  auto* exp = app.add_subcommand("export-mps", "Write the ILP as MPS/LP");
  ProblemSource exp_src;
  exp_src.add_options(exp);
  std::string exp_out = "model.mps";
  exp->add_option("--out", exp_out, "Output path");
  bool relaxed = false;
  exp->add_flag("--relaxed", relaxed, "Export the LP relaxation");
  std::string format = "mps";
  exp->add_option("--format", format, "mps | lp")
      ->check(CLI::IsMember({"mps", "lp"}));

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a policy file");
  ProblemSource eval_src;
  eval_src.add_options(eval);
  std::string policy_file;
  eval->add_option("--policy", policy_file, "Policy JSON file")->required();
  std::uint64_t eval_samples = 100000;
  eval->add_option("--samples", eval_samples,
                   "Monte Carlo samples (0 = exact evaluators only)");
  std::uint64_t eval_seed = 0;
  eval->add_option("--seed", eval_seed, "Sampling seed");

  // expand
  auto* expand_cmd = app.add_subcommand("expand", "Expand and report the graph");
  ProblemSource expand_src;
  expand_src.add_options(expand_cmd);
  std::string graph_out;
  expand_cmd->add_option("--out", graph_out, "Graph cache JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_src, mode, seed, out, samples);
    if (table->parsed()) {
      return cmd_table(benchmark, horizons, deltas, table_out, table_size,
                       table_hvs, table_seed);
    }
    if (ratio->parsed()) {
      return cmd_ratio(ratio_src, trials, confidence, ratio_seed, ratio_out);
    }
    if (reduce->parsed()) {
      return cmd_reduce_gcc(reduce_file, epsilon, reduce_mode, strict_budget,
                            reduce_out);
    }
    if (exp->parsed()) return cmd_export(exp_src, exp_out, relaxed, format);
    if (eval->parsed()) {
      return cmd_eval(eval_src, policy_file, eval_samples, eval_seed);
    }
    if (expand_cmd->parsed()) return cmd_expand(expand_src, graph_out);
  } catch (...) {
    return map_exception();
  }
  return kUsage;
}
