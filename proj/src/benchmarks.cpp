#include "ccssp/benchmarks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "ccssp/errors.hpp"
#include "ccssp/graph.hpp"
#include "ccssp/ilp.hpp"
#include "ccssp/milp.hpp"
#include "ccssp/rng.hpp"
#include "ccssp/rounding.hpp"

namespace ccssp {

namespace {

constexpr std::uint64_t kRiskTag = 0x6772645f7269736bull;  // "grd_risk"
constexpr std::uint64_t kCostTag = 0x6772645f636f7374ull;  // "grd_cost"

struct GridCtx {
  GridParams p;
  StateId encode(std::uint32_t x, std::uint32_t y) const {
    return static_cast<StateId>(y) * p.width + x;
  }
  std::pair<std::uint32_t, std::uint32_t> decode(StateId s) const {
    return {static_cast<std::uint32_t>(s % p.width),
            static_cast<std::uint32_t>(s / p.width)};
  }
  bool risky(std::uint32_t x, std::uint32_t y) const {
    if (x == p.start_x && y == p.start_y) return false;  // feasible root
    return to_unit(mix(p.seed, kRiskTag, x, y)) < p.risky_fraction;
  }
  double cell_cost(std::uint32_t x, std::uint32_t y) const {
    return to_unit(mix(p.seed, kCostTag, x, y)) < p.cheap_fraction
               ? p.cheap_cost
               : p.default_cost;
  }
};

}  // namespace

ProblemSpec gen_grid(const GridParams& params) {
  if (params.start_x >= params.width || params.start_y >= params.height) {
    throw ValidationError("grid start out of bounds");
  }
  if (!(params.success_prob > 0.0 && params.success_prob <= 1.0)) {
    throw ValidationError("grid success_prob must be in (0,1]");
  }
  if (params.risky_fraction < 0.0 || params.risky_fraction > 1.0 ||
      params.cheap_fraction < 0.0 || params.cheap_fraction > 1.0) {
    throw ValidationError("grid fractions must be in [0,1]");
  }
  auto ctx = std::make_shared<GridCtx>(GridCtx{params});

  ProblemSpec spec;
  spec.horizon = 1;  // callers set the horizon per instance
  spec.initial_state = ctx->encode(params.start_x, params.start_y);
  spec.action_names = {"up", "down", "left", "right"};

  spec.transition.num_actions = 4;
  spec.transition.successors = [ctx](StateId s, ActionId a) {
    const auto [x, y] = ctx->decode(s);
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    const double other = (1.0 - ctx->p.success_prob) / 3.0;
    std::vector<Successor> raw;
    double legal_mass = 0.0;
    for (int d = 0; d < 4; ++d) {
      const long nx = static_cast<long>(x) + dx[d];
      const long ny = static_cast<long>(y) + dy[d];
      const double pr = d == static_cast<int>(a) ? ctx->p.success_prob : other;
      if (nx < 0 || ny < 0 || nx >= static_cast<long>(ctx->p.width) ||
          ny >= static_cast<long>(ctx->p.height)) {
        continue;  // off-board mass redistributed below
      }
      raw.push_back(Successor{
          ctx->encode(static_cast<std::uint32_t>(nx), static_cast<std::uint32_t>(ny)),
          pr});
      legal_mass += pr;
    }
    for (auto& t : raw) t.prob /= legal_mass;
    return raw;
  };

  spec.utility.sense = Sense::Minimize;
  spec.utility.value = [ctx](StateId s, ActionId) {
    const auto [x, y] = ctx->decode(s);
    return ctx->cell_cost(x, y);
  };

  RiskCriterion rc;
  rc.index = 1;
  rc.delta = params.delta;
  rc.risk = [ctx](StateId s) {
    const auto [x, y] = ctx->decode(s);
    return ctx->risky(x, y) ? 1.0 : 0.0;
  };
  spec.risks.push_back(std::move(rc));

  spec.state_label = [ctx](StateId s) {
    const auto [x, y] = ctx->decode(s);
    std::ostringstream os;
    os << "(" << x << "," << y << ")";
    return os.str();
  };
  return spec;
}

namespace {

// Highway state packing: ego lane | per-HV (lane, pos, stage). Stage 0 is
// centered, 1/2 deviating toward left/right.
struct HighwayCtx {
  HighwayParams p;
  std::vector<HvParams> hvs;

  static constexpr std::uint64_t kLaneBits = 2;
  static constexpr std::uint64_t kPosBits = 5;
  static constexpr std::uint64_t kStageBits = 2;
  static constexpr std::uint64_t kHvBits = kLaneBits + kPosBits + kStageBits;

  struct Hv {
    std::uint32_t lane;
    std::uint32_t pos;
    std::uint32_t stage;
  };
  struct State {
    std::uint32_t ego_lane;
    std::vector<Hv> hvs;
  };

  StateId encode(const State& s) const {
    StateId v = s.ego_lane;
    for (const auto& h : s.hvs) {
      v = (v << kHvBits) | (static_cast<StateId>(h.lane) << (kPosBits + kStageBits)) |
          (static_cast<StateId>(h.pos) << kStageBits) | h.stage;
    }
    return v;
  }
  State decode(StateId v) const {
    State s;
    s.hvs.resize(hvs.size());
    for (std::size_t i = hvs.size(); i-- > 0;) {
      s.hvs[i].stage = static_cast<std::uint32_t>(v & ((1u << kStageBits) - 1));
      v >>= kStageBits;
      s.hvs[i].pos = static_cast<std::uint32_t>(v & ((1u << kPosBits) - 1));
      v >>= kPosBits;
      s.hvs[i].lane = static_cast<std::uint32_t>(v & ((1u << kLaneBits) - 1));
      v >>= kLaneBits;
    }
    s.ego_lane = static_cast<std::uint32_t>(v);
    return s;
  }

  bool collision(const State& s) const {
    for (const auto& h : s.hvs) {
      if (h.lane == s.ego_lane && h.pos == p.ego_pos) return true;
    }
    return false;
  }

  std::uint32_t clamp_pos(long pos) const {
    return static_cast<std::uint32_t>(
        std::min<long>(std::max<long>(pos, 0), p.cells - 1));
  }
};

}  // namespace

ProblemSpec gen_highway(const HighwayParams& params) {
  if (params.lanes < 1 || params.lanes > 4 || params.cells < 2 ||
      params.cells > 32) {
    throw ValidationError("highway: lanes in [1,4], cells in [2,32]");
  }
  if (params.ego_lane >= params.lanes || params.ego_pos >= params.cells) {
    throw ValidationError("highway: ego pose off-road");
  }
  if (params.action_costs.size() != 5) {
    throw ValidationError("highway: expected 5 action costs");
  }
  auto ctx = std::make_shared<HighwayCtx>();
  ctx->p = params;
  ctx->hvs = params.hvs;
  if (ctx->hvs.empty() && params.num_hvs > 0) {
    // Seeded non-overlapping placement.
    SplitMix rng(splitmix64(params.seed ^ 0x68776179ull));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> taken{
        {params.ego_lane, params.ego_pos}};
    while (ctx->hvs.size() < params.num_hvs) {
      const auto lane = static_cast<std::uint32_t>(rng.next() % params.lanes);
      const auto pos = static_cast<std::uint32_t>(rng.next() % params.cells);
      if (std::find(taken.begin(), taken.end(), std::make_pair(lane, pos)) !=
          taken.end()) {
        continue;
      }
      taken.emplace_back(lane, pos);
      ctx->hvs.push_back(HvParams{lane, pos, 0});
    }
  }
  if (ctx->hvs.size() > 6) {
    throw ValidationError("highway: at most 6 HVs fit the state encoding");
  }
  for (const auto& hv : ctx->hvs) {
    if (hv.lane >= params.lanes || hv.pos >= params.cells) {
      throw ValidationError("highway: HV pose off-road");
    }
    if (hv.lane == params.ego_lane && hv.pos == params.ego_pos) {
      throw ValidationError("highway: ego and HV overlap at t=0");
    }
  }

  ProblemSpec spec;
  spec.horizon = 1;
  spec.action_names = {"maintain", "speed_up", "slow_down", "left", "right"};

  HighwayCtx::State init;
  init.ego_lane = params.ego_lane;
  for (const auto& hv : ctx->hvs) {
    init.hvs.push_back(HighwayCtx::Hv{hv.lane, hv.pos, 0});
  }
  spec.initial_state = ctx->encode(init);

  spec.transition.num_actions = 5;
  spec.transition.successors = [ctx](StateId sid, ActionId a) {
    const HighwayCtx::State s = ctx->decode(sid);
    std::vector<Successor> none;
    std::uint32_t ego_lane = s.ego_lane;
    int ego_shift = 0;
    switch (a) {
      case 0: break;                       // maintain
      case 1: ego_shift = +1; break;       // speed up
      case 2: ego_shift = -1; break;       // slow down
      case 3:                               // left lane
        if (ego_lane == 0) return none;
        --ego_lane;
        break;
      case 4:                               // right lane
        if (ego_lane + 1 >= ctx->p.lanes) return none;
        ++ego_lane;
        break;
      default: return none;
    }

    // Per-HV branch list: (state, prob) in the relative frame after the ego
    // action shifts every HV by -ego_shift plus its own drift.
    struct Branch {
      HighwayCtx::Hv hv;
      double prob;
    };
    std::vector<std::vector<Branch>> per_hv;
    for (std::size_t i = 0; i < s.hvs.size(); ++i) {
      const auto& h = s.hvs[i];
      const auto pos =
          ctx->clamp_pos(static_cast<long>(h.pos) - ego_shift + ctx->hvs[i].drift);
      std::vector<Branch> branches;
      if (h.stage == 0) {
        const bool can_left = h.lane > 0;
        const bool can_right = h.lane + 1 < ctx->p.lanes;
        const double dev = 1.0 - ctx->p.keep_prob;
        branches.push_back(Branch{{h.lane, pos, 0}, ctx->p.keep_prob});
        if (can_left && can_right) {
          branches.push_back(Branch{{h.lane, pos, 1}, dev / 2});
          branches.push_back(Branch{{h.lane, pos, 2}, dev / 2});
        } else if (can_left) {
          branches.push_back(Branch{{h.lane, pos, 1}, dev});
        } else if (can_right) {
          branches.push_back(Branch{{h.lane, pos, 2}, dev});
        } else {
          branches[0].prob = 1.0;  // single lane: nowhere to deviate
        }
      } else {
        const std::uint32_t target = h.stage == 1 ? h.lane - 1 : h.lane + 1;
        branches.push_back(Branch{{target, pos, 0}, ctx->p.complete_prob});
        branches.push_back(Branch{{h.lane, pos, 0}, 1.0 - ctx->p.complete_prob});
      }
      per_hv.push_back(std::move(branches));
    }

    // Cartesian product over HV branches.
    std::vector<Successor> out;
    std::vector<std::size_t> pick(per_hv.size(), 0);
    for (;;) {
      HighwayCtx::State next;
      next.ego_lane = ego_lane;
      double prob = 1.0;
      for (std::size_t i = 0; i < per_hv.size(); ++i) {
        next.hvs.push_back(per_hv[i][pick[i]].hv);
        prob *= per_hv[i][pick[i]].prob;
      }
      if (prob > 0.0) out.push_back(Successor{ctx->encode(next), prob});
      std::size_t pos = per_hv.size();
      bool done = pos == 0;
      while (pos > 0) {
        --pos;
        if (++pick[pos] < per_hv[pos].size()) break;
        pick[pos] = 0;
        if (pos == 0) done = true;
      }
      if (done) break;
    }
    if (per_hv.empty()) {
      HighwayCtx::State next;
      next.ego_lane = ego_lane;
      out.push_back(Successor{ctx->encode(next), 1.0});
    }
    return out;
  };

  spec.utility.sense = Sense::Minimize;
  const std::vector<double> costs = params.action_costs;
  spec.utility.value = [costs](StateId, ActionId a) { return costs[a]; };

  RiskCriterion rc;
  rc.index = 1;
  rc.delta = params.delta;
  rc.risk = [ctx](StateId sid) {
    return ctx->collision(ctx->decode(sid)) ? 1.0 : 0.0;
  };
  spec.risks.push_back(std::move(rc));

  spec.state_label = [ctx](StateId sid) {
    const HighwayCtx::State s = ctx->decode(sid);
    std::ostringstream os;
    os << "ego@" << s.ego_lane;
    for (const auto& h : s.hvs) {
      os << ";hv" << h.lane << "," << h.pos << "," << h.stage;
    }
    return os.str();
  };
  return spec;
}

MonotonicityTable monotonicity_suite(const ProblemSpec& spec,
                                     const std::vector<int>& horizons,
                                     const std::vector<double>& deltas,
                                     std::uint64_t rounding_seed,
                                     std::optional<std::uint64_t> node_cap) {
  using Clock = std::chrono::steady_clock;
  MonotonicityTable table;
  ExpandOptions eo;
  if (node_cap) eo.node_cap = *node_cap;

  for (int h : horizons) {
    for (double d : deltas) {
      MonotonicityCell cell;
      cell.horizon = h;
      cell.delta = d;
      try {
        ProblemSpec inst = spec;
        inst.horizon = h;
        for (auto& rc : inst.risks) rc.delta = d;
        const LayeredGraph graph = expand(inst, eo);
        const NodeCensus cen = census(graph);
        cell.graph_nodes = cen.graph_nodes;
        cell.tree_nodes = cen.tree_nodes_scientific();
        const SolveCriteria criteria = SolveCriteria::from_spec(inst);

        const ModelIR ilp = build_ilp(graph, inst, criteria, false);
        auto t0 = Clock::now();
        const Solution sol = solve_milp(ilp);
        cell.ilp_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        if (sol.status != SolveStatus::Optimal) {
          cell.status = to_string(sol.status);
          table.cells.push_back(std::move(cell));
          continue;
        }
        cell.ilp_objective = sol.objective;

        const ModelIR lp_model = build_ilp(graph, inst, criteria, true);
        t0 = Clock::now();
        const Solution lp = solve_lp(lp_model);
        RoundingConfig rcfg;
        rcfg.seed = mix(rounding_seed, static_cast<std::uint64_t>(h),
                        static_cast<std::uint64_t>(d * 1e6));
        const RoundingOutcome ro = round(lp, lp_model, graph, inst, criteria, rcfg);
        cell.rounding_seconds =
            std::chrono::duration<double>(Clock::now() - t0).count();
        cell.rounding_objective = ro.objective;
        cell.status = "optimal";
      } catch (const Error& e) {
        cell.status = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  }

  const bool minimize = spec.utility.sense == Sense::Minimize;
  auto find = [&](int h, double d) -> const MonotonicityCell* {
    for (const auto& c : table.cells) {
      if (c.horizon == h && std::abs(c.delta - d) < 1e-12 &&
          c.status == "optimal") {
        return &c;
      }
    }
    return nullptr;
  };

  // Objective monotone in delta per horizon.
  for (int h : horizons) {
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
      const auto* lo = find(h, deltas[i]);
      const auto* hi = find(h, deltas[i + 1]);
      if (!lo || !hi) continue;
      const bool ok = minimize
                          ? hi->ilp_objective <= lo->ilp_objective + 1e-9
                          : hi->ilp_objective >= lo->ilp_objective - 1e-9;
      if (!ok) {
        std::ostringstream os;
        os << "objective not monotone in delta at h=" << h << ": obj("
           << deltas[i + 1] << ")=" << hi->ilp_objective << " vs obj("
           << deltas[i] << ")=" << lo->ilp_objective;
        table.violations.push_back(os.str());
      }
    }
  }
  // Objective/h ratio non-increasing across horizons per delta (min sense).
  for (double d : deltas) {
    for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
      const auto* a = find(horizons[i], d);
      const auto* b = find(horizons[i + 1], d);
      if (!a || !b) continue;
      const double ra = a->ilp_objective / a->horizon;
      const double rb = b->ilp_objective / b->horizon;
      if (minimize && rb > ra + 1e-9) {
        std::ostringstream os;
        os << "objective/h increased at delta=" << d << ": " << rb << " (h="
           << b->horizon << ") vs " << ra << " (h=" << a->horizon << ")";
        table.violations.push_back(os.str());
      }
    }
  }
  return table;
}

}  // namespace ccssp
