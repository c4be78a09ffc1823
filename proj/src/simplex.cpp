#include "ccssp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDjTol = 1e-7;
constexpr double kPivTol = 1e-7;
// Pivots smaller than this trigger a refactorize-and-retry before being
// trusted (eta chains degrade small entries first).
constexpr double kPivSafe = 1e-5;
constexpr int kRefactorInterval = 100;
// Degenerate pivots in a row before pricing falls back to Bland's rule.
constexpr std::int64_t kStallThreshold = 50;

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

struct SparseCol {
  std::vector<int> idx;
  std::vector<double> val;
};

// Product-form eta: basis column `row` was replaced by the FTRAN'd entering
// column w.
struct Eta {
  int row;
  std::vector<std::pair<int, double>> entries;  // nonzeros of w incl. pivot
  double pivot;
};

class Simplex {
 public:
  Simplex(const ModelIR& model, const std::vector<BoundOverride>& overrides,
          const SolverConfig& config)
      : model_(model), config_(config) {
    m_ = static_cast<int>(model.rows.size());
    n_struct_ = static_cast<int>(model.vars.size());

    lb_.reserve(n_struct_ + m_);
    ub_.reserve(n_struct_ + m_);
    cols_.resize(n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      lb_.push_back(model.vars[j].lb);
      ub_.push_back(model.vars[j].ub);
    }
    for (const auto& ov : overrides) {
      lb_[ov.var] = std::max(lb_[ov.var], ov.lb);
      ub_[ov.var] = std::min(ub_[ov.var], ov.ub);
    }
    for (int j = 0; j < n_struct_; ++j) {
      if (lb_[j] > ub_[j] + 1e-12) empty_box_ = true;
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = model.rows[i];
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (row.coef[t] != 0.0) {
          cols_[row.idx[t]].idx.push_back(i);
          cols_[row.idx[t]].val.push_back(row.coef[t]);
        }
      }
      rhs_.push_back(row.rhs);
    }
    // Slack per row: [0,0] for Eq, [0,inf) for Le.
    for (int i = 0; i < m_; ++i) {
      SparseCol c;
      c.idx.push_back(i);
      c.val.push_back(1.0);
      cols_.push_back(std::move(c));
      lb_.push_back(0.0);
      ub_.push_back(model.rows[i].rel == Relation::Eq ? 0.0 : kInf);
    }
  }

  Solution run() {
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    if (empty_box_) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    if (!init_crash()) init_textbook();
    bool limit = false;
    if (first_art_ < num_vars()) {
      set_phase1_costs();
      limit = !iterate();
      double infeas = 0.0;
      for (int j = first_art_; j < num_vars(); ++j) infeas += value_[j];
      if (!limit && infeas > config_.feas_tol) {
        sol.status = SolveStatus::Infeasible;
        for (int j = first_art_; j < num_vars(); ++j) {
          if (value_[j] > config_.feas_tol) {
            sol.infeasible_rows.push_back(art_row_[j - first_art_]);
          }
        }
        sol.stats.simplex_iterations = iterations_;
        sol.stats.wall_seconds = seconds_since(t0);
        return sol;
      }
      // Artificials may not re-enter.
      for (int j = first_art_; j < num_vars(); ++j) {
        lb_[j] = 0.0;
        ub_[j] = 0.0;
      }
    }
    if (!limit) {
      set_phase2_costs();
      limit = !iterate();
    }
    refactor();  // clean values before reporting
    sol.x.assign(value_.begin(), value_.begin() + n_struct_);
    sol.objective = model_.objective_value(sol.x);
    sol.stats.simplex_iterations = iterations_;
    sol.stats.wall_seconds = seconds_since(t0);
    if (limit) {
      sol.status = SolveStatus::IterationLimit;
      return sol;
    }
    const double viol = model_violation(sol.x);
    if (viol > config_.feas_tol) {
      throw Error("simplex: solution violates constraints by " +
                  std::to_string(viol));
    }
    sol.status = SolveStatus::Optimal;
    return sol;
  }

 private:
  int num_vars() const { return static_cast<int>(cols_.size()); }

  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  double model_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int j = 0; j < n_struct_; ++j) {
      worst = std::max(worst, lb_[j] - x[j]);
      worst = std::max(worst, x[j] - ub_[j]);
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = model_.rows[i];
      double lhs = 0.0;
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        lhs += row.coef[t] * x[row.idx[t]];
      }
      if (row.rel == Relation::Eq) {
        worst = std::max(worst, std::abs(lhs - row.rhs));
      } else {
        worst = std::max(worst, lhs - row.rhs);
      }
    }
    return worst;
  }

  void start_nonbasic_values() {
    value_.assign(num_vars(), 0.0);
    state_.assign(num_vars(), VarState::AtLower);
    for (int j = 0; j < num_vars(); ++j) {
      value_[j] = std::isfinite(lb_[j]) ? lb_[j] : 0.0;
    }
    basic_.assign(m_, -1);
    basic_pos_.assign(num_vars(), -1);
    first_art_ = num_vars();
    art_row_.clear();
  }

  void make_basic(int var, int row, double val) {
    basic_[row] = var;
    if (var >= static_cast<int>(basic_pos_.size())) basic_pos_.resize(var + 1, -1);
    basic_pos_[var] = row;
    state_[var] = VarState::Basic;
    value_[var] = val;
  }

  // Appends an artificial column carrying `resid` on `row` and makes it basic.
  void install_artificial(int row, double resid) {
    SparseCol c;
    c.idx.push_back(row);
    c.val.push_back(resid >= 0 ? 1.0 : -1.0);
    cols_.push_back(std::move(c));
    lb_.push_back(0.0);
    ub_.push_back(kInf);
    value_.push_back(std::abs(resid));
    state_.push_back(VarState::Basic);
    basic_pos_.push_back(-1);
    art_row_.push_back(row);
    make_basic(num_vars() - 1, row, std::abs(resid));
  }

  // Textbook start: slack basis, artificials where the slack bounds cannot
  // absorb the initial residual.
  void init_textbook() {
    start_nonbasic_values();
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_struct_; ++j) {
      if (value_[j] != 0.0) {
        for (std::size_t t = 0; t < cols_[j].idx.size(); ++t) {
          resid[cols_[j].idx[t]] -= cols_[j].val[t] * value_[j];
        }
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int slack = n_struct_ + i;
      if (resid[i] >= lb_[slack] - 1e-12 &&
          (ub_[slack] == kInf || resid[i] <= ub_[slack] + 1e-12)) {
        make_basic(slack, i, resid[i]);
      } else {
        double sv = std::max(resid[i], lb_[slack]);
        if (ub_[slack] != kInf) sv = std::min(sv, ub_[slack]);
        value_[slack] = sv;
        state_[slack] = sv == lb_[slack] ? VarState::AtLower : VarState::AtUpper;
        install_artificial(i, resid[i] - sv);
      }
    }
    cost_.assign(num_vars(), 0.0);
    refactor();
  }

  // CC-SSP crash: put a "first usable action" policy's flow variables in the
  // basis for the flow rows and the matching z variables in the binding
  // rows, leaving phase 1 with at most the risk/budget rows to repair.
  bool init_crash() {
    if (!model_.layout || model_.num_flow_criteria == 0) return false;
    const FlowLayout& L = *model_.layout;
    const std::uint64_t P = model_.pairs_per_criterion;
    const std::uint32_t nq = model_.num_flow_criteria;
    const std::size_t n_nodes = L.pair_begin.size();

    start_nonbasic_values();

    // Pick first usable pair per node while propagating the j=0 flow.
    std::vector<std::uint64_t> first_pair(n_nodes, 0);
    std::vector<double> x0(P, 0.0);
    for (std::size_t ni = 0; ni < n_nodes; ++ni) {
      double inflow;
      if (L.layer[ni] == 0) {
        inflow = 1.0;
      } else {
        inflow = 0.0;
        const LinearRow& row = model_.rows[L.flow_row[0][ni]];
        for (std::size_t t = 0; t < row.idx.size(); ++t) {
          if (row.coef[t] < 0.0) {
            inflow += -row.coef[t] * x0[row.idx[t]];  // idx is a j=0 x var
          }
        }
      }
      std::uint64_t pick = L.pair_begin[ni];
      bool usable = false;
      for (std::uint64_t p = L.pair_begin[ni]; p < L.pair_end[ni]; ++p) {
        if (ub_[model_.z_index(p)] > 1e-9) {
          pick = p;
          usable = true;
          break;
        }
      }
      if (!usable && inflow > 1e-12) return false;  // forced dead end
      first_pair[ni] = pick;
      x0[pick] = inflow;
    }

    // Basis assignment; everything else keeps its slack.
    for (int i = 0; i < m_; ++i) make_basic(n_struct_ + i, i, 0.0);
    for (std::size_t ni = 0; ni < n_nodes; ++ni) {
      const std::uint64_t p = first_pair[ni];
      for (std::uint32_t j = 0; j < nq; ++j) {
        const int row = static_cast<int>(L.flow_row[j][ni]);
        const int var = static_cast<int>(model_.x_index(j, p));
        state_[n_struct_ + row] = VarState::AtLower;  // Eq slack back to 0
        value_[n_struct_ + row] = 0.0;
        basic_pos_[n_struct_ + row] = -1;
        make_basic(var, row, 0.0);
      }
      const int zvar = static_cast<int>(model_.z_index(p));
      if (lb_[zvar] < ub_[zvar]) {
        const int row = static_cast<int>(L.bind0_row[p]);
        state_[n_struct_ + row] = VarState::AtLower;
        value_[n_struct_ + row] = 0.0;
        basic_pos_[n_struct_ + row] = -1;
        make_basic(zvar, row, 0.0);
      }
    }

    cost_.assign(num_vars(), 0.0);
    refactor();  // computes all basic values from the crash basis

    // Only <=-row slacks can start violated (risk/budget rows); hand them an
    // artificial each. Any other violation means the crash does not apply.
    std::vector<std::pair<int, double>> repairs;
    for (int i = 0; i < m_; ++i) {
      const int var = basic_[i];
      const double v = value_[var];
      const double lo = lb_[var];
      const double hi = ub_[var];
      if (v >= lo - 1e-9 && (hi == kInf || v <= hi + 1e-9)) continue;
      if (var >= n_struct_ && model_.rows[i].rel == Relation::Le && v < lo) {
        repairs.emplace_back(i, v);
      } else {
        return false;
      }
    }
    for (const auto& [row, v] : repairs) {
      const int slack = n_struct_ + row;
      value_[slack] = 0.0;
      state_[slack] = VarState::AtLower;
      basic_pos_[slack] = -1;
      install_artificial(row, v);
    }
    if (!repairs.empty()) refactor();
    return true;
  }

  void set_phase1_costs() {
    cost_.assign(num_vars(), 0.0);
    for (int j = first_art_; j < num_vars(); ++j) cost_[j] = 1.0;
    best_phase_obj_ = kInf;
    stall_count_ = 0;
  }

  void set_phase2_costs() {
    cost_.assign(num_vars(), 0.0);
    const double sign = model_.sense == Sense::Maximize ? -1.0 : 1.0;
    for (int j = 0; j < n_struct_; ++j) {
      cost_[j] = sign * model_.objective[j];
    }
    best_phase_obj_ = kInf;
    stall_count_ = 0;
  }

  double phase_objective() const {
    double obj = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
      if (cost_[j] != 0.0) obj += cost_[j] * value_[j];
    }
    return obj;
  }

  void refactor() {
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    for (int i = 0; i < m_; ++i) {
      const SparseCol& c = cols_[basic_[i]];
      for (std::size_t t = 0; t < c.idx.size(); ++t) {
        trips.emplace_back(c.idx[t], i, c.val[t]);
      }
    }
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    if (lu_.info() != Eigen::Success) {
      throw Error("simplex: singular basis factorization");
    }
    Eigen::SparseMatrix<double> BT = B.transpose();
    luT_.compute(BT);
    if (luT_.info() != Eigen::Success) {
      throw Error("simplex: singular transposed basis factorization");
    }
    etas_.clear();
    recompute_basics();
  }

  void recompute_basics() {
    Eigen::VectorXd r(m_);
    for (int i = 0; i < m_; ++i) r[i] = rhs_[i];
    for (int j = 0; j < num_vars(); ++j) {
      if (state_[j] != VarState::Basic && value_[j] != 0.0) {
        for (std::size_t t = 0; t < cols_[j].idx.size(); ++t) {
          r[cols_[j].idx[t]] -= cols_[j].val[t] * value_[j];
        }
      }
    }
    Eigen::VectorXd xb = lu_.solve(r);
    for (int i = 0; i < m_; ++i) value_[basic_[i]] = xb[i];
  }

  Eigen::VectorXd ftran(const SparseCol& col) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
    for (std::size_t t = 0; t < col.idx.size(); ++t) v[col.idx[t]] = col.val[t];
    Eigen::VectorXd w = lu_.solve(v);
    for (const Eta& e : etas_) {
      const double piv = w[e.row] / e.pivot;
      if (piv != 0.0) {
        for (const auto& [i, wi] : e.entries) {
          if (i != e.row) w[i] -= wi * piv;
        }
      }
      w[e.row] = piv;
    }
    return w;
  }

  Eigen::VectorXd btran() const {
    Eigen::VectorXd v(m_);
    for (int i = 0; i < m_; ++i) v[i] = cost_[basic_[i]];
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      // v_r' = (v_r - sum_{i != r} w_i v_i) / w_r
      double dot = 0.0;
      for (const auto& [i, wi] : it->entries) {
        if (i != it->row) dot += wi * v[i];
      }
      v[it->row] = (v[it->row] - dot) / it->pivot;
    }
    return luT_.solve(v);
  }

  double reduced_cost(int j, const Eigen::VectorXd& y) const {
    double d = cost_[j];
    const SparseCol& c = cols_[j];
    for (std::size_t t = 0; t < c.idx.size(); ++t) {
      d -= y[c.idx[t]] * c.val[t];
    }
    return d;
  }

  // Returns false on iteration limit. `phase1` enables the early exit at a
  // zero infeasibility sum.
  bool iterate(bool phase1) {
    static const bool debug = std::getenv("CCSSP_SIMPLEX_DEBUG") != nullptr;
    for (;;) {
      if (iterations_ >= config_.iteration_limit) return false;
      // Stall bookkeeping on the true phase objective: Bland stays engaged
      // until strict improvement, which bounds every degenerate stretch.
      const double obj_now = phase_objective();
      if (phase1 && obj_now < 1e-9) return true;  // all artificials are out
      if (obj_now < best_phase_obj_ - 1e-10) {
        best_phase_obj_ = obj_now;
        stall_count_ = 0;
      } else {
        ++stall_count_;
      }
      if (debug && iterations_ % 1000 == 0) {
        std::fprintf(stderr, "[simplex] it=%lld obj=%.9g etas=%zu\n",
                     static_cast<long long>(iterations_), obj_now, etas_.size());
      }
      const Eigen::VectorXd y = btran();
      // Pricing: Dantzig unless stalled (or configured pure Bland), in which
      // case Bland's lowest-index rule guarantees escape from degeneracy.
      const bool bland = config_.pivot == PivotRule::Bland ||
                         stall_count_ >= kStallThreshold;
      int q = -1;
      int dir = 0;
      double best_d = 0.0;
      for (int j = 0; j < num_vars(); ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed
        const double d = reduced_cost(j, y);
        double improvement = 0.0;
        int dj = 0;
        if (state_[j] == VarState::AtLower && d < -kDjTol) {
          improvement = -d;
          dj = +1;
        } else if (state_[j] == VarState::AtUpper && d > kDjTol) {
          improvement = d;
          dj = -1;
        } else {
          continue;
        }
        if (bland) {
          q = j;
          dir = dj;
          break;  // lowest improving index
        }
        if (improvement > best_d) {
          best_d = improvement;
          q = j;
          dir = dj;
        }
      }
      if (q < 0) {
        // Confirm on a fresh factorization: pricing noise on a long eta
        // chain must not end the phase early (nor keep it alive).
        if (!etas_.empty()) {
          refactor();
          continue;
        }
        return true;  // optimal
      }
      ++iterations_;

      Eigen::VectorXd w = ftran(cols_[q]);
      // Entering moves by dir * t, basics by -dir * t * w. Exact minimum
      // ratio, ties by lowest basic variable index (Bland).
      double t_best = ub_[q] == kInf || lb_[q] == -kInf ? kInf : ub_[q] - lb_[q];
      int leave_row = -1;
      for (int i = 0; i < m_; ++i) {
        const double g = dir * w[i];
        double t;
        if (g > kPivTol) {
          t = std::max(0.0, value_[basic_[i]] - lb_[basic_[i]]) / g;
        } else if (g < -kPivTol) {
          if (ub_[basic_[i]] == kInf) continue;
          t = std::max(0.0, ub_[basic_[i]] - value_[basic_[i]]) / (-g);
        } else {
          continue;
        }
        if (t < t_best ||
            (t == t_best && leave_row >= 0 && basic_[i] < basic_[leave_row])) {
          t_best = t;
          leave_row = i;
        }
      }
      if (t_best == kInf) {
        throw Error("simplex: unbounded direction encountered");
      }

      // Small pivots are refactorized away before being trusted.
      if (leave_row >= 0 && std::abs(w[leave_row]) < kPivSafe &&
          !etas_.empty()) {
        --iterations_;
        refactor();
        continue;
      }
      // Apply the step.
      value_[q] += dir * t_best;
      if (t_best != 0.0) {
        for (int i = 0; i < m_; ++i) {
          if (w[i] != 0.0) value_[basic_[i]] -= dir * t_best * w[i];
        }
      }
      if (leave_row < 0) {
        // Bound flip, no basis change.
        state_[q] =
            state_[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        value_[q] = state_[q] == VarState::AtLower ? lb_[q] : ub_[q];
        continue;
      }
      const int leaving = basic_[leave_row];
      const double g = dir * w[leave_row];
      state_[leaving] = g > 0 ? VarState::AtLower : VarState::AtUpper;
      value_[leaving] = g > 0 ? lb_[leaving] : ub_[leaving];
      basic_pos_[leaving] = -1;
      basic_[leave_row] = q;
      basic_pos_[q] = leave_row;
      state_[q] = VarState::Basic;

      Eta e;
      e.row = leave_row;
      e.pivot = w[leave_row];
      for (int i = 0; i < m_; ++i) {
        if (w[i] != 0.0) e.entries.emplace_back(i, w[i]);
      }
      etas_.push_back(std::move(e));
      if (static_cast<int>(etas_.size()) >= kRefactorInterval) refactor();
    }
  }

  const ModelIR& model_;
  const SolverConfig& config_;
  int m_ = 0;
  int n_struct_ = 0;
  bool empty_box_ = false;
  int first_art_ = 0;

  std::vector<SparseCol> cols_;
  std::vector<double> rhs_;
  std::vector<double> lb_, ub_;
  std::vector<double> cost_;
  std::vector<double> value_;
  std::vector<VarState> state_;
  std::vector<int> basic_;      // var per row
  std::vector<int> basic_pos_;  // row per var, -1 if nonbasic
  std::vector<int> art_row_;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> luT_;
  std::vector<Eta> etas_;
  std::int64_t iterations_ = 0;
  std::int64_t stall_count_ = 0;
  double best_phase_obj_ = kInf;
};

}  // namespace

Solution solve_relaxation(const ModelIR& model,
                          const std::vector<BoundOverride>& overrides,
                          const SolverConfig& config) {
  Simplex s(model, overrides, config);
  return s.run();
}

Solution solve_lp(const ModelIR& model, const SolverConfig& config) {
  for (const auto& v : model.vars) {
    if (v.integral) {
      throw ValidationError(
          "solve_lp: model carries integrality flags; build the relaxation "
          "or call solve_milp");
    }
  }
  return solve_relaxation(model, {}, config);
}

}  // namespace ccssp
