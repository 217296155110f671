#include "bfep/milp/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

namespace bfep::milp {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kPivotTol = 1e-8;
constexpr double kRatioTol = 1e-9;
constexpr int kRefactorEvery = 128;

enum class VarState : unsigned char { Basic = 0, AtLo = 1, AtUp = 2, FreeZero = 3 };

// Bounded-variable primal simplex over [A | I] with a composite phase 1:
// basic variables may start outside their bounds (any basis works as a warm
// start); phase 1 minimizes total bound violation, phase 2 the objective.
class Simplex {
 public:
  Simplex(const Model& model, const LpOptions& opts) : model_(model), opts_(opts) { convert(); }

  SolveOutcome run() {
    SolveOutcome out;
    out.x.assign(model_.num_vars(), 0.0);

    init_basis();

    const Status st1 = iterate(true);
    if (st1 == Status::IterationLimit) throw BackendError("simplex: iteration limit in phase 1");
    if (any_infeasible()) {
      if (std::getenv("BFEP_SIMPLEX_DEBUG")) debug_dump_phase1();
      out.status = SolveStatus::Infeasible;
      if (opts_.want_ray) attach_ray(out);
      save_basis();
      return out;
    }

    const Status st2 = iterate(false);
    if (st2 == Status::IterationLimit) throw BackendError("simplex: iteration limit in phase 2");
    save_basis();
    if (st2 == Status::Unbounded) {
      out.status = SolveStatus::Unbounded;
      out.lb = -kInf;
      return out;
    }

    out.status = SolveStatus::Optimal;
    for (int j = 0; j < n_struct_; ++j) out.x[j] = value_of(j);
    double obj = 0.0;
    for (int j = 0; j < model_.num_vars(); ++j) obj += model_.vars[j].obj * out.x[j];
    out.obj = out.lb = out.ub = obj;

    set_costs(false);
    btran();
    out.duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double d = y_[i] * row_scale_[i];
      if (model_.maximize) d = -d;
      out.duals[i] = d;
    }
    return out;
  }

 private:
  enum class Status { Optimal, Unbounded, IterationLimit };

  const Model& model_;
  const LpOptions& opts_;

  int n_struct_ = 0, m_ = 0, n_total_ = 0;
  // Sparse columns over scaled rows; slacks are unit columns.
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_;
  std::vector<double> rhs_;        // scaled
  std::vector<double> row_scale_;  // scaled row = row_scale * original row
  std::vector<double> band_;       // per-column feasibility tolerance
  double rhs_norm_ = 0.0;
  double cost_norm_ = 0.0;

  std::vector<VarState> state_;
  std::vector<int> basic_;
  std::vector<double> beta_;
  std::vector<double> binv_;  // dense m x m row-major basis inverse
  std::vector<double> y_, alpha_, cB_;
  long iter_ = 0, iter_cap_ = 0;
  int pivots_since_refactor_ = 0;
  bool bland_ = false;
  long stall_ = 0;
  double last_obj_ = kInf;
  bool phase1_ = true;

  double lo_of_model(int j) const {
    return opts_.lo_override ? (*opts_.lo_override)[j] : model_.vars[j].lo;
  }
  double hi_of_model(int j) const {
    return opts_.hi_override ? (*opts_.hi_override)[j] : model_.vars[j].hi;
  }

  void convert() {
    n_struct_ = model_.num_vars();
    m_ = model_.num_rows();
    n_total_ = n_struct_ + m_;
    cols_.assign(n_total_, {});
    lo_.resize(n_total_);
    hi_.resize(n_total_);

    row_scale_.assign(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      double amax = 0.0;
      for (auto [j, c] : model_.rows[i].terms) amax = std::max(amax, std::fabs(c));
      if (amax > 0.0) row_scale_[i] = std::exp2(-std::round(std::log2(amax)));
    }

    for (int j = 0; j < n_struct_; ++j) {
      lo_[j] = lo_of_model(j);
      hi_[j] = hi_of_model(j);
    }
    rhs_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const Model::Row& row = model_.rows[i];
      for (auto [j, c] : row.terms) cols_[j].push_back({i, c * row_scale_[i]});
      rhs_[i] = row.rhs * row_scale_[i];
      rhs_norm_ = std::max(rhs_norm_, std::fabs(rhs_[i]));
      const int sj = n_struct_ + i;
      cols_[sj].push_back({i, 1.0});
      switch (row.sense) {
        case RowSense::LE: lo_[sj] = 0.0; hi_[sj] = kInf; break;
        case RowSense::GE: lo_[sj] = -kInf; hi_[sj] = 0.0; break;
        case RowSense::EQ: lo_[sj] = 0.0; hi_[sj] = 0.0; break;
      }
    }
    iter_cap_ = opts_.iteration_limit > 0 ? opts_.iteration_limit
                                          : 2000L * (n_total_ + m_) + 20000L;
    cost_.assign(n_total_, 0.0);

    // Feasibility tolerance per column: bound violations are judged relative
    // to the magnitudes the column's arithmetic involves (its bounds, and the
    // row rhs for slacks).
    band_.assign(n_total_, kFeasTol);
    for (int j = 0; j < n_total_; ++j) {
      double scale = 0.0;
      if (std::isfinite(lo_[j])) scale = std::max(scale, std::fabs(lo_[j]));
      if (std::isfinite(hi_[j])) scale = std::max(scale, std::fabs(hi_[j]));
      if (j >= n_struct_) scale = std::max(scale, std::fabs(rhs_[j - n_struct_]));
      band_[j] = kFeasTol * (1.0 + scale);
    }
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case VarState::AtLo: return lo_[j];
      case VarState::AtUp: return hi_[j];
      default: return 0.0;
    }
  }
  double value_of(int j) const {
    if (state_[j] == VarState::Basic) {
      for (int i = 0; i < m_; ++i)
        if (basic_[i] == j) return beta_[i];
    }
    return nonbasic_value(j);
  }

  // A nonbasic rest point for column j; free columns park at zero.
  VarState default_state(int j) const {
    if (std::isfinite(lo_[j])) return VarState::AtLo;
    if (std::isfinite(hi_[j])) return VarState::AtUp;
    return VarState::FreeZero;
  }

  void init_basis() {
    bool warm_ok = false;
    if (opts_.warm_basis && static_cast<int>(opts_.warm_basis->basic.size()) == m_ &&
        static_cast<int>(opts_.warm_basis->state.size()) == n_total_) {
      basic_ = opts_.warm_basis->basic;
      state_.resize(n_total_);
      std::vector<char> seen(n_total_, 0);
      warm_ok = true;
      for (int i = 0; i < m_ && warm_ok; ++i) {
        const int j = basic_[i];
        warm_ok = j >= 0 && j < n_total_ && !seen[j];
        if (warm_ok) seen[j] = 1;
      }
      if (warm_ok) {
        for (int j = 0; j < n_total_; ++j) {
          const auto st = static_cast<VarState>(opts_.warm_basis->state[j]);
          state_[j] = st;
          if (st != VarState::Basic) {
            // Bounds may have changed since the basis was saved; repin.
            if (st == VarState::AtLo && !std::isfinite(lo_[j])) state_[j] = default_state(j);
            if (st == VarState::AtUp && !std::isfinite(hi_[j])) state_[j] = default_state(j);
          }
        }
        for (int i = 0; i < m_; ++i) state_[basic_[i]] = VarState::Basic;
        if (!refactorize(/*allow_fail=*/true)) warm_ok = false;
      }
    }
    if (!warm_ok) {
      state_.assign(n_total_, VarState::AtLo);
      for (int j = 0; j < n_total_; ++j) state_[j] = default_state(j);
      basic_.resize(m_);
      for (int i = 0; i < m_; ++i) {
        basic_[i] = n_struct_ + i;
        state_[n_struct_ + i] = VarState::Basic;
      }
      binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
      for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
      beta_.assign(m_, 0.0);
      recompute_beta();
      pivots_since_refactor_ = 0;
    }
    y_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
    cB_.assign(m_, 0.0);
  }

  void save_basis() {
    if (!opts_.basis_out) return;
    opts_.basis_out->basic = basic_;
    opts_.basis_out->state.resize(n_total_);
    for (int j = 0; j < n_total_; ++j)
      opts_.basis_out->state[j] = static_cast<unsigned char>(state_[j]);
  }

  double violation(int i) const {
    const int j = basic_[i];
    if (beta_[i] < lo_[j]) return lo_[j] - beta_[i];
    if (beta_[i] > hi_[j]) return beta_[i] - hi_[j];
    return 0.0;
  }
  bool infeasible_at(int i) const { return violation(i) > band_[basic_[i]]; }
  double total_infeasibility() const {
    double inf = 0.0;
    for (int i = 0; i < m_; ++i)
      if (infeasible_at(i)) inf += violation(i);
    return inf;
  }
  bool any_infeasible() const {
    for (int i = 0; i < m_; ++i)
      if (infeasible_at(i)) return true;
    return false;
  }

  void set_costs(bool phase1) {
    phase1_ = phase1;
    if (phase1) {
      cost_norm_ = 1.0;
    } else {
      std::fill(cost_.begin(), cost_.end(), 0.0);
      cost_norm_ = 0.0;
      const double sign = model_.maximize ? -1.0 : 1.0;
      for (int j = 0; j < n_struct_; ++j) {
        cost_[j] = sign * model_.vars[j].obj;
        cost_norm_ = std::max(cost_norm_, std::fabs(cost_[j]));
      }
    }
    bland_ = false;
    stall_ = 0;
    last_obj_ = kInf;
  }

  // Phase-1 cost of basis position i given its current value; the band must
  // match the phase-1 success criterion.
  double basic_phase1_cost(int i) const {
    const int j = basic_[i];
    if (beta_[i] < lo_[j] - band_[j]) return -1.0;
    if (beta_[i] > hi_[j] + band_[j]) return 1.0;
    return 0.0;
  }

  double current_objective() const {
    if (phase1_) return total_infeasibility();
    double obj = 0.0;
    for (int j = 0; j < n_total_; ++j)
      if (state_[j] != VarState::Basic && cost_[j] != 0.0) obj += cost_[j] * nonbasic_value(j);
    for (int i = 0; i < m_; ++i) obj += cost_[basic_[i]] * beta_[i];
    return obj;
  }

  // y = cB^T B^{-1}; cB_ must be loaded first.
  void btran() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cB_[i];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
  }

  void load_cB() {
    for (int i = 0; i < m_; ++i) cB_[i] = phase1_ ? basic_phase1_cost(i) : cost_[basic_[i]];
  }

  void ftran(int j) {
    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    for (auto [r, c] : cols_[j])
      for (int i = 0; i < m_; ++i) alpha_[i] += binv_[static_cast<size_t>(i) * m_ + r] * c;
  }

  double reduced_cost(int j) const {
    double d = phase1_ ? 0.0 : cost_[j];
    for (auto [r, c] : cols_[j]) d -= y_[r] * c;
    return d;
  }

  bool refactorize(bool allow_fail = false) {
    Eigen::MatrixXd B(m_, m_);
    B.setZero();
    for (int i = 0; i < m_; ++i)
      for (auto [r, c] : cols_[basic_[i]]) B(r, i) = c;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) {
      if (allow_fail) return false;
      throw BackendError("simplex: singular basis during refactorization");
    }
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i)
      for (int r = 0; r < m_; ++r) binv_[static_cast<size_t>(i) * m_ + r] = inv(i, r);
    beta_.assign(m_, 0.0);
    recompute_beta();
    pivots_since_refactor_ = 0;
    return true;
  }

  void recompute_beta() {
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      const double v = nonbasic_value(j);
      if (v != 0.0)
        for (auto [i, c] : cols_[j]) resid[i] -= c * v;
    }
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += row[r] * resid[r];
      beta_[i] = s;
    }
  }

  Status iterate(bool phase1) {
    set_costs(phase1);
    const double dj_tol = std::max(1e-9, 1e-9 * cost_norm_) + 1e-9;
    while (true) {
      if (phase1 && !any_infeasible()) return Status::Optimal;
      if (++iter_ > iter_cap_) return Status::IterationLimit;

      load_cB();
      btran();
      int enter = -1, dir = 0;
      double best = dj_tol;
      for (int j = 0; j < n_total_; ++j) {
        const VarState st = state_[j];
        if (st == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double d = reduced_cost(j);
        if ((st == VarState::AtLo || st == VarState::FreeZero) && d < -best) {
          enter = j;
          dir = +1;
          if (bland_) break;
          best = -d;
        } else if ((st == VarState::AtUp || st == VarState::FreeZero) && d > best) {
          enter = j;
          dir = -1;
          if (bland_) break;
          best = d;
        }
      }
      if (enter < 0) return Status::Optimal;

      ftran(enter);

      // Ratio test. Feasible basics block at their bounds; infeasible basics
      // block where they regain feasibility (composite rule), and only
      // movement toward the violated bound blocks.
      double step = hi_[enter] - lo_[enter];  // bound-flip distance
      int leave = -1;
      double leave_alpha = 0.0;
      bool leave_to_lo = true;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha_[i] * dir;
        if (std::fabs(a) <= kPivotTol) continue;
        const int bj = basic_[i];
        double cand;
        bool to_lo;
        if (phase1 && beta_[i] < lo_[bj] - band_[bj]) {
          if (a >= 0) continue;  // moving further down never blocks
          cand = (lo_[bj] - beta_[i]) / (-a);
          to_lo = true;
        } else if (phase1 && beta_[i] > hi_[bj] + band_[bj]) {
          if (a <= 0) continue;
          cand = (beta_[i] - hi_[bj]) / a;
          to_lo = false;
        } else if (a > 0) {
          if (!std::isfinite(lo_[bj])) continue;
          cand = (beta_[i] - lo_[bj]) / a;
          to_lo = true;
        } else {
          if (!std::isfinite(hi_[bj])) continue;
          cand = (hi_[bj] - beta_[i]) / (-a);
          to_lo = false;
        }
        if (cand < -kRatioTol) cand = 0.0;
        bool accept = false;
        if (cand < step - kRatioTol) {
          accept = true;
        } else if (leave >= 0 && cand < step + kRatioTol) {
          accept = bland_ ? bj < basic_[leave] : std::fabs(alpha_[i]) > std::fabs(leave_alpha);
        }
        if (accept) {
          step = std::min(step, std::max(cand, 0.0));
          leave = i;
          leave_alpha = alpha_[i];
          leave_to_lo = to_lo;
        }
      }

      if (!std::isfinite(step)) {
        // Phase 1 is bounded below by zero; an unbounded direction cannot
        // appear once infeasibility is positive and decreasing.
        return phase1 ? Status::IterationLimit : Status::Unbounded;
      }

      if (leave < 0) {
        for (int i = 0; i < m_; ++i) beta_[i] -= alpha_[i] * dir * step;
        state_[enter] = dir > 0 ? VarState::AtUp : VarState::AtLo;
      } else {
        const double enter_from = nonbasic_value(enter);
        for (int i = 0; i < m_; ++i) beta_[i] -= alpha_[i] * dir * step;
        const int out_col = basic_[leave];
        state_[out_col] = leave_to_lo ? VarState::AtLo : VarState::AtUp;
        basic_[leave] = enter;
        state_[enter] = VarState::Basic;
        beta_[leave] = enter_from + dir * step;
        update_binv(leave);
        if (++pivots_since_refactor_ >= kRefactorEvery) refactorize();
      }

      // Cycling guard: Bland's rule engages while the objective stalls.
      const double obj = current_objective();
      if (obj < last_obj_ - 1e-12 * (1.0 + std::fabs(last_obj_))) {
        last_obj_ = obj;
        stall_ = 0;
        bland_ = false;
      } else if (++stall_ > 4L * (m_ + n_total_)) {
        bland_ = true;
      }
    }
  }

  void update_binv(int p) {
    const double piv = alpha_[p];
    if (std::fabs(piv) < 1e-12) {
      refactorize();
      return;
    }
    double* rowp = &binv_[static_cast<size_t>(p) * m_];
    const double inv_piv = 1.0 / piv;
    for (int k = 0; k < m_; ++k) rowp[k] *= inv_piv;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      const double f = alpha_[i];
      if (f == 0.0) continue;
      double* rowi = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) rowi[k] -= f * rowp[k];
    }
  }

  void debug_dump_phase1() {
    std::fprintf(stderr, "phase1 stuck: iters=%ld total_viol=%.3e\n", iter_,
                 total_infeasibility());
    load_cB();
    btran();
    int nviol = 0;
    for (int i = 0; i < m_; ++i)
      if (infeasible_at(i)) {
        ++nviol;
        if (nviol <= 8)
          std::fprintf(stderr, "  basic[%d]=col%d beta=%.6f lo=%.3g hi=%.3g viol=%.3e\n", i,
                       basic_[i], beta_[i], lo_[basic_[i]], hi_[basic_[i]], violation(i));
      }
    std::fprintf(stderr, "  violated basics: %d\n", nviol);
    int improving = 0;
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
      const double d = reduced_cost(j);
      if (((state_[j] == VarState::AtLo || state_[j] == VarState::FreeZero) && d < -1e-9) ||
          ((state_[j] == VarState::AtUp || state_[j] == VarState::FreeZero) && d > 1e-9))
        ++improving;
    }
    std::fprintf(stderr, "  improving nonbasics at terminal basis: %d\n", improving);
    // cross-check reduced costs via ftran for every nonbasic of the row
    {
      int mism = 0;
      for (int j = 0; j < n_total_ && mism < 5; ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double d_btran = reduced_cost(j);
        ftran(j);
        double d_ftran = 0.0;
        for (int i = 0; i < m_; ++i) d_ftran -= basic_phase1_cost(i) * alpha_[i];
        if (std::fabs(d_btran - d_ftran) > 1e-6) {
          ++mism;
          std::fprintf(stderr, "  d mismatch col %d: btran %.6g ftran %.6g\n", j, d_btran,
                       d_ftran);
        }
      }
      std::fprintf(stderr, "  d mismatches: %d\n", mism);
    }
    // examine the first violated row's columns
    for (int i = 0; i < m_; ++i) {
      if (!infeasible_at(i)) continue;
      // find the row this slack belongs to (its own row if a slack)
      const int vrow = basic_[i] >= n_struct_ ? basic_[i] - n_struct_ : -1;
      std::fprintf(stderr, "  violated basis pos %d col %d row %d; columns of that row:\n", i,
                   basic_[i], vrow);
      if (vrow >= 0) {
        for (int j = 0; j < n_total_; ++j) {
          for (auto [r, c] : cols_[j]) {
            if (r != vrow) continue;
            const double d = state_[j] == VarState::Basic ? 0.0 : reduced_cost(j);
            std::fprintf(stderr, "    col %d coef %.3g state %d lo %.3g hi %.3g d %.4g\n", j, c,
                         (int)state_[j], lo_[j], hi_[j], d);
          }
        }
      }
      break;
    }
  }

  // Farkas certificate via an explicit ray LP over the dual cone; only
  // meaningful when every structural variable is [0, inf).
  void attach_ray(SolveOutcome& out) {
    for (int j = 0; j < n_struct_; ++j)
      if (lo_of_model(j) != 0.0 || std::isfinite(hi_of_model(j))) {
        out.message = "no Farkas ray: model has general variable bounds";
        return;
      }
    Model ray_lp;
    ray_lp.maximize = true;
    for (int i = 0; i < m_; ++i) {
      double lo = -1.0, hi = 1.0;
      if (model_.rows[i].sense == RowSense::LE) hi = 0.0;
      if (model_.rows[i].sense == RowSense::GE) lo = 0.0;
      ray_lp.add_var(VarKind::Continuous, lo, hi, model_.rows[i].rhs);
    }
    std::vector<std::vector<std::pair<int, double>>> by_var(n_struct_);
    for (int i = 0; i < m_; ++i)
      for (auto [j, c] : model_.rows[i].terms) by_var[j].push_back({i, c});
    for (int j = 0; j < n_struct_; ++j)
      if (!by_var[j].empty()) ray_lp.add_row(by_var[j], RowSense::LE, 0.0);

    LpOptions sub;
    SolveOutcome res = Simplex(ray_lp, sub).run();
    if (res.status != SolveStatus::Optimal || res.obj <= kFeasTol * (1.0 + rhs_norm_)) {
      out.message = "no Farkas ray found";
      return;
    }
    double norm = 0.0;
    for (double v : res.x) norm = std::max(norm, std::fabs(v));
    out.ray.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) out.ray[i] = res.x[i] / norm;
  }
};

}  // namespace

SolveOutcome simplex_solve(const Model& model, const LpOptions& opts) {
  if (model.num_rows() == 0) {
    // Pure bound problem: each variable sits at its cheaper bound.
    SolveOutcome out;
    out.x.assign(model.num_vars(), 0.0);
    double obj = 0.0;
    const double sign = model.maximize ? -1.0 : 1.0;
    for (int j = 0; j < model.num_vars(); ++j) {
      const double lo = opts.lo_override ? (*opts.lo_override)[j] : model.vars[j].lo;
      const double hi = opts.hi_override ? (*opts.hi_override)[j] : model.vars[j].hi;
      if (lo > hi + kFeasTol) {
        out.status = SolveStatus::Infeasible;
        return out;
      }
      const double c = sign * model.vars[j].obj;
      double v;
      if (c > 0.0)
        v = lo;
      else if (c < 0.0)
        v = hi;
      else
        v = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
      if (!std::isfinite(v)) {
        out.status = SolveStatus::Unbounded;
        return out;
      }
      out.x[j] = v;
      obj += model.vars[j].obj * v;
    }
    out.status = SolveStatus::Optimal;
    out.obj = out.lb = out.ub = obj;
    return out;
  }
  Simplex s(model, opts);
  return s.run();
}

}  // namespace bfep::milp
