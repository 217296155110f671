#include "bfep/milp/branch_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "bfep/milp/simplex.hpp"

namespace bfep::milp {

namespace {

constexpr double kIntTol = 1e-6;

struct Node {
  int parent = -1;
  int var = -1;      // branching variable (unset for root)
  double lo = 0.0;   // bound override applied at this node
  double hi = 0.0;
  double bound = -kInf;  // inherited LP bound
  bool open = false;
  std::shared_ptr<const SimplexBasis> basis;  // parent's final basis
};

bool integral(double v) { return std::fabs(v - std::round(v)) <= kIntTol; }

struct WarmCheck {
  bool ok = true;
  std::string reason;
};

WarmCheck check_warm(const Model& model, const std::vector<double>& warm) {
  WarmCheck res;
  if (static_cast<int>(warm.size()) != model.num_vars()) {
    res.ok = false;
    res.reason = "warm start has wrong dimension";
    return res;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    if (warm[j] < v.lo - kIntTol || warm[j] > v.hi + kIntTol) {
      res.ok = false;
      res.reason = "warm start violates bounds of variable " + std::to_string(j);
      return res;
    }
    if (v.kind != VarKind::Continuous && !integral(warm[j])) {
      res.ok = false;
      res.reason = "warm start fractional on integer variable " + std::to_string(j);
      return res;
    }
  }
  for (int i = 0; i < model.num_rows(); ++i) {
    const double act = model.activity(i, warm);
    const double tol = 1e-6 * (1.0 + std::fabs(model.rows[i].rhs));
    const auto& row = model.rows[i];
    const bool bad = (row.sense == RowSense::LE && act > row.rhs + tol) ||
                     (row.sense == RowSense::GE && act < row.rhs - tol) ||
                     (row.sense == RowSense::EQ && std::fabs(act - row.rhs) > tol);
    if (bad) {
      res.ok = false;
      res.reason = "warm start violates row " + std::to_string(i);
      return res;
    }
  }
  return res;
}

}  // namespace

SolveOutcome branch_and_bound(const Model& model_in, const SolveLimits& limits,
                              const std::vector<double>* warm_start) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  // Work in minimization form; flip back on exit.
  Model model = model_in;
  const double obj_sign = model_in.maximize ? -1.0 : 1.0;
  if (model.maximize) {
    model.maximize = false;
    for (auto& v : model.vars) v.obj = -v.obj;
  }

  SolveOutcome out;
  out.x.assign(model.num_vars(), 0.0);

  // Objective is integral whenever only integer variables carry cost with
  // integral coefficients; node bounds can then be ceiled.
  bool integral_obj = true;
  for (const auto& v : model.vars)
    if (v.obj != 0.0 && (v.kind == VarKind::Continuous || !integral(v.obj))) integral_obj = false;
  auto lift = [&](double bound) { return integral_obj ? std::ceil(bound - 1e-6) : bound; };

  double incumbent_val = kInf;
  std::vector<double> incumbent;
  if (warm_start) {
    const WarmCheck chk = check_warm(model, *warm_start);
    if (!chk.ok) {
      out.warm_start_rejected = true;
      out.message = "warm start rejected: " + chk.reason;
    } else {
      incumbent = *warm_start;
      for (int j = 0; j < model.num_vars(); ++j)
        if (model.vars[j].kind != VarKind::Continuous) incumbent[j] = std::round(incumbent[j]);
      incumbent_val = 0.0;
      for (int j = 0; j < model.num_vars(); ++j) incumbent_val += model.vars[j].obj * incumbent[j];
    }
  }

  std::vector<Node> nodes;
  nodes.push_back({});
  nodes[0].open = true;
  nodes[0].bound = -kInf;
  using HeapItem = std::pair<double, int>;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
  std::vector<int> dive_stack;
  heap.push({-kInf, 0});
  dive_stack.push_back(0);
  long open_count = 1;

  std::vector<double> lo0(model.num_vars()), hi0(model.num_vars());
  for (int j = 0; j < model.num_vars(); ++j) {
    lo0[j] = model.vars[j].lo;
    hi0[j] = model.vars[j].hi;
  }
  std::vector<double> lo(lo0), hi(hi0);

  auto materialize = [&](int id) {
    lo = lo0;
    hi = hi0;
    for (int cur = id; cur > 0; cur = nodes[cur].parent) {
      const Node& nd = nodes[cur];
      lo[nd.var] = std::max(lo[nd.var], nd.lo);
      hi[nd.var] = std::min(hi[nd.var], nd.hi);
    }
  };

  auto heap_lb = [&]() -> double {
    double lb = kInf;
    for (const auto& nd : nodes)
      if (nd.open) lb = std::min(lb, nd.bound);
    if (lb == kInf) lb = incumbent_val;
    return lb;
  };

  long processed = 0;
  bool stopped_early = false;

  while (open_count > 0) {
    while (!heap.empty() && !nodes[heap.top().second].open) heap.pop();
    double lb_now = heap.empty() ? incumbent_val : heap.top().first;
    if (lb_now > incumbent_val) lb_now = incumbent_val;

    if (incumbent_val < kInf && lb_now > -kInf) {
      const double gap = (incumbent_val - lb_now) / std::max(1.0, std::fabs(incumbent_val));
      if (gap <= limits.rel_gap + 1e-12) break;
    }
    if (elapsed() > limits.time_limit_sec ||
        (limits.node_limit >= 0 && processed >= limits.node_limit) ||
        (limits.stop && limits.stop(obj_sign * lb_now, obj_sign * incumbent_val, elapsed()))) {
      stopped_early = true;
      break;
    }

    // Dive while an unexplored child is on the stack; otherwise take the
    // best-bound node. Diving finds incumbents, best-bound closes the gap.
    int id = -1;
    while (!dive_stack.empty() && !nodes[dive_stack.back()].open) dive_stack.pop_back();
    if (!dive_stack.empty()) {
      id = dive_stack.back();
      dive_stack.pop_back();
    } else {
      while (!heap.empty() && !nodes[heap.top().second].open) heap.pop();
      if (heap.empty()) break;
      id = heap.top().second;
      heap.pop();
    }
    nodes[id].open = false;
    --open_count;
    ++processed;

    if (lift(nodes[id].bound) >= incumbent_val - 1e-9) continue;  // pruned

    materialize(id);
    LpOptions lp_opts;
    lp_opts.lo_override = &lo;
    lp_opts.hi_override = &hi;
    lp_opts.warm_basis = nodes[id].basis.get();
    auto final_basis = std::make_shared<SimplexBasis>();
    lp_opts.basis_out = final_basis.get();
    SolveOutcome rel = simplex_solve(model, lp_opts);
    if (rel.status == SolveStatus::Infeasible) continue;
    if (rel.status == SolveStatus::Unbounded) {
      out.status = SolveStatus::Unbounded;
      out.lb = -kInf;
      return out;
    }
    const double bound = lift(rel.obj);
    if (bound >= incumbent_val - 1e-9) continue;

    // Branch on the first fractional integer variable; model builders place
    // the structurally decisive variables first.
    int branch_var = -1;
    for (int j = 0; j < model.num_vars(); ++j) {
      if (model.vars[j].kind == VarKind::Continuous) continue;
      const double f = rel.x[j] - std::floor(rel.x[j]);
      if (std::min(f, 1.0 - f) > kIntTol) {
        branch_var = j;
        break;
      }
    }
    if (branch_var < 0) {
      double val = 0.0;
      std::vector<double> cand = rel.x;
      for (int j = 0; j < model.num_vars(); ++j) {
        if (model.vars[j].kind != VarKind::Continuous) cand[j] = std::round(cand[j]);
        val += model.vars[j].obj * cand[j];
      }
      if (val < incumbent_val - 1e-12) {
        incumbent_val = val;
        incumbent = std::move(cand);
      }
      continue;
    }

    const double fl = std::floor(rel.x[branch_var]);
    Node down, up;
    down.parent = up.parent = id;
    down.var = up.var = branch_var;
    down.lo = -kInf;
    down.hi = fl;
    up.lo = fl + 1.0;
    up.hi = kInf;
    down.bound = up.bound = bound;
    down.open = up.open = true;
    down.basis = final_basis;
    up.basis = std::move(final_basis);
    const int down_id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(down));
    nodes.push_back(std::move(up));
    heap.push({bound, down_id});
    heap.push({bound, down_id + 1});
    // Plunge along the up-branch only; added supply restores feasibility, so
    // this is the incumbent-finding direction. The heap keeps both children.
    dive_stack.clear();
    dive_stack.push_back(down_id + 1);
    open_count += 2;
  }

  const double lb_final = std::min(heap_lb(), incumbent_val);
  if (incumbent_val < kInf) {
    out.x = incumbent;
    out.obj = obj_sign * incumbent_val;
    out.ub = obj_sign > 0 ? incumbent_val : -lb_final;
    out.lb = obj_sign > 0 ? lb_final : -incumbent_val;
    const double gap = (incumbent_val - lb_final) / std::max(1.0, std::fabs(incumbent_val));
    out.status = gap <= limits.rel_gap + 1e-12 ? SolveStatus::Optimal : SolveStatus::Feasible;
  } else if (stopped_early) {
    out.status = SolveStatus::TimeLimit;
    out.lb = obj_sign > 0 ? lb_final : -kInf;
    out.ub = obj_sign > 0 ? kInf : -lb_final;
  } else {
    out.status = SolveStatus::Infeasible;
  }
  return out;
}

}  // namespace bfep::milp
