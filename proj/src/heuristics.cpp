#include "bfep/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "bfep/milp/solver.hpp"
#include "bfep/soc_graph.hpp"

namespace bfep {

namespace {

using clock_t_ = std::chrono::steady_clock;

long ms_since(clock_t_::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(clock_t_::now() - t0).count();
}

std::vector<char> policy_allowed_arcs(const Instance& inst, int p, int r, int b) {
  // Charging only from the depleted state; idling below full charge only in
  // intervals without demand.
  const SocGraph g = build_soc_graph(inst, p, r, b);
  const int sb = inst.bus_types[b].battery;
  std::vector<char> ok(g.arcs().size(), 1);
  for (size_t a = 0; a < g.arcs().size(); ++a) {
    const SocArc& arc = g.arcs()[a];
    if (arc.kind == ArcKind::Charge && arc.tail_s > 0) ok[a] = 0;
    if (arc.kind == ArcKind::Idle && arc.tail_s < sb && inst.routes[r].demand[p][arc.tail_t] > 0)
      ok[a] = 0;
  }
  return ok;
}

}  // namespace

ArcSet ArcSet::none(const Instance& inst) {
  ArcSet s;
  s.allowed.resize(inst.periods);
  for (int p = 0; p < inst.periods; ++p) {
    s.allowed[p].resize(inst.num_routes());
    for (int r = 0; r < inst.num_routes(); ++r) {
      s.allowed[p][r].resize(inst.num_bus_types());
      for (int b = 0; b < inst.num_bus_types(); ++b) {
        const SocGraph g = build_soc_graph(inst, p, r, b);
        s.allowed[p][r][b].assign(g.arcs().size(), 0);
      }
    }
  }
  return s;
}

void ArcSet::unite(const ArcSet& other) {
  for (size_t p = 0; p < allowed.size(); ++p)
    for (size_t r = 0; r < allowed[p].size(); ++r)
      for (size_t b = 0; b < allowed[p][r].size(); ++b)
        for (size_t a = 0; a < allowed[p][r][b].size(); ++a)
          allowed[p][r][b][a] |= other.allowed[p][r][b][a];
}

long ArcSet::count() const {
  long n = 0;
  for (const auto& pp : allowed)
    for (const auto& rr : pp)
      for (const auto& bb : rr)
        for (char c : bb) n += c != 0;
  return n;
}

long ArcSet::total() const {
  long n = 0;
  for (const auto& pp : allowed)
    for (const auto& rr : pp)
      for (const auto& bb : rr) n += static_cast<long>(bb.size());
  return n;
}

ExtensiveModel build_extensive(const Instance& inst, const PreprocessReport& pre,
                               const ExtensiveOptions& opts) {
  ExtensiveModel ext;
  const StrategicWeights weights =
      opts.weights.invest.empty() ? default_weights(inst) : opts.weights;
  ext.svars = emit_strategic(ext.model, inst, pre, weights);
  ext.opex_weight = weights.opex;

  std::vector<int> routes(inst.num_routes());
  std::iota(routes.begin(), routes.end(), 0);

  for (int p = 0; p < inst.periods; ++p) {
    OperationalOptions oo;
    oo.integrality = opts.integrality;
    oo.no_early_charge = opts.no_early_charge;
    oo.terminal_removed = &pre.removed;

    // Restriction sets live on canonical (p, r, b, arc) indices; reshape to
    // the block layout.
    std::vector<std::vector<std::vector<char>>> allowed;
    if (opts.arc_restriction || opts.policy_restriction) {
      allowed.resize(routes.size());
      for (int r = 0; r < inst.num_routes(); ++r) {
        allowed[r].resize(inst.num_bus_types());
        for (int b = 0; b < inst.num_bus_types(); ++b) {
          if (opts.arc_restriction)
            allowed[r][b] = opts.arc_restriction->allowed[p][r][b];
          else
            allowed[r][b] = policy_allowed_arcs(inst, p, r, b);
        }
      }
      oo.arc_allowed = &allowed;
    }

    OperationalModelHandle h;
    const int first_var = ext.model.num_vars();
    emit_operational_block(inst, p, routes, oo, ext.model, nullptr, &ext.svars.x[p], false, h);
    // Scale the block's schedule costs (discounting by default).
    const double w = ext.opex_weight[p];
    for (int v = first_var; v < ext.model.num_vars(); ++v) ext.model.vars[v].obj *= w;
    ext.ops.push_back(std::move(h));
  }
  return ext;
}

double block_cost(const Instance& inst, const OperationalModelHandle& h,
                  const std::vector<double>& primal) {
  double cost = 0.0;
  for (size_t rs = 0; rs < h.route_set.size(); ++rs) {
    const int r = h.route_set[rs];
    for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
      const SocGraph& g = h.graphs[rs][bp];
      for (size_t a = 0; a < g.arcs().size(); ++a)
        cost += money_to_dollars(g.arcs()[a].cost) * primal[h.vars[rs].arc_base[bp] + a];
    }
    for (int v : h.vars[rs].onroute) cost += money_to_dollars(inst.costs.onroute_service) * primal[v];
    for (int v : h.vars[rs].conventional)
      cost += money_to_dollars(inst.costs.conventional_service) * primal[v];
  }
  return cost;
}

ArcSet collect_active_arcs(const Instance& inst, const ExtensiveModel& ext,
                           const std::vector<double>& primal, double tol) {
  ArcSet s = ArcSet::none(inst);
  for (int p = 0; p < inst.periods; ++p) {
    const OperationalModelHandle& h = ext.ops[p];
    for (size_t rs = 0; rs < h.route_set.size(); ++rs)
      for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
        const int b = h.bus_types[bp];
        const auto& g = h.graphs[rs][bp];
        for (size_t a = 0; a < g.arcs().size(); ++a)
          if (primal[h.vars[rs].arc_base[bp] + a] > tol)
            s.allowed[p][h.route_set[rs]][b][a] = 1;
      }
  }
  return s;
}

PlanSolution extract_plan(const Instance& inst, const ExtensiveModel& ext,
                          const std::vector<double>& primal) {
  PlanSolution plan;
  for (int p = 0; p < inst.periods; ++p) {
    std::vector<int> flat(strategic_dim(inst), 0);
    for (int c = 0; c < strategic_dim(inst); ++c)
      flat[c] = static_cast<int>(std::llround(primal[ext.svars.x[p][c]]));
    plan.states.push_back(unflatten_state(inst, flat));
    plan.schedule.periods.push_back(ext.ops[p].extract(inst, primal));
  }
  return plan;
}

std::vector<double> plan_to_vector(const Instance& inst, const ExtensiveModel& ext,
                                   const PlanSolution& plan) {
  std::vector<double> v(ext.model.num_vars(), 0.0);
  for (int p = 0; p < inst.periods; ++p) {
    const std::vector<int> flat = flatten_state(inst, plan.states[p]);
    for (int c = 0; c < strategic_dim(inst); ++c) v[ext.svars.x[p][c]] = flat[c];
    // Acquisition variables are pinned by their defining equalities; recompute
    // the increments directly.
    const std::vector<int> prev =
        flatten_state(inst, p == 0 ? inst.initial_state : plan.states[p - 1]);
    size_t term = 0;
    auto set_u = [&](double inc) { v[ext.svars.invest_terms[p][term++].first] = std::max(0.0, inc); };
    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        set_u(flat[comp_chi_depot(inst, i, k)] - prev[comp_chi_depot(inst, i, k)]);
    for (int j = 0; j < inst.num_terminals(); ++j)
      set_u(flat[comp_chi_terminal(inst, j)] - prev[comp_chi_terminal(inst, j)]);
    for (int b = 0; b < inst.num_bus_types(); ++b) {
      double inc = 0;
      for (int r = 0; r < inst.num_routes(); ++r)
        inc += flat[comp_eta_depot(inst, r, b)] - prev[comp_eta_depot(inst, r, b)];
      set_u(inc);
    }
    {
      double inc = 0;
      for (int r = 0; r < inst.num_routes(); ++r)
        inc += flat[comp_eta_onroute(inst, r)] - prev[comp_eta_onroute(inst, r)];
      set_u(inc);
    }

    const OperationalModelHandle& h = ext.ops[p];
    for (size_t rs = 0; rs < h.route_set.size(); ++rs) {
      const int r = h.route_set[rs];
      const auto& sched = plan.schedule.periods[p][rs];
      for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
        const int b = h.bus_types[bp];
        const SocGraph& g = h.graphs[rs][bp];
        for (size_t a = 0; a < g.arcs().size(); ++a) {
          const SocArc& arc = g.arcs()[a];
          int flow = 0;
          switch (arc.kind) {
            case ArcKind::Service: flow = sched.service[b][arc.tail_t][arc.tail_s - 1]; break;
            case ArcKind::Idle: flow = sched.idle[b][arc.tail_t][arc.tail_s]; break;
            case ArcKind::Charge:
              flow = sched.charge[b][arc.depot][arc.charger][arc.tail_t][arc.tail_s];
              break;
          }
          v[h.vars[rs].arc_base[bp] + a] = flow;
        }
      }
      for (int t = 0; t < inst.intervals; ++t)
        for (size_t pos = 0; pos < h.vars[rs].local_terminals.size(); ++pos)
          v[h.vars[rs].onroute[t * h.vars[rs].local_terminals.size() + pos]] =
              sched.onroute[t][h.vars[rs].local_terminals[pos]];
      for (int t = 0; t < inst.intervals; ++t)
        v[h.vars[rs].conventional[t]] = sched.conventional[t];
      (void)r;
    }
  }
  return v;
}

namespace {

SolveResult solve_extensive_model(const Instance& inst, const ExtensiveModel& ext,
                                  const milp::SolveLimits& limits,
                                  const std::vector<double>* warm) {
  SolveResult res;
  milp::SolveOutcome out = milp::solve_mip(ext.model, limits, warm);
  res.status = out.status;
  res.lower_bound = out.lb;
  res.upper_bound = out.ub;
  res.message = out.message;
  if (out.feasible()) res.plan = extract_plan(inst, ext, out.x);
  return res;
}

}  // namespace

SolveResult solve_extensive(const Instance& inst, const PreprocessReport& pre,
                            const milp::SolveLimits& limits, const PlanSolution* warm) {
  ExtensiveModel ext = build_extensive(inst, pre, {});
  if (warm) {
    const std::vector<double> wv = plan_to_vector(inst, ext, *warm);
    return solve_extensive_model(inst, ext, limits, &wv);
  }
  return solve_extensive_model(inst, ext, limits, nullptr);
}

SolveResult run_arc_selection(const Instance& inst, const PreprocessReport& pre,
                              const PhasePlan& plan, const milp::SolveLimits& limits,
                              MinFleetCapVariant sweep_variant) {
  const auto t0 = clock_t_::now();
  const double total = limits.time_limit_sec;
  const double heur_budget = total * plan.heuristic_share;
  auto remaining = [&](double upto) {
    return std::max(1e-3, upto - std::chrono::duration<double>(clock_t_::now() - t0).count());
  };

  SolveResult res;
  ArcSet arcs = ArcSet::none(inst);

  // Phase LP1/LP2: active arcs of the LP relaxations, with and without early
  // charging.
  for (int phase = 0; phase < 2; ++phase) {
    const auto tp = clock_t_::now();
    ExtensiveOptions eo;
    eo.integrality = false;
    eo.no_early_charge = phase == 1;
    ExtensiveModel ext = build_extensive(inst, pre, eo);
    milp::SolveOutcome lp = milp::solve_lp(ext.model);
    PhaseLog log;
    log.phase = phase == 0 ? "LP1" : "LP2";
    log.arcs_total = arcs.total();
    if (lp.status == milp::SolveStatus::Optimal) {
      arcs.unite(collect_active_arcs(inst, ext, lp.x));
      log.lb = lp.obj;
    } else if (phase == 0) {
      res.status = milp::SolveStatus::Infeasible;
      res.message = "extensive LP relaxation infeasible";
      log.wall_ms = ms_since(tp);
      res.phases.push_back(log);
      return res;
    }
    log.arcs_retained = arcs.count();
    log.wall_ms = ms_since(tp);
    res.phases.push_back(log);
  }

  const ArcSet lp_arcs = arcs;  // E_LP1 u E_LP2; the sweep unions on top

  // Phase SR: single-route sweeps over the assisting-fleet grid.
  {
    const auto tp = clock_t_::now();
    PhaseLog log;
    log.phase = "SR";
    log.arcs_total = arcs.total();
    for (int p = 0; p < inst.periods; ++p)
      for (int r = 0; r < inst.num_routes(); ++r)
        for (int b = 0; b < inst.num_bus_types(); ++b)
          for (int m = 0; m < inst.peak_demand(p, r); ++m) {
            const int fleet = min_depot_fleet(inst, p, r, m, {b}, sweep_variant);
            if (fleet == kMinFleetInfeasible) continue;
            const SweepResult sweep = solve_route_sweep(inst, p, r, b, m, fleet, sweep_variant);
            if (!sweep.feasible) continue;
            const auto& h = sweep.handle;
            const SocGraph& g = h.graphs[0][0];
            for (size_t a = 0; a < g.arcs().size(); ++a)
              if (sweep.primal[h.vars[0].arc_base[0] + a] > 1e-6)
                arcs.allowed[p][r][b][a] = 1;
          }
    log.arcs_retained = arcs.count();
    log.wall_ms = ms_since(tp);
    res.phases.push_back(log);
  }

  // Restricted integer phases, then the unrestricted warm-started solve.
  ExtensiveModel full = build_extensive(inst, pre, {});
  std::optional<PlanSolution> incumbent;
  double incumbent_val = milp::kInf;

  auto run_phase = [&](const char* name, const ArcSet* restriction, double budget) {
    const auto tp = clock_t_::now();
    ExtensiveOptions eo;
    eo.arc_restriction = restriction;
    ExtensiveModel ext = restriction ? build_extensive(inst, pre, eo) : std::move(full);
    milp::SolveLimits lim = limits;
    lim.time_limit_sec = budget;
    std::vector<double> warm_vec;
    const std::vector<double>* warm = nullptr;
    if (incumbent) {
      warm_vec = plan_to_vector(inst, ext, *incumbent);
      warm = &warm_vec;
    }
    milp::SolveOutcome out = milp::solve_mip(ext.model, lim, warm);
    PhaseLog log;
    log.phase = name;
    log.arcs_total = restriction ? restriction->total() : ArcSet::none(inst).total();
    log.arcs_retained = restriction ? restriction->count() : log.arcs_total;
    log.lb = out.lb;
    log.ub = out.ub;
    log.wall_ms = ms_since(tp);
    res.phases.push_back(log);
    if (out.feasible() && out.ub < incumbent_val - 1e-9) {
      incumbent = extract_plan(inst, ext, out.x);
      incumbent_val = out.ub;
    }
    return out;
  };

  run_phase("IP1", &lp_arcs, remaining(heur_budget * (1.0 - plan.ip2_share)));
  run_phase("IP2", &arcs, remaining(heur_budget));
  milp::SolveOutcome last = run_phase("EX", nullptr, remaining(total));

  res.status = last.status;
  res.lower_bound = last.lb;
  res.upper_bound = incumbent_val;
  if (incumbent) res.plan = std::move(incumbent);
  return res;
}

SolveResult run_policy_restriction(const Instance& inst, const PreprocessReport& pre,
                                   const milp::SolveLimits& limits) {
  const auto t0 = clock_t_::now();
  const double total = limits.time_limit_sec;
  // The restricted model gets the heuristic share; the warm-started full
  // model the remainder.
  const double restricted_budget = total * 0.75;

  SolveResult res;
  std::optional<PlanSolution> incumbent;
  double incumbent_val = milp::kInf;
  {
    const auto tp = clock_t_::now();
    ExtensiveOptions eo;
    eo.policy_restriction = true;
    ExtensiveModel ext = build_extensive(inst, pre, eo);
    milp::SolveLimits lim = limits;
    lim.time_limit_sec = restricted_budget;
    milp::SolveOutcome out = milp::solve_mip(ext.model, lim);
    PhaseLog log;
    log.phase = "PR";
    log.arcs_total = ArcSet::none(inst).total();
    long retained = 0;
    for (int p = 0; p < inst.periods; ++p)
      for (int r = 0; r < inst.num_routes(); ++r)
        for (int b = 0; b < inst.num_bus_types(); ++b)
          for (char c : policy_allowed_arcs(inst, p, r, b)) retained += c != 0;
    log.arcs_retained = retained;
    log.lb = out.lb;
    log.ub = out.ub;
    log.wall_ms = ms_since(tp);
    res.phases.push_back(log);
    if (out.feasible()) {
      incumbent = extract_plan(inst, ext, out.x);
      incumbent_val = out.ub;
    } else {
      res.message = "restricted model infeasible; solving unrestricted cold";
    }
  }
  {
    const auto tp = clock_t_::now();
    ExtensiveModel ext = build_extensive(inst, pre, {});
    milp::SolveLimits lim = limits;
    lim.time_limit_sec =
        std::max(1e-3, total - std::chrono::duration<double>(clock_t_::now() - t0).count());
    std::vector<double> warm_vec;
    const std::vector<double>* warm = nullptr;
    if (incumbent) {
      warm_vec = plan_to_vector(inst, ext, *incumbent);
      warm = &warm_vec;
    }
    milp::SolveOutcome out = milp::solve_mip(ext.model, lim, warm);
    PhaseLog log;
    log.phase = "EX";
    log.arcs_total = ArcSet::none(inst).total();
    log.arcs_retained = log.arcs_total;
    log.lb = out.lb;
    log.ub = out.ub;
    log.wall_ms = ms_since(tp);
    res.phases.push_back(log);
    res.status = out.status;
    res.lower_bound = out.lb;
    if (out.feasible() && out.ub < incumbent_val) {
      incumbent = extract_plan(inst, ext, out.x);
      incumbent_val = out.ub;
    }
    res.upper_bound = incumbent_val;
    if (incumbent) res.plan = std::move(incumbent);
  }
  return res;
}

}  // namespace bfep
