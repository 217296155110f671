#include "bfep/operational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bfep/milp/solver.hpp"

namespace bfep {

namespace {

using milp::Model;
using milp::RowSense;
using milp::VarKind;

// Total daily demand of route r in period p; an upper bound on any useful
// single-route fleet and on any arc flow of its graphs.
int total_demand(const Instance& inst, int p, int r) {
  int tot = 0;
  for (int d : inst.routes[r].demand[p]) tot += d;
  return tot;
}

struct EmitConfig {
  // Exactly one of x_flat / x_vars is set. x_flat puts strategic values on
  // the rhs; x_vars moves them onto the lhs as model variables (-1 = absent,
  // treated as zero).
  const std::vector<double>* x_flat = nullptr;
  const std::vector<int>* x_vars = nullptr;
  bool per_route_linking = false;  // single-route copies of the capacity rows
};

void emit_operational(const Instance& inst, int p, const std::vector<int>& routes,
                      const OperationalOptions& opts, const EmitConfig& cfg, Model& m,
                      OperationalModelHandle& h) {
  h.first_row = m.num_rows();
  const int T = inst.intervals;
  h.period = p;
  h.route_set = routes;
  h.bus_types = opts.bus_subset;
  if (h.bus_types.empty()) {
    h.bus_types.resize(inst.num_bus_types());
    std::iota(h.bus_types.begin(), h.bus_types.end(), 0);
  }
  const VarKind flow_kind = opts.integrality ? VarKind::Integer : VarKind::Continuous;

  auto removed = [&](int j) { return opts.terminal_removed && (*opts.terminal_removed)[j]; };
  auto x_value = [&](int comp) -> double { return cfg.x_flat ? (*cfg.x_flat)[comp] : 0.0; };
  auto x_var = [&](int comp) -> int { return cfg.x_vars ? (*cfg.x_vars)[comp] : -1; };

  // Variables.
  h.graphs.resize(routes.size());
  h.vars.resize(routes.size());
  for (size_t rs = 0; rs < routes.size(); ++rs) {
    const int r = routes[rs];
    auto& rv = h.vars[rs];
    rv.arc_base.resize(h.bus_types.size());
    // Flow variables stay [0, inf): the balance + fleet-cut rows already imply
    // flow <= fleet size, and redundant finite bounds would let the simplex
    // park variables at an upper bound whose multiplier the Benders cut
    // arithmetic does not model.
    for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
      const int b = h.bus_types[bp];
      h.graphs[rs].push_back(build_soc_graph(inst, p, r, b));
      const SocGraph& g = h.graphs[rs].back();
      rv.arc_base[bp] = m.num_vars();
      for (size_t a = 0; a < g.arcs().size(); ++a) {
        const SocArc& arc = g.arcs()[a];
        double hi = milp::kInf;
        if (opts.arc_allowed && !(*opts.arc_allowed)[rs][bp][a]) hi = 0.0;
        if (opts.no_early_charge && arc.kind == ArcKind::Charge && arc.tail_s > 0) hi = 0.0;
        m.add_var(flow_kind, 0.0, hi, money_to_dollars(arc.cost));
      }
    }
    for (size_t lj = 0; lj < inst.routes[r].terminals.size(); ++lj)
      if (!removed(inst.routes[r].terminals[lj])) rv.local_terminals.push_back(static_cast<int>(lj));
    rv.onroute.resize(static_cast<size_t>(T) * rv.local_terminals.size());
    for (int t = 0; t < T; ++t)
      for (size_t lj = 0; lj < rv.local_terminals.size(); ++lj)
        rv.onroute[t * rv.local_terminals.size() + lj] =
            m.add_var(flow_kind, 0.0, milp::kInf, money_to_dollars(inst.costs.onroute_service));
    rv.conventional.resize(T);
    for (int t = 0; t < T; ++t)
      rv.conventional[t] =
          m.add_var(flow_kind, 0.0, milp::kInf, money_to_dollars(inst.costs.conventional_service));
  }

  // Strategic components resolve per row: a model variable when mapped,
  // otherwise the fixed value (mixed mode serves probes that free a few
  // components of an otherwise fixed state).
  auto add_row = [&](std::vector<std::pair<int, double>> terms, RowSense sense, OpRowLink link,
                     OpRowKind kind) {
    double rhs = link.constant;
    for (auto [comp, coef] : link.x_terms) {
      const int v = x_var(comp);
      if (v >= 0)
        terms.push_back({v, -coef});
      else
        rhs += coef * x_value(comp);
    }
    m.add_row(std::move(terms), sense, rhs);
    h.links.push_back(std::move(link));
    h.row_kinds.push_back(kind);
  };

  // Charger capacity per (depot, charger, t): charge arcs whose occupancy
  // window covers t, counted with multiplicity when kappa wraps past T.
  if (opts.charger_rows) {
    auto emit_charger_rows = [&](const std::vector<size_t>& route_positions) {
      for (int i = 0; i < inst.num_depots(); ++i)
        for (int k = 0; k < inst.num_charger_types(); ++k)
          for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> terms;
            for (size_t rs : route_positions)
              for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
                const SocGraph& g = h.graphs[rs][bp];
                for (size_t a = 0; a < g.arcs().size(); ++a) {
                  const SocArc& arc = g.arcs()[a];
                  if (arc.kind != ArcKind::Charge || arc.depot != i || arc.charger != k) continue;
                  int mult = 0;
                  for (int l = 0; l < arc.kappa; ++l)
                    if ((arc.tail_t + l) % T == t) ++mult;
                  if (mult > 0) terms.push_back({h.vars[rs].arc_base[bp] + static_cast<int>(a),
                                                 static_cast<double>(mult)});
                }
              }
            if (terms.empty()) continue;
            add_row(std::move(terms), RowSense::LE,
                    {0.0, {{comp_chi_depot(inst, i, k), 1.0}}}, OpRowKind::ChargerCap);
          }
      // Terminal capacity per (terminal, t).
      for (int j = 0; j < inst.num_terminals(); ++j) {
        if (removed(j)) continue;
        for (int t = 0; t < T; ++t) {
          std::vector<std::pair<int, double>> terms;
          for (size_t rs : route_positions) {
            const int r = routes[rs];
            const auto& rv = h.vars[rs];
            for (size_t pos = 0; pos < rv.local_terminals.size(); ++pos)
              if (inst.routes[r].terminals[rv.local_terminals[pos]] == j)
                terms.push_back({rv.onroute[t * rv.local_terminals.size() + pos], 1.0});
          }
          if (terms.empty()) continue;
          add_row(std::move(terms), RowSense::LE,
                  {0.0, {{comp_chi_terminal(inst, j), static_cast<double>(inst.rho)}}},
                  OpRowKind::TerminalCap);
        }
      }
    };
    if (cfg.per_route_linking) {
      for (size_t rs = 0; rs < routes.size(); ++rs) emit_charger_rows({rs});
    } else {
      std::vector<size_t> all(routes.size());
      std::iota(all.begin(), all.end(), size_t{0});
      emit_charger_rows(all);
    }
  }

  // Route-separable families.
  for (size_t rs = 0; rs < routes.size(); ++rs) {
    const int r = routes[rs];
    const auto& rv = h.vars[rs];

    for (int t = 0; t < T; ++t) {  // service level
      std::vector<std::pair<int, double>> terms;
      for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
        const SocGraph& g = h.graphs[rs][bp];
        for (size_t a = 0; a < g.arcs().size(); ++a) {
          const SocArc& arc = g.arcs()[a];
          if (arc.kind == ArcKind::Service && arc.tail_t == t)
            terms.push_back({rv.arc_base[bp] + static_cast<int>(a), 1.0});
        }
      }
      for (size_t pos = 0; pos < rv.local_terminals.size(); ++pos)
        terms.push_back({rv.onroute[t * rv.local_terminals.size() + pos], 1.0});
      terms.push_back({rv.conventional[t], 1.0});
      add_row(std::move(terms), RowSense::GE,
              {static_cast<double>(inst.routes[r].demand[p][t]), {}}, OpRowKind::Service);
    }

    for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {  // node balance
      const int b = h.bus_types[bp];
      const SocGraph& g = h.graphs[rs][bp];
      const int sb = inst.bus_types[b].battery;
      std::vector<std::vector<std::pair<int, double>>> node_terms(g.num_nodes());
      for (size_t a = 0; a < g.arcs().size(); ++a) {
        const SocArc& arc = g.arcs()[a];
        const int var = rv.arc_base[bp] + static_cast<int>(a);
        const int tail = g.node_index(arc.tail_t, arc.tail_s);
        const int head = g.node_index(arc.head_t, arc.head_s);
        if (tail == head) continue;  // self-loop conserves trivially
        node_terms[tail].push_back({var, 1.0});
        node_terms[head].push_back({var, -1.0});
      }
      for (int t = 0; t < T; ++t)
        for (int s = 0; s <= sb; ++s)
          add_row(node_terms[g.node_index(t, s)], RowSense::EQ, {0.0, {}}, OpRowKind::NodeBalance);

      // Fleet cut at the t=0 boundary: buses in service or idling at t=0 plus
      // charging trips whose window covers interval 0.
      std::vector<std::pair<int, double>> cut;
      for (size_t a = 0; a < g.arcs().size(); ++a) {
        const SocArc& arc = g.arcs()[a];
        const int var = rv.arc_base[bp] + static_cast<int>(a);
        if (arc.kind == ArcKind::Charge) {
          int mult = 0;
          for (int l = 0; l < arc.kappa; ++l)
            if ((arc.tail_t + l) % T == 0) ++mult;
          if (mult > 0) cut.push_back({var, static_cast<double>(mult)});
        } else if (arc.tail_t == 0) {
          cut.push_back({var, 1.0});
        }
      }
      add_row(std::move(cut), RowSense::LE, {0.0, {{comp_eta_depot(inst, r, b), 1.0}}},
              OpRowKind::FleetDepot);
    }

    if (!rv.local_terminals.empty()) {  // on-route fleet cap per interval
      for (int t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> terms;
        for (size_t pos = 0; pos < rv.local_terminals.size(); ++pos)
          terms.push_back({rv.onroute[t * rv.local_terminals.size() + pos], 1.0});
        add_row(std::move(terms), RowSense::LE, {0.0, {{comp_eta_onroute(inst, r), 1.0}}},
                OpRowKind::FleetOnroute);
      }
    }
    for (int t = 0; t < T; ++t)  // conventional fleet cap per interval
      add_row({{rv.conventional[t], 1.0}}, RowSense::LE,
              {0.0, {{comp_eta_conventional(inst, r), 1.0}}}, OpRowKind::FleetConventional);
  }
}

}  // namespace

std::vector<OperationalSchedule::RouteSchedule> OperationalModelHandle::extract(
    const Instance& inst, const std::vector<double>& primal) const {
  std::vector<OperationalSchedule::RouteSchedule> out;
  const int T = inst.intervals;
  for (size_t rs = 0; rs < route_set.size(); ++rs) {
    const int r = route_set[rs];
    OperationalSchedule::RouteSchedule sched;
    const int B = inst.num_bus_types();
    sched.service.resize(B);
    sched.idle.resize(B);
    sched.charge.resize(B);
    for (int b = 0; b < B; ++b) {
      const int sb = inst.bus_types[b].battery;
      sched.service[b].assign(T, std::vector<int>(sb, 0));
      sched.idle[b].assign(T, std::vector<int>(sb + 1, 0));
      sched.charge[b].assign(
          inst.num_depots(),
          std::vector<std::vector<std::vector<int>>>(
              inst.num_charger_types(),
              std::vector<std::vector<int>>(T, std::vector<int>(sb, 0))));
    }
    for (size_t bp = 0; bp < bus_types.size(); ++bp) {
      const int b = bus_types[bp];
      const SocGraph& g = graphs[rs][bp];
      for (size_t a = 0; a < g.arcs().size(); ++a) {
        const SocArc& arc = g.arcs()[a];
        const int flow = static_cast<int>(std::llround(primal[vars[rs].arc_base[bp] + a]));
        if (flow == 0) continue;
        switch (arc.kind) {
          case ArcKind::Service: sched.service[b][arc.tail_t][arc.tail_s - 1] += flow; break;
          case ArcKind::Idle: sched.idle[b][arc.tail_t][arc.tail_s] += flow; break;
          case ArcKind::Charge:
            sched.charge[b][arc.depot][arc.charger][arc.tail_t][arc.tail_s] += flow;
            break;
        }
      }
    }
    sched.onroute.assign(T, std::vector<int>(inst.routes[r].terminals.size(), 0));
    for (int t = 0; t < T; ++t)
      for (size_t pos = 0; pos < vars[rs].local_terminals.size(); ++pos)
        sched.onroute[t][vars[rs].local_terminals[pos]] = static_cast<int>(
            std::llround(primal[vars[rs].onroute[t * vars[rs].local_terminals.size() + pos]]));
    sched.conventional.assign(T, 0);
    for (int t = 0; t < T; ++t)
      sched.conventional[t] = static_cast<int>(std::llround(primal[vars[rs].conventional[t]]));
    out.push_back(std::move(sched));
  }
  return out;
}

OperationalModelHandle build_operational(const Instance& inst, int p,
                                         const std::vector<int>& x_flat,
                                         const OperationalOptions& opts) {
  return build_operational(inst, p, std::vector<double>(x_flat.begin(), x_flat.end()), opts);
}

OperationalModelHandle build_operational(const Instance& inst, int p,
                                         const std::vector<double>& x_flat,
                                         const OperationalOptions& opts) {
  std::vector<int> routes(inst.num_routes());
  std::iota(routes.begin(), routes.end(), 0);
  return build_operational_routes(inst, p, routes, x_flat, opts);
}

OperationalModelHandle build_operational_routes(const Instance& inst, int p,
                                                const std::vector<int>& routes,
                                                const std::vector<int>& x_flat,
                                                const OperationalOptions& opts) {
  return build_operational_routes(inst, p, routes,
                                  std::vector<double>(x_flat.begin(), x_flat.end()), opts);
}

OperationalModelHandle build_operational_routes(const Instance& inst, int p,
                                                const std::vector<int>& routes,
                                                const std::vector<double>& x_flat,
                                                const OperationalOptions& opts) {
  OperationalModelHandle h;
  EmitConfig cfg;
  cfg.x_flat = &x_flat;
  cfg.per_route_linking = routes.size() == 1 && routes.size() < static_cast<size_t>(inst.num_routes());
  emit_operational(inst, p, routes, opts, cfg, h.model, h);
  return h;
}

void emit_operational_block(const Instance& inst, int p, const std::vector<int>& routes,
                            const OperationalOptions& opts, milp::Model& model,
                            const std::vector<double>* x_flat, const std::vector<int>* x_vars,
                            bool per_route_linking, OperationalModelHandle& h) {
  EmitConfig cfg;
  cfg.x_flat = x_flat;
  cfg.x_vars = x_vars;
  cfg.per_route_linking = per_route_linking;
  emit_operational(inst, p, routes, opts, cfg, model, h);
}

OperationalValue solve_operational(const Instance& inst, int p, const std::vector<int>& x_flat,
                                   const milp::SolveLimits& limits, const OperationalOptions& opts) {
  OperationalModelHandle h = build_operational(inst, p, x_flat, opts);
  milp::SolveLimits lim = limits;
  lim.rel_gap = 0.0;  // the value function is consumed exactly
  milp::SolveOutcome res = opts.integrality ? milp::solve_mip(h.model, lim)
                                            : milp::solve_lp(h.model, lim);
  OperationalValue out;
  out.status = res.status;
  if (res.feasible()) {
    out.feasible = true;
    out.value = res.obj;
    out.lower_bound = res.lb;
    out.proven = res.status == milp::SolveStatus::Optimal;
    out.primal = std::move(res.x);
  } else if (res.status == milp::SolveStatus::TimeLimit) {
    out.lower_bound = res.lb;
  }
  return out;
}

OperationalValue solve_single_route(const Instance& inst, int p, int r,
                                    const std::vector<int>& x_flat, bool integrality,
                                    const milp::SolveLimits& limits) {
  OperationalOptions opts;
  opts.integrality = integrality;
  OperationalModelHandle h = build_operational_routes(inst, p, {r}, x_flat, opts);
  milp::SolveLimits lim = limits;
  lim.rel_gap = 0.0;
  milp::SolveOutcome res =
      integrality ? milp::solve_mip(h.model, lim) : milp::solve_lp(h.model, lim);
  OperationalValue out;
  out.status = res.status;
  if (res.feasible()) {
    out.feasible = true;
    out.value = res.obj;
    out.lower_bound = res.lb;
    out.proven = res.status == milp::SolveStatus::Optimal;
    out.primal = std::move(res.x);
  } else if (res.status == milp::SolveStatus::TimeLimit) {
    out.lower_bound = res.lb;
  }
  return out;
}

namespace {

// Shared scaffold of the charging-relaxed single-route problems: route-r
// schedule variables plus (eta_depot, eta_onroute, eta_conventional) as
// decisions, with the capacity rows dropped and the m-cap applied.
struct RouteRelaxed {
  OperationalModelHandle handle;
  std::vector<int> eta_depot_var;  // [bus pos] model var
  int eta_onroute_var = -1;
  int eta_conv_var = -1;
};

RouteRelaxed build_route_relaxed(const Instance& inst, int p, int r, int m,
                                 const std::vector<int>& bus_subset, MinFleetCapVariant variant) {
  RouteRelaxed out;
  OperationalOptions opts;
  opts.charger_rows = false;
  opts.bus_subset = bus_subset;

  std::vector<int> x_vars(strategic_dim(inst), -1);
  Model& model = out.handle.model;
  const int cap = total_demand(inst, p, r);
  std::vector<int> bts = bus_subset;
  if (bts.empty()) {
    bts.resize(inst.num_bus_types());
    std::iota(bts.begin(), bts.end(), 0);
  }
  for (int b : bts) {
    const int v = model.add_var(VarKind::Integer, 0.0, cap, 0.0);
    x_vars[comp_eta_depot(inst, r, b)] = v;
    out.eta_depot_var.push_back(v);
  }
  out.eta_onroute_var = model.add_var(VarKind::Integer, 0.0, m, 0.0);
  out.eta_conv_var = model.add_var(VarKind::Integer, 0.0, m, 0.0);
  x_vars[comp_eta_onroute(inst, r)] = out.eta_onroute_var;
  x_vars[comp_eta_conventional(inst, r)] = out.eta_conv_var;

  EmitConfig cfg;
  cfg.x_vars = &x_vars;
  emit_operational(inst, p, {r}, opts, cfg, out.handle.model, out.handle);

  std::vector<std::pair<int, double>> cap_terms = {{out.eta_conv_var, 1.0}};
  if (variant == MinFleetCapVariant::ConventionalPlusOnroute) {
    cap_terms.push_back({out.eta_onroute_var, 1.0});
  } else {
    for (int v : out.eta_depot_var) cap_terms.push_back({v, 1.0});
  }
  model.add_row(std::move(cap_terms), RowSense::LE, static_cast<double>(m));
  return out;
}

}  // namespace

int min_depot_fleet(const Instance& inst, int p, int r, int m,
                    const std::vector<int>& bus_types_subset, MinFleetCapVariant variant) {
  if (m < 0) throw std::invalid_argument("min_depot_fleet: m must be nonnegative");
  RouteRelaxed rr = build_route_relaxed(inst, p, r, m, bus_types_subset, variant);
  // Pure fleet-count objective: schedule costs do not participate.
  for (auto& v : rr.handle.model.vars) v.obj = 0.0;
  for (int v : rr.eta_depot_var) rr.handle.model.vars[v].obj = 1.0;
  milp::SolveLimits lim;
  lim.rel_gap = 0.0;
  milp::SolveOutcome res = milp::solve_mip(rr.handle.model, lim);
  if (!res.feasible()) return kMinFleetInfeasible;
  return static_cast<int>(std::llround(res.obj));
}

SweepResult solve_route_sweep(const Instance& inst, int p, int r, int b, int m, int fleet_b,
                              MinFleetCapVariant variant, const milp::SolveLimits& limits) {
  SweepResult out;
  RouteRelaxed rr = build_route_relaxed(inst, p, r, m, {b}, variant);
  rr.handle.model.vars[rr.eta_depot_var[0]].lo = fleet_b;
  rr.handle.model.vars[rr.eta_depot_var[0]].hi = fleet_b;
  milp::SolveLimits lim = limits;
  lim.rel_gap = 0.0;
  milp::SolveOutcome res = milp::solve_mip(rr.handle.model, lim);
  if (res.feasible()) {
    out.feasible = true;
    out.value = res.obj;
    out.primal = std::move(res.x);
  }
  out.handle = std::move(rr.handle);
  return out;
}

}  // namespace bfep
