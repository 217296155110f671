#include "bfep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bfep/heuristics.hpp"
#include "bfep/operational.hpp"
#include "bfep/soc_graph.hpp"
#include "bfep/milp/solver.hpp"
#include "bfep/strategic.hpp"

namespace bfep {

using nlohmann::json;

namespace {

// Charger occupancy per (depot, charger type, interval) implied by a route
// schedule's charge launches.
void accumulate_occupancy(const Instance& inst, int r,
                          const OperationalSchedule::RouteSchedule& sched,
                          std::vector<std::vector<std::vector<long>>>& occ) {
  const int T = inst.intervals;
  for (int b = 0; b < inst.num_bus_types(); ++b) {
    const int sb = inst.bus_types[b].battery;
    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        for (int t = 0; t < T; ++t)
          for (int s = 0; s < sb; ++s) {
            const int flow = sched.charge[b][i][k][t][s];
            if (flow == 0) continue;
            const int kap = inst.kappa_at(r, b, i, k, s);
            for (int l = 0; l < kap; ++l) occ[i][k][(t + l) % T] += flow;
          }
  }
}

bool stationary_demand(const Instance& inst) {
  for (const Route& r : inst.routes)
    for (int p = 1; p < inst.periods; ++p)
      if (r.demand[p] != r.demand[0]) return false;
  return true;
}

bool retirement_last_only(const Instance& inst) {
  long total_conv = 0;
  for (int r = 0; r < inst.num_routes(); ++r)
    total_conv += inst.initial_state.eta_conventional[r];
  for (int p = 0; p + 1 < inst.periods; ++p)
    if (inst.retirement_caps[p] < total_conv) return false;
  return true;
}

// O(x) = H(x) + Q(x) solved fresh; kMoneyInfinity when x cannot operate.
Money operating_cost_of_state(const Instance& inst, int p, const StrategicState& x) {
  OperationalValue q = solve_operational(inst, p, flatten_state(inst, x));
  if (!q.feasible) return kMoneyInfinity;
  return maintenance_cost_cents(inst, x) + money_from_dollars(q.value);
}

}  // namespace

std::vector<Violation> verify_solution(const Instance& inst, const PlanSolution& plan) {
  std::vector<Violation> out;
  auto flag = [&](std::string code, std::string path) {
    out.push_back({std::move(code), std::move(path), ""});
  };
  const int P = inst.periods, T = inst.intervals;
  if (static_cast<int>(plan.states.size()) != P || static_cast<int>(plan.schedule.periods.size()) != P) {
    flag("bad_shape", "plan");
    return out;
  }

  for (int p = 0; p < P; ++p) {
    const StrategicState& cur = plan.states[p];
    const StrategicState& prev = p == 0 ? inst.initial_state : plan.states[p - 1];
    const std::string base = "period[" + std::to_string(p) + "]";

    // Nonnegativity and monotonicity of the investment trajectory.
    for (int i = 0; i < inst.num_depots(); ++i) {
      int tot = 0;
      for (int k = 0; k < inst.num_charger_types(); ++k) {
        if (cur.chi_depot[i][k] < 0) flag("negative_count", base + ".chi_depot");
        if (cur.chi_depot[i][k] < prev.chi_depot[i][k])
          flag("charger_monotonicity", base + ".chi_depot[" + inst.depots[i].id + "]");
        tot += cur.chi_depot[i][k];
      }
      if (tot > inst.depots[i].host_cap)
        flag("hosting_cap", base + ".chi_depot[" + inst.depots[i].id + "]");
    }
    for (int j = 0; j < inst.num_terminals(); ++j) {
      if (cur.chi_terminal[j] < 0) flag("negative_count", base + ".chi_terminal");
      if (cur.chi_terminal[j] < prev.chi_terminal[j])
        flag("charger_monotonicity", base + ".chi_terminal[" + inst.terminals[j].id + "]");
      if (cur.chi_terminal[j] > inst.terminals[j].host_cap)
        flag("hosting_cap", base + ".chi_terminal[" + inst.terminals[j].id + "]");
    }
    for (int b = 0; b < inst.num_bus_types(); ++b) {
      long tot = 0, tot_prev = 0;
      for (int r = 0; r < inst.num_routes(); ++r) {
        if (cur.eta_depot[r][b] < 0) flag("negative_count", base + ".eta_depot");
        tot += cur.eta_depot[r][b];
        tot_prev += prev.eta_depot[r][b];
      }
      if (tot < tot_prev) flag("fleet_monotonicity", base + ".eta_depot[" + inst.bus_types[b].id + "]");
    }
    {
      long tot = 0, tot_prev = 0, conv = 0, conv_prev = 0;
      for (int r = 0; r < inst.num_routes(); ++r) {
        if (cur.eta_onroute[r] < 0) flag("negative_count", base + ".eta_onroute");
        if (cur.eta_conventional[r] < 0) flag("negative_count", base + ".eta_conventional");
        tot += cur.eta_onroute[r];
        tot_prev += prev.eta_onroute[r];
        conv += cur.eta_conventional[r];
        conv_prev += prev.eta_conventional[r];
      }
      if (tot < tot_prev) flag("fleet_monotonicity", base + ".eta_onroute");
      if (conv > conv_prev) flag("conventional_increase", base + ".eta_conventional");
      if (conv > inst.retirement_caps[p]) flag("retirement_cap", base + ".eta_conventional");
    }
  }

  // Budgets on the acquisition costs.
  {
    Money pooled = 0;
    for (int p = 0; p < P; ++p) {
      const Money ip = investment_cost_cents(inst, p == 0 ? inst.initial_state : plan.states[p - 1],
                                             plan.states[p]);
      pooled += ip;
      if (!inst.shared_budget && ip > inst.budgets[p])
        flag("budget", "period[" + std::to_string(p) + "].investment");
    }
    if (inst.shared_budget) {
      Money cap = 0;
      for (Money b : inst.budgets) cap += b;
      if (pooled > cap) flag("budget", "shared_budget");
    }
  }

  // Daily schedules: every scheduling constraint family on integers.
  for (int p = 0; p < P; ++p) {
    const auto& period = plan.schedule.periods[p];
    const std::string base = "period[" + std::to_string(p) + "]";
    if (static_cast<int>(period.size()) != inst.num_routes()) {
      flag("bad_shape", base);
      continue;
    }
    std::vector<std::vector<std::vector<long>>> occ(
        inst.num_depots(),
        std::vector<std::vector<long>>(inst.num_charger_types(), std::vector<long>(T, 0)));
    std::vector<std::vector<long>> term_use(inst.num_terminals(), std::vector<long>(T, 0));

    for (int r = 0; r < inst.num_routes(); ++r) {
      const auto& sched = period[r];
      const std::string rb = base + ".route[" + inst.routes[r].id + "]";
      accumulate_occupancy(inst, r, sched, occ);

      for (int t = 0; t < T; ++t) {
        long service = sched.conventional[t];
        if (sched.conventional[t] < 0) flag("negative_flow", rb);
        if (sched.conventional[t] > plan.states[p].eta_conventional[r])
          flag("fleet_cap_conventional", rb + ".t" + std::to_string(t));
        long onroute_t = 0;
        for (size_t lj = 0; lj < inst.routes[r].terminals.size(); ++lj) {
          const int w = sched.onroute[t][lj];
          if (w < 0) flag("negative_flow", rb);
          onroute_t += w;
          term_use[inst.routes[r].terminals[lj]][t] += w;
        }
        if (onroute_t > plan.states[p].eta_onroute[r])
          flag("fleet_cap_onroute", rb + ".t" + std::to_string(t));
        service += onroute_t;
        for (int b = 0; b < inst.num_bus_types(); ++b)
          for (int s = 1; s <= inst.bus_types[b].battery; ++s)
            service += sched.service[b][t][s - 1];
        if (service < inst.routes[r].demand[p][t])
          flag("service_level", rb + ".t" + std::to_string(t));
      }

      for (int b = 0; b < inst.num_bus_types(); ++b) {
        const int sb = inst.bus_types[b].battery;
        // Node balance on the state-of-charge graph.
        for (int t = 0; t < T; ++t)
          for (int s = 0; s <= sb; ++s) {
            long out_flow = 0, in_flow = 0;
            if (s >= 1) out_flow += sched.service[b][t][s - 1];
            out_flow += sched.idle[b][t][s];
            in_flow += sched.idle[b][(t + T - 1) % T][s];
            if (s + 1 <= sb) in_flow += sched.service[b][(t + T - 1) % T][s];
            for (int i = 0; i < inst.num_depots(); ++i)
              for (int k = 0; k < inst.num_charger_types(); ++k) {
                if (s < sb) out_flow += sched.charge[b][i][k][t][s];
                if (s == sb)
                  for (int s2 = 0; s2 < sb; ++s2) {
                    const int kap = inst.kappa_at(r, b, i, k, s2);
                    in_flow += sched.charge[b][i][k][(t + T - kap % T) % T][s2];
                  }
              }
            if (out_flow != in_flow)
              flag("flow_conservation", rb + ".bus[" + inst.bus_types[b].id + "].node(" +
                                            std::to_string(t) + "," + std::to_string(s) + ")");
            if (sched.idle[b][t][s] < 0 || (s >= 1 && sched.service[b][t][s - 1] < 0))
              flag("negative_flow", rb);
          }
        // Fleet count across the day boundary.
        long crossing = 0;
        for (int s = 1; s <= sb; ++s) crossing += sched.service[b][0][s - 1];
        for (int s = 0; s <= sb; ++s) crossing += sched.idle[b][0][s];
        for (int i = 0; i < inst.num_depots(); ++i)
          for (int k = 0; k < inst.num_charger_types(); ++k)
            for (int t = 0; t < T; ++t)
              for (int s = 0; s < sb; ++s) {
                const int flow = sched.charge[b][i][k][t][s];
                if (flow == 0) continue;
                const int kap = inst.kappa_at(r, b, i, k, s);
                for (int l = 0; l < kap; ++l)
                  if ((t + l) % T == 0) crossing += flow;
              }
        if (crossing > plan.states[p].eta_depot[r][b])
          flag("fleet_cap_depot", rb + ".bus[" + inst.bus_types[b].id + "]");
      }
    }

    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        for (int t = 0; t < T; ++t)
          if (occ[i][k][t] > plan.states[p].chi_depot[i][k])
            flag("charger_capacity", base + ".depot[" + inst.depots[i].id + "].t" + std::to_string(t));
    for (int j = 0; j < inst.num_terminals(); ++j)
      for (int t = 0; t < T; ++t)
        if (term_use[j][t] > static_cast<long>(inst.rho) * plan.states[p].chi_terminal[j])
          flag("terminal_capacity", base + ".terminal[" + inst.terminals[j].id + "].t" + std::to_string(t));
  }
  return out;
}

CostBreakdown cost_breakdown(const Instance& inst, const PlanSolution& plan) {
  const auto violations = verify_solution(inst, plan);
  if (!violations.empty())
    throw std::invalid_argument("cost_breakdown: infeasible plan (" + violations.front().code +
                                " at " + violations.front().path + ")");
  CostBreakdown bd;
  bd.initial_opex = operating_cost_of_state(inst, 0, inst.initial_state);

  Money prev_opex = bd.initial_opex;
  for (int p = 0; p < inst.periods; ++p) {
    CostBreakdown::PeriodRow row;
    row.invest = investment_cost_cents(inst, p == 0 ? inst.initial_state : plan.states[p - 1],
                                       plan.states[p]);
    row.maintenance = maintenance_cost_cents(inst, plan.states[p]);
    row.schedule = schedule_cost(inst, p, plan.schedule);
    row.opex = row.maintenance + row.schedule;
    if (row.invest > 0 && prev_opex != kMoneyInfinity) {
      row.roi = money_to_dollars(prev_opex - row.opex) / money_to_dollars(row.invest);
      row.roi_raw = -*row.roi;
    }
    bd.discounted_total +=
        std::pow(inst.gamma, p) * (money_to_dollars(row.invest) + money_to_dollars(row.opex));
    prev_opex = row.opex;
    bd.periods.push_back(row);
  }
  return bd;
}

MonotoneOpexReport check_monotone_opex(const Instance& inst, const PlanSolution& plan,
                                       double tol) {
  MonotoneOpexReport rep;
  if (!stationary_demand(inst)) {
    rep.note = "demand varies across periods";
    return rep;
  }
  if (!retirement_last_only(inst)) {
    rep.note = "retirement caps bind before the final period";
    return rep;
  }
  // Chain O(x_0) >= O(x_1) >= ... >= O(x_{P-1}); the final state is excluded
  // since its retirements are forced rather than chosen.
  Money prev = operating_cost_of_state(inst, 0, inst.initial_state);
  for (int p = 0; p + 1 < inst.periods; ++p) {
    const Money cur =
        maintenance_cost_cents(inst, plan.states[p]) + schedule_cost(inst, p, plan.schedule);
    if (prev != kMoneyInfinity &&
        money_to_dollars(cur) > money_to_dollars(prev) + tol * (1.0 + money_to_dollars(prev))) {
      rep.status = MonotoneOpexReport::Status::Violated;
      rep.violating_period = p;
      rep.note = "operating cost rises entering period " + std::to_string(p);
      return rep;
    }
    prev = cur;
  }
  rep.status = MonotoneOpexReport::Status::Ok;
  return rep;
}

ThreePhaseReport check_three_phase(const Instance& inst, const PlanSolution& plan) {
  ThreePhaseReport rep;
  if (!stationary_demand(inst) || !retirement_last_only(inst)) {
    rep.note = "requires stationary demand and last-period-only retirement";
    return rep;
  }
  rep.applicable = true;
  if (inst.periods == 1) {
    rep.note = "single period: trivially one phase";
    return rep;
  }
  const CostBreakdown bd = cost_breakdown(inst, plan);
  for (const auto& row : bd.periods) rep.roi.push_back(row.roi);

  // Maximal zero-investment window.
  int best_len = 0;
  for (int a = 0; a < inst.periods; ++a) {
    if (bd.periods[a].invest != 0) continue;
    int b = a;
    while (b < inst.periods && bd.periods[b].invest == 0) ++b;
    if (b - a > best_len) {
      best_len = b - a;
      rep.idle_begin = a;
      rep.idle_end = b;
    }
  }

  const double threshold = 1.0 - inst.gamma;
  if (threshold <= 1e-12) {
    rep.threshold_degenerate = true;
    rep.note = "gamma = 1: investment timing is cost-neutral";
    return rep;
  }
  if (rep.idle_begin > 0 && bd.periods[rep.idle_begin - 1].roi)
    rep.last_early_roi_ok = *bd.periods[rep.idle_begin - 1].roi >= threshold - 1e-9;
  if (rep.idle_end >= 0 && rep.idle_end < inst.periods && bd.periods[rep.idle_end].roi)
    rep.first_late_roi_ok = *bd.periods[rep.idle_end].roi <= threshold + 1e-9;
  if (!rep.last_early_roi_ok || !rep.first_late_roi_ok)
    rep.note = "threshold mismatch: solution may be an alternate optimum";
  return rep;
}

SolveResult solve_two_period_reformulation(const Instance& inst, const PreprocessReport& pre,
                                           const milp::SolveLimits& limits) {
  (void)pre;
  // Collapse the idle middle: optimize (x_1, x_P) only, with x_1 held through
  // periods 1..P-1.
  Instance two = inst;
  two.periods = 2;
  two.shared_budget = true;
  Money pooled = 0;
  for (Money b : inst.budgets) pooled += b;
  two.budgets = {pooled, 0};
  long total_conv = 0;
  for (int r = 0; r < inst.num_routes(); ++r)
    total_conv += inst.initial_state.eta_conventional[r];
  two.retirement_caps = {std::max<int>(inst.retirement_caps[inst.periods - 1],
                                       static_cast<int>(total_conv)),
                         inst.retirement_caps[inst.periods - 1]};
  for (Route& r : two.routes) r.demand = {r.demand[0], r.demand[0]};

  StrategicWeights w;
  double mid = 0.0;
  for (int p = 0; p + 1 < inst.periods; ++p) mid += std::pow(inst.gamma, p);
  const double last = std::pow(inst.gamma, inst.periods - 1);
  w.invest = {1.0, last};
  w.maint = {mid, last};
  w.opex = {mid, last};

  const PreprocessReport two_pre = empty_preprocessing(two);
  ExtensiveOptions eo;
  eo.weights = w;
  ExtensiveModel ext = build_extensive(two, two_pre, eo);
  milp::SolveLimits lim = limits;
  lim.rel_gap = std::min(limits.rel_gap, 1e-9);
  milp::SolveOutcome out = milp::solve_mip(ext.model, lim);
  SolveResult res;
  res.status = out.status;
  res.lower_bound = out.lb;
  res.upper_bound = out.ub;
  if (out.feasible()) res.plan = extract_plan(two, ext, out.x);
  return res;
}

std::string ThreePhaseReport::to_json() const {
  json doc;
  doc["applicable"] = applicable;
  doc["note"] = note;
  doc["idle_begin"] = idle_begin;
  doc["idle_end"] = idle_end;
  doc["threshold_degenerate"] = threshold_degenerate;
  doc["last_early_roi_ok"] = last_early_roi_ok;
  doc["first_late_roi_ok"] = first_late_roi_ok;
  doc["roi"] = json::array();
  for (const auto& r : roi) doc["roi"].push_back(r ? json(*r) : json());
  return doc.dump(2);
}

std::string CostBreakdown::to_json() const {
  json doc;
  doc["initial_opex"] =
      initial_opex == kMoneyInfinity ? json() : json(money_to_dollars(initial_opex));
  doc["discounted_total"] = discounted_total;
  doc["periods"] = json::array();
  for (const auto& row : periods) {
    json jr = {{"invest", money_to_dollars(row.invest)},
               {"maintenance", money_to_dollars(row.maintenance)},
               {"schedule", money_to_dollars(row.schedule)},
               {"opex", money_to_dollars(row.opex)},
               {"roi_raw", row.roi_raw}};
    jr["roi"] = row.roi ? json(*row.roi) : json();
    doc["periods"].push_back(std::move(jr));
  }
  return doc.dump(2);
}

std::string CostBreakdown::service_csv(const Instance& inst, const PlanSolution& plan) {
  std::ostringstream out;
  out << "period,t,depot_beb,onroute_beb,conventional\n";
  for (int p = 0; p < inst.periods; ++p)
    for (int t = 0; t < inst.intervals; ++t) {
      long depot = 0, onroute = 0, conv = 0;
      for (int r = 0; r < inst.num_routes(); ++r) {
        const auto& sched = plan.schedule.periods[p][r];
        for (int b = 0; b < inst.num_bus_types(); ++b)
          for (int s = 1; s <= inst.bus_types[b].battery; ++s)
            depot += sched.service[b][t][s - 1];
        for (int w : sched.onroute[t]) onroute += w;
        conv += sched.conventional[t];
      }
      out << p << ',' << t << ',' << depot << ',' << onroute << ',' << conv << '\n';
    }
  return out.str();
}

std::string CostBreakdown::chargers_csv(const Instance& inst, const PlanSolution& plan) {
  std::ostringstream out;
  out << "period,location,kind,count\n";
  for (int p = 0; p < inst.periods; ++p) {
    for (int i = 0; i < inst.num_depots(); ++i) {
      long tot = 0;
      for (int k = 0; k < inst.num_charger_types(); ++k) tot += plan.states[p].chi_depot[i][k];
      out << p << ',' << inst.depots[i].id << ",depot," << tot << '\n';
    }
    for (int j = 0; j < inst.num_terminals(); ++j)
      out << p << ',' << inst.terminals[j].id << ",terminal," << plan.states[p].chi_terminal[j]
          << '\n';
  }
  return out.str();
}

std::string plan_to_json(const Instance& inst, const PlanSolution& plan, double lb, double ub,
                         const std::string& status) {
  json doc;
  doc["status"] = status;
  doc["lower_bound"] = lb;
  doc["upper_bound"] = ub;
  doc["states"] = json::array();
  for (const StrategicState& x : plan.states) {
    json js;
    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        js["chi_depot"][inst.depots[i].id][inst.charger_types[k].id] = x.chi_depot[i][k];
    for (int j = 0; j < inst.num_terminals(); ++j)
      js["chi_terminal"][inst.terminals[j].id] = x.chi_terminal[j];
    for (int r = 0; r < inst.num_routes(); ++r) {
      for (int b = 0; b < inst.num_bus_types(); ++b)
        js["eta_depot"][inst.routes[r].id][inst.bus_types[b].id] = x.eta_depot[r][b];
      js["eta_onroute"][inst.routes[r].id] = x.eta_onroute[r];
      js["eta_conventional"][inst.routes[r].id] = x.eta_conventional[r];
    }
    doc["states"].push_back(std::move(js));
  }
  doc["schedules"] = json::array();
  for (int p = 0; p < inst.periods; ++p) {
    json jp = json::array();
    for (int r = 0; r < inst.num_routes(); ++r) {
      const auto& sched = plan.schedule.periods[p][r];
      json jr;
      jr["service"] = sched.service;
      jr["idle"] = sched.idle;
      jr["charge"] = sched.charge;
      jr["onroute"] = sched.onroute;
      jr["conventional"] = sched.conventional;
      jp.push_back(std::move(jr));
    }
    doc["schedules"].push_back(std::move(jp));
  }
  return doc.dump();
}

PlanSolution plan_from_json(const Instance& inst, const std::string& bytes) {
  const json doc = json::parse(bytes);
  PlanSolution plan;
  for (const json& js : doc.at("states")) {
    StrategicState x = zero_state(inst);
    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        x.chi_depot[i][k] = js.at("chi_depot").at(inst.depots[i].id).at(inst.charger_types[k].id);
    for (int j = 0; j < inst.num_terminals(); ++j)
      x.chi_terminal[j] = js.at("chi_terminal").at(inst.terminals[j].id);
    for (int r = 0; r < inst.num_routes(); ++r) {
      for (int b = 0; b < inst.num_bus_types(); ++b)
        x.eta_depot[r][b] = js.at("eta_depot").at(inst.routes[r].id).at(inst.bus_types[b].id);
      x.eta_onroute[r] = js.at("eta_onroute").at(inst.routes[r].id);
      x.eta_conventional[r] = js.at("eta_conventional").at(inst.routes[r].id);
    }
    plan.states.push_back(std::move(x));
  }
  for (const json& jp : doc.at("schedules")) {
    std::vector<OperationalSchedule::RouteSchedule> period;
    for (const json& jr : jp) {
      OperationalSchedule::RouteSchedule sched;
      sched.service = jr.at("service").get<decltype(sched.service)>();
      sched.idle = jr.at("idle").get<decltype(sched.idle)>();
      sched.charge = jr.at("charge").get<decltype(sched.charge)>();
      sched.onroute = jr.at("onroute").get<decltype(sched.onroute)>();
      sched.conventional = jr.at("conventional").get<decltype(sched.conventional)>();
      period.push_back(std::move(sched));
    }
    plan.schedule.periods.push_back(std::move(period));
  }
  return plan;
}

}  // namespace bfep
