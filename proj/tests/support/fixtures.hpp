#pragma once

// Shared fixtures: the six-interval single-route worked example and a few
// hand-sized instances used across suites.

#include <stdexcept>
#include <vector>

#include "bfep/instance.hpp"
#include "bfep/soc_graph.hpp"

namespace bfep::test {

struct Ec3Costs {
  Money service = 100;  // cents per service interval
  Money idle = 0;
  Money charge = 0;
  Money conventional = 500;
};

// T=6, one route, one depot, one charger type, battery 3, kappa=(2,2,1),
// demand (2,3,2,1,1,1); the initial state holds 2 chargers and 3 buses.
inline Instance make_ec3_instance(const Ec3Costs& costs = {}, int periods = 1) {
  Instance inst;
  inst.periods = periods;
  inst.intervals = 6;
  inst.gamma = 1.0;
  inst.rho = 8;
  inst.service_days = 1;
  inst.depots = {{"d0", 5}};
  inst.bus_types = {{"b0", 3, money_from_dollars(943000)}};
  inst.charger_types = {{"k0", money_from_dollars(60050)}};
  Route route;
  route.id = "r0";
  route.demand.assign(periods, {2, 3, 2, 1, 1, 1});
  route.travel = {0};
  inst.routes.push_back(route);
  inst.costs.service = {costs.service};
  inst.costs.idle = {costs.idle};
  inst.costs.onroute_service = 0;
  inst.costs.conventional_service = costs.conventional;
  inst.costs.conventional_maintenance = 0;
  inst.costs.onroute_bus_price = money_from_dollars(1093000);
  inst.costs.onroute_charger_price = money_from_dollars(877590);
  inst.kappa = {{{{{2, 2, 1}}}}};
  inst.charge_cost = {{{{{costs.charge, costs.charge, costs.charge}}}}};
  inst.budgets.assign(periods, money_from_dollars(1e9));
  inst.retirement_caps.assign(periods, 0);
  inst.initial_state = zero_state(inst);
  inst.initial_state.chi_depot[0][0] = 2;
  inst.initial_state.eta_depot[0][0] = 3;
  return inst;
}

// The published two-cycle circulation: unit flows on 10 service, 1 idle and
// 4 charge arcs.
inline std::vector<long long> ec3_circulation_flows(const SocGraph& g) {
  const std::vector<std::pair<int, int>> service = {{1, 3}, {2, 2}, {3, 1}, {0, 3}, {1, 2},
                                                    {2, 1}, {5, 3}, {0, 2}, {1, 1}, {4, 3}};
  const std::vector<std::pair<int, int>> idle = {{0, 3}};
  const std::vector<std::pair<int, int>> charge = {{4, 0}, {2, 0}, {3, 0}, {5, 2}};
  std::vector<long long> flows(g.arcs().size(), 0);
  auto mark = [&](ArcKind kind, const std::vector<std::pair<int, int>>& nodes) {
    for (auto [t, s] : nodes) {
      bool found = false;
      for (size_t a = 0; a < g.arcs().size(); ++a) {
        const SocArc& arc = g.arcs()[a];
        if (arc.kind == kind && arc.tail_t == t && arc.tail_s == s) {
          flows[a] += 1;
          found = true;
          break;
        }
      }
      if (!found) throw std::logic_error("fixture arc not found");
    }
  };
  mark(ArcKind::Service, service);
  mark(ArcKind::Idle, idle);
  mark(ArcKind::Charge, charge);
  return flows;
}

inline OperationalSchedule ec3_schedule(const Instance& inst, int periods = 1) {
  const SocGraph g = build_soc_graph(inst, 0, 0, 0);
  const std::vector<long long> flows = ec3_circulation_flows(g);
  OperationalSchedule sched;
  for (int p = 0; p < periods; ++p) {
    OperationalSchedule::RouteSchedule rs;
    rs.service.assign(1, std::vector<std::vector<int>>(6, std::vector<int>(3, 0)));
    rs.idle.assign(1, std::vector<std::vector<int>>(6, std::vector<int>(4, 0)));
    rs.charge.assign(
        1, std::vector<std::vector<std::vector<std::vector<int>>>>(
               1, std::vector<std::vector<std::vector<int>>>(
                      1, std::vector<std::vector<int>>(6, std::vector<int>(3, 0)))));
    rs.onroute.assign(6, {});
    rs.conventional.assign(6, 0);
    for (size_t a = 0; a < g.arcs().size(); ++a) {
      if (flows[a] == 0) continue;
      const SocArc& arc = g.arcs()[a];
      switch (arc.kind) {
        case ArcKind::Service: rs.service[0][arc.tail_t][arc.tail_s - 1] += flows[a]; break;
        case ArcKind::Idle: rs.idle[0][arc.tail_t][arc.tail_s] += flows[a]; break;
        case ArcKind::Charge: rs.charge[0][0][0][arc.tail_t][arc.tail_s] += flows[a]; break;
      }
    }
    sched.periods.push_back({rs});
  }
  return sched;
}

}  // namespace bfep::test
