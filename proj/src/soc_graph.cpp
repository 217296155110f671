#include "bfep/soc_graph.hpp"

#include <sstream>
#include <stdexcept>
#include <tuple>

namespace bfep {

SocGraph build_soc_graph(const Instance& inst, int p, int r, int b) {
  (void)p;  // arc costs are period-invariant in the current cost model
  const int T = inst.intervals;
  const int sb = inst.bus_types[b].battery;
  SocGraph g(T, sb);

  for (int t = 0; t < T; ++t)
    for (int s = 1; s <= sb; ++s)
      g.add_arc({ArcKind::Service, t, s, (t + 1) % T, s - 1, -1, -1, 0, inst.costs.service[b]});
  for (int t = 0; t < T; ++t)
    for (int s = 0; s <= sb; ++s)
      g.add_arc({ArcKind::Idle, t, s, (t + 1) % T, s, -1, -1, 0, inst.costs.idle[b]});
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < inst.num_depots(); ++i)
      for (int k = 0; k < inst.num_charger_types(); ++k)
        for (int s = 0; s < sb; ++s) {
          const int kap = inst.kappa_at(r, b, i, k, s);
          g.add_arc({ArcKind::Charge, t, s, (t + kap) % T, sb, i, k, kap,
                     inst.charge_cost_at(r, b, i, k, s)});
        }
  return g;
}

std::vector<int> charger_footprint(const SocArc& arc, int intervals) {
  if (arc.kind != ArcKind::Charge)
    throw std::invalid_argument("charger_footprint: not a charge arc");
  std::vector<int> out;
  out.reserve(arc.kappa);
  for (int l = 0; l < arc.kappa; ++l) out.push_back((arc.tail_t + l) % intervals);
  return out;
}

CirculationCheck circulation_check(const SocGraph& graph, const std::vector<long long>& flows) {
  if (flows.size() != graph.arcs().size())
    throw std::invalid_argument("circulation_check: flow vector does not match arc count");
  std::vector<long long> balance(graph.num_nodes(), 0);  // outflow - inflow
  for (size_t a = 0; a < flows.size(); ++a) {
    if (flows[a] < 0) throw std::invalid_argument("circulation_check: negative flow");
    if (flows[a] == 0) continue;
    const SocArc& arc = graph.arcs()[a];
    balance[graph.node_index(arc.tail_t, arc.tail_s)] += flows[a];
    balance[graph.node_index(arc.head_t, arc.head_s)] -= flows[a];
  }
  CirculationCheck res;
  for (int t = 0; t < graph.intervals(); ++t)
    for (int s = 0; s <= graph.battery(); ++s) {
      const long long bal = balance[graph.node_index(t, s)];
      if (bal != 0) {
        res.ok = false;
        res.violated.emplace_back(t, s, bal);
      }
    }
  return res;
}

Money schedule_cost(const Instance& inst, int p, const OperationalSchedule& schedule) {
  if (p < 0 || p >= static_cast<int>(schedule.periods.size()))
    throw std::invalid_argument("schedule_cost: period out of range");
  const auto& routes = schedule.periods[p];
  if (static_cast<int>(routes.size()) != inst.num_routes())
    throw std::invalid_argument("schedule_cost: route count mismatch");

  const int T = inst.intervals;
  Money total = 0;
  for (int r = 0; r < inst.num_routes(); ++r) {
    const auto& sched = routes[r];
    if (static_cast<int>(sched.service.size()) != inst.num_bus_types() ||
        static_cast<int>(sched.idle.size()) != inst.num_bus_types() ||
        static_cast<int>(sched.charge.size()) != inst.num_bus_types())
      throw std::invalid_argument("schedule_cost: bus-type dimension mismatch");
    for (int b = 0; b < inst.num_bus_types(); ++b) {
      const int sb = inst.bus_types[b].battery;
      if (static_cast<int>(sched.service[b].size()) != T)
        throw std::invalid_argument("schedule_cost: service dimension mismatch");
      for (int t = 0; t < T; ++t) {
        if (static_cast<int>(sched.service[b][t].size()) != sb ||
            static_cast<int>(sched.idle[b][t].size()) != sb + 1)
          throw std::invalid_argument("schedule_cost: state dimension mismatch");
        for (int s = 0; s < sb; ++s) total += inst.costs.service[b] * sched.service[b][t][s];
        for (int s = 0; s <= sb; ++s) total += inst.costs.idle[b] * sched.idle[b][t][s];
      }
      for (int i = 0; i < inst.num_depots(); ++i)
        for (int k = 0; k < inst.num_charger_types(); ++k)
          for (int t = 0; t < T; ++t)
            for (int s = 0; s < sb; ++s)
              total += inst.charge_cost_at(r, b, i, k, s) * sched.charge[b][i][k][t][s];
    }
    if (static_cast<int>(sched.conventional.size()) != T ||
        static_cast<int>(sched.onroute.size()) != T)
      throw std::invalid_argument("schedule_cost: assignment dimension mismatch");
    for (int t = 0; t < T; ++t) {
      if (static_cast<int>(sched.onroute[t].size()) != static_cast<int>(inst.routes[r].terminals.size()))
        throw std::invalid_argument("schedule_cost: terminal dimension mismatch");
      for (int v : sched.onroute[t]) total += inst.costs.onroute_service * v;
      total += inst.costs.conventional_service * sched.conventional[t];
    }
  }
  return total;
}

std::string dump_soc_graph_csv(const Instance& inst, const SocGraph& graph) {
  (void)inst;
  std::ostringstream out;
  out << "tail_t,tail_s,head_t,head_s,kind,i,k,kappa,cost_cents\n";
  for (const SocArc& a : graph.arcs()) {
    const char* kind = a.kind == ArcKind::Service ? "service" : a.kind == ArcKind::Idle ? "idle" : "charge";
    out << a.tail_t << ',' << a.tail_s << ',' << a.head_t << ',' << a.head_s << ',' << kind << ','
        << a.depot << ',' << a.charger << ',' << a.kappa << ',' << a.cost << '\n';
  }
  return out.str();
}

}  // namespace bfep
