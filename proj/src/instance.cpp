#include "bfep/instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace bfep {

namespace {

std::string idx(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }

}  // namespace

std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> out;
  auto flag = [&](std::string code, std::string path, std::string detail = {}) {
    out.push_back({std::move(code), std::move(path), std::move(detail)});
  };

  if (inst.periods < 1) flag("bad_period_count", "meta.P");
  if (inst.intervals < 1) flag("bad_interval_count", "meta.T");
  if (!(inst.gamma > 0.0) || inst.gamma > 1.0) flag("bad_gamma", "meta.gamma");
  if (inst.rho < 1) flag("bad_rho", "meta.rho");
  if (inst.service_days < 1) flag("bad_service_days", "meta.service_days");

  const int P = inst.periods, T = inst.intervals;
  const int R = inst.num_routes(), I = inst.num_depots(), J = inst.num_terminals();
  const int B = inst.num_bus_types(), K = inst.num_charger_types();

  for (int i = 0; i < I; ++i)
    if (inst.depots[i].host_cap < 0) flag("negative_host_cap", idx("depots", i) + ".host_cap");
  for (int j = 0; j < J; ++j)
    if (inst.terminals[j].host_cap < 0) flag("negative_host_cap", idx("terminals", j) + ".host_cap");
  for (int b = 0; b < B; ++b) {
    if (inst.bus_types[b].battery < 1) flag("bad_battery", idx("bus_types", b) + ".battery");
    if (inst.bus_types[b].price < 0) flag("negative_price", idx("bus_types", b) + ".price");
  }
  for (int k = 0; k < K; ++k)
    if (inst.charger_types[k].price < 0) flag("negative_price", idx("charger_types", k) + ".price");

  // Cost coefficients must be nonnegative.
  if (static_cast<int>(inst.costs.service.size()) != B) flag("bad_shape", "costs.service");
  if (static_cast<int>(inst.costs.idle.size()) != B) flag("bad_shape", "costs.idle");
  for (int b = 0; b < std::min<int>(B, inst.costs.service.size()); ++b)
    if (inst.costs.service[b] < 0) flag("negative_cost", idx("costs.service", b));
  for (int b = 0; b < std::min<int>(B, inst.costs.idle.size()); ++b)
    if (inst.costs.idle[b] < 0) flag("negative_cost", idx("costs.idle", b));
  if (inst.costs.onroute_service < 0) flag("negative_cost", "costs.onroute_service");
  if (inst.costs.conventional_service < 0) flag("negative_cost", "costs.conventional_service");
  if (inst.costs.conventional_maintenance < 0) flag("negative_cost", "costs.conventional_maintenance");
  if (inst.costs.onroute_bus_price < 0) flag("negative_price", "costs.onroute_bus_price");
  if (inst.costs.onroute_charger_price < 0) flag("negative_price", "costs.onroute_charger_price");

  if (static_cast<int>(inst.budgets.size()) != P) flag("bad_shape", "budgets");
  for (int p = 0; p < std::min<int>(P, inst.budgets.size()); ++p)
    if (inst.budgets[p] < 0) flag("negative_budget", idx("budgets", p));
  if (static_cast<int>(inst.retirement_caps.size()) != P) flag("bad_shape", "retirement_caps");
  for (int p = 0; p < std::min<int>(P, inst.retirement_caps.size()); ++p)
    if (inst.retirement_caps[p] < 0) flag("negative_cap", idx("retirement_caps", p));

  // Routes: demand shape and sign, terminal references.
  for (int r = 0; r < R; ++r) {
    const Route& route = inst.routes[r];
    const std::string base = idx("routes", r);
    if (static_cast<int>(route.demand.size()) != P) {
      flag("bad_shape", base + ".demand");
      continue;
    }
    for (int p = 0; p < P; ++p) {
      if (static_cast<int>(route.demand[p].size()) != T) {
        flag("bad_shape", base + ".demand" + "[" + std::to_string(p) + "]");
        continue;
      }
      for (int t = 0; t < T; ++t)
        if (route.demand[p][t] < 0)
          flag("negative_demand", base + ".demand[" + std::to_string(p) + "][" + std::to_string(t) + "]");
    }
    for (int j : route.terminals)
      if (j < 0 || j >= J) flag("unknown_terminal", base + ".terminals");
    if (static_cast<int>(route.travel.size()) != I) flag("bad_shape", base + ".travel");
    for (int i = 0; i < std::min<int>(I, route.travel.size()); ++i)
      if (route.travel[i] < 0) flag("negative_travel", base + ".travel[" + std::to_string(i) + "]");
  }

  // kappa and charge-cost tables: shape, positivity, monotonicity in s.
  auto check_table_shape = [&](const auto& table, const std::string& name) {
    if (static_cast<int>(table.size()) != R) {
      flag("bad_shape", name);
      return false;
    }
    for (int r = 0; r < R; ++r) {
      if (static_cast<int>(table[r].size()) != B) {
        flag("bad_shape", name + "[" + inst.routes[r].id + "]");
        return false;
      }
      for (int b = 0; b < B; ++b) {
        if (static_cast<int>(table[r][b].size()) != I) {
          flag("bad_shape", name);
          return false;
        }
        for (int i = 0; i < I; ++i) {
          if (static_cast<int>(table[r][b][i].size()) != K) {
            flag("bad_shape", name);
            return false;
          }
          for (int k = 0; k < K; ++k)
            if (static_cast<int>(table[r][b][i][k].size()) != inst.bus_types[b].battery) {
              flag("bad_shape", name);
              return false;
            }
        }
      }
    }
    return true;
  };

  if (check_table_shape(inst.kappa, "kappa")) {
    for (int r = 0; r < R; ++r)
      for (int b = 0; b < B; ++b)
        for (int i = 0; i < I; ++i)
          for (int k = 0; k < K; ++k) {
            const auto& col = inst.kappa[r][b][i][k];
            for (int s = 0; s < static_cast<int>(col.size()); ++s) {
              if (col[s] < 1)
                flag("nonpositive_kappa", "kappa[" + inst.routes[r].id + "][" + inst.bus_types[b].id +
                                              "][" + inst.depots[i].id + "][" + inst.charger_types[k].id +
                                              "][" + std::to_string(s) + "]");
              if (s > 0 && col[s] > col[s - 1])
                flag("kappa_not_nonincreasing", "kappa[" + inst.routes[r].id + "][" + inst.bus_types[b].id +
                                                    "][" + inst.depots[i].id + "][" +
                                                    inst.charger_types[k].id + "][" + std::to_string(s) + "]");
            }
          }
  }
  if (check_table_shape(inst.charge_cost, "costs.charge_trip")) {
    for (int r = 0; r < R; ++r)
      for (int b = 0; b < B; ++b)
        for (int i = 0; i < I; ++i)
          for (int k = 0; k < K; ++k)
            for (int s = 0; s < inst.bus_types[b].battery; ++s)
              if (inst.charge_cost[r][b][i][k][s] < 0)
                flag("negative_cost", "costs.charge_trip[" + inst.routes[r].id + "]");
  }

  // Initial state shape and signs.
  auto check_state = [&](const StrategicState& x, const std::string& base) {
    bool ok = true;
    if (static_cast<int>(x.chi_depot.size()) != I) { flag("bad_shape", base + ".chi_depot"); ok = false; }
    if (static_cast<int>(x.chi_terminal.size()) != J) { flag("bad_shape", base + ".chi_terminal"); ok = false; }
    if (static_cast<int>(x.eta_depot.size()) != R) { flag("bad_shape", base + ".eta_depot"); ok = false; }
    if (static_cast<int>(x.eta_onroute.size()) != R) { flag("bad_shape", base + ".eta_onroute"); ok = false; }
    if (static_cast<int>(x.eta_conventional.size()) != R) { flag("bad_shape", base + ".eta_conventional"); ok = false; }
    if (!ok) return;
    for (int i = 0; i < I; ++i) {
      if (static_cast<int>(x.chi_depot[i].size()) != K) { flag("bad_shape", base + ".chi_depot"); return; }
      for (int k = 0; k < K; ++k)
        if (x.chi_depot[i][k] < 0) flag("negative_count", base + ".chi_depot");
    }
    for (int j = 0; j < J; ++j)
      if (x.chi_terminal[j] < 0) flag("negative_count", base + ".chi_terminal");
    for (int r = 0; r < R; ++r) {
      if (static_cast<int>(x.eta_depot[r].size()) != B) { flag("bad_shape", base + ".eta_depot"); return; }
      for (int b = 0; b < B; ++b)
        if (x.eta_depot[r][b] < 0) flag("negative_count", base + ".eta_depot");
      if (x.eta_onroute[r] < 0) flag("negative_count", base + ".eta_onroute");
      if (x.eta_conventional[r] < 0) flag("negative_count", base + ".eta_conventional");
    }
  };
  check_state(inst.initial_state, "initial_state");

  // A route with no terminal, no depot-BEB type, and no initial conventional
  // buses has no way to meet positive demand; surface it rather than letting
  // a solver report a bare infeasibility later.
  for (int r = 0; r < R; ++r) {
    bool has_demand = false;
    for (const auto& day : inst.routes[r].demand)
      for (int d : day) has_demand |= d > 0;
    if (!has_demand) continue;
    const bool servable = !inst.routes[r].terminals.empty() || B > 0 ||
                          (static_cast<int>(inst.initial_state.eta_conventional.size()) > r &&
                           inst.initial_state.eta_conventional[r] > 0);
    if (!servable) flag("unservable_route", idx("routes", r));
  }

  return out;
}

int strategic_dim(const Instance& inst) {
  return inst.num_depots() * inst.num_charger_types() + inst.num_terminals() +
         inst.num_routes() * inst.num_bus_types() + 2 * inst.num_routes();
}

int comp_chi_depot(const Instance& inst, int i, int k) { return i * inst.num_charger_types() + k; }

int comp_chi_terminal(const Instance& inst, int j) {
  return inst.num_depots() * inst.num_charger_types() + j;
}

int comp_eta_depot(const Instance& inst, int r, int b) {
  return inst.num_depots() * inst.num_charger_types() + inst.num_terminals() +
         r * inst.num_bus_types() + b;
}

int comp_eta_onroute(const Instance& inst, int r) {
  return inst.num_depots() * inst.num_charger_types() + inst.num_terminals() +
         inst.num_routes() * inst.num_bus_types() + r;
}

int comp_eta_conventional(const Instance& inst, int r) {
  return inst.num_depots() * inst.num_charger_types() + inst.num_terminals() +
         inst.num_routes() * inst.num_bus_types() + inst.num_routes() + r;
}

std::string component_name(const Instance& inst, int comp) {
  const int IK = inst.num_depots() * inst.num_charger_types();
  const int J = inst.num_terminals();
  const int RB = inst.num_routes() * inst.num_bus_types();
  const int R = inst.num_routes();
  if (comp < IK)
    return "chi_depot[" + inst.depots[comp / inst.num_charger_types()].id + "][" +
           inst.charger_types[comp % inst.num_charger_types()].id + "]";
  comp -= IK;
  if (comp < J) return "chi_terminal[" + inst.terminals[comp].id + "]";
  comp -= J;
  if (comp < RB)
    return "eta_depot[" + inst.routes[comp / inst.num_bus_types()].id + "][" +
           inst.bus_types[comp % inst.num_bus_types()].id + "]";
  comp -= RB;
  if (comp < R) return "eta_onroute[" + inst.routes[comp].id + "]";
  comp -= R;
  return "eta_conventional[" + inst.routes[comp].id + "]";
}

std::vector<int> flatten_state(const Instance& inst, const StrategicState& x) {
  std::vector<int> flat(strategic_dim(inst), 0);
  for (int i = 0; i < inst.num_depots(); ++i)
    for (int k = 0; k < inst.num_charger_types(); ++k)
      flat[comp_chi_depot(inst, i, k)] = x.chi_depot[i][k];
  for (int j = 0; j < inst.num_terminals(); ++j)
    flat[comp_chi_terminal(inst, j)] = x.chi_terminal[j];
  for (int r = 0; r < inst.num_routes(); ++r) {
    for (int b = 0; b < inst.num_bus_types(); ++b)
      flat[comp_eta_depot(inst, r, b)] = x.eta_depot[r][b];
    flat[comp_eta_onroute(inst, r)] = x.eta_onroute[r];
    flat[comp_eta_conventional(inst, r)] = x.eta_conventional[r];
  }
  return flat;
}

StrategicState unflatten_state(const Instance& inst, const std::vector<int>& flat) {
  if (static_cast<int>(flat.size()) != strategic_dim(inst))
    throw std::invalid_argument("unflatten_state: dimension mismatch");
  StrategicState x = zero_state(inst);
  for (int i = 0; i < inst.num_depots(); ++i)
    for (int k = 0; k < inst.num_charger_types(); ++k)
      x.chi_depot[i][k] = flat[comp_chi_depot(inst, i, k)];
  for (int j = 0; j < inst.num_terminals(); ++j)
    x.chi_terminal[j] = flat[comp_chi_terminal(inst, j)];
  for (int r = 0; r < inst.num_routes(); ++r) {
    for (int b = 0; b < inst.num_bus_types(); ++b)
      x.eta_depot[r][b] = flat[comp_eta_depot(inst, r, b)];
    x.eta_onroute[r] = flat[comp_eta_onroute(inst, r)];
    x.eta_conventional[r] = flat[comp_eta_conventional(inst, r)];
  }
  return x;
}

StrategicState zero_state(const Instance& inst) {
  StrategicState x;
  x.chi_depot.assign(inst.num_depots(), std::vector<int>(inst.num_charger_types(), 0));
  x.chi_terminal.assign(inst.num_terminals(), 0);
  x.eta_depot.assign(inst.num_routes(), std::vector<int>(inst.num_bus_types(), 0));
  x.eta_onroute.assign(inst.num_routes(), 0);
  x.eta_conventional.assign(inst.num_routes(), 0);
  return x;
}

}  // namespace bfep
