#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfep/money.hpp"

namespace bfep {

struct Depot {
  std::string id;
  int host_cap = 0;  // max chargers installable, all types combined
};

struct Terminal {
  std::string id;
  int host_cap = 0;  // max fast chargers installable
};

struct DepotBusType {
  std::string id;
  int battery = 1;  // s_b, charge units; one unit per service interval
  Money price = 0;
};

struct ChargerType {
  std::string id;
  Money price = 0;
};

struct Route {
  std::string id;
  std::vector<int> terminals;               // indices into Instance::terminals
  std::vector<std::vector<int>> demand;     // [P][T] minimum buses in service
  std::vector<int> travel;                  // [depot] round-trip intervals, kappa descriptor
};

/// Operational cost coefficients, applied per vehicle-interval (per trip for
/// charge arcs). All coefficients are nonnegative.
struct CostModel {
  std::vector<Money> service;               // [bus type] depot BEB in service
  std::vector<Money> idle;                  // [bus type] depot BEB idling
  // charge[r][b][i][k][s], s in [0 .. battery-1]; flattened, see Instance::charge_cost.
  Money onroute_service = 0;                // on-route BEB per service interval
  Money conventional_service = 0;           // conventional bus per service interval
  Money conventional_maintenance = 0;       // fixed per conventional bus per period
  Money onroute_bus_price = 0;
  Money onroute_charger_price = 0;
};

/// One period's investment/assignment state x_p.
struct StrategicState {
  std::vector<std::vector<int>> chi_depot;    // [depot][charger type]
  std::vector<int> chi_terminal;              // [terminal]
  std::vector<std::vector<int>> eta_depot;    // [route][bus type]
  std::vector<int> eta_onroute;               // [route]
  std::vector<int> eta_conventional;          // [route]
};

/// Daily schedule of one period: flows on the SoC graphs plus assignments.
/// Index conventions: w uses s in [1..s_b], v uses s in [0..s_b], z uses
/// s in [0..s_b-1]; on-route assignments are kept per connected terminal.
struct OperationalSchedule {
  struct RouteSchedule {
    // w[b][t][s-1], v[b][t][s], z[b][i][k][t][s]
    std::vector<std::vector<std::vector<int>>> service;
    std::vector<std::vector<std::vector<int>>> idle;
    std::vector<std::vector<std::vector<std::vector<std::vector<int>>>>> charge;
    std::vector<std::vector<int>> onroute;      // [t][local terminal index]
    std::vector<int> conventional;              // [t]
  };
  std::vector<std::vector<RouteSchedule>> periods;  // [p][r]
};

struct Instance {
  int periods = 1;       // P
  int intervals = 1;     // T
  double gamma = 1.0;    // per-period discount factor
  int rho = 1;           // on-route BEBs one fast charger serves per interval
  int service_days = 1;  // informational; generators fold it into cost coefficients
  bool shared_budget = false;

  std::vector<Route> routes;
  std::vector<Depot> depots;
  std::vector<Terminal> terminals;
  std::vector<DepotBusType> bus_types;
  std::vector<ChargerType> charger_types;

  CostModel costs;
  // kappa[r][b][i][k][s]: intervals for a round trip to depot i plus a full
  // recharge from state s on a type-k charger; s in [0 .. battery(b)-1].
  std::vector<std::vector<std::vector<std::vector<std::vector<int>>>>> kappa;
  // charge_cost[r][b][i][k][s]: money per charging trip.
  std::vector<std::vector<std::vector<std::vector<std::vector<Money>>>>> charge_cost;

  std::vector<Money> budgets;          // [P] investment budget per period
  std::vector<int> retirement_caps;    // [P] max conventional buses still in use
  StrategicState initial_state;        // x_0

  int num_routes() const { return static_cast<int>(routes.size()); }
  int num_depots() const { return static_cast<int>(depots.size()); }
  int num_terminals() const { return static_cast<int>(terminals.size()); }
  int num_bus_types() const { return static_cast<int>(bus_types.size()); }
  int num_charger_types() const { return static_cast<int>(charger_types.size()); }

  int kappa_at(int r, int b, int i, int k, int s) const { return kappa[r][b][i][k][s]; }
  Money charge_cost_at(int r, int b, int i, int k, int s) const {
    return charge_cost[r][b][i][k][s];
  }
  int peak_demand(int p, int r) const {
    int peak = 0;
    for (int d : routes[r].demand[p]) peak = std::max(peak, d);
    return peak;
  }
};

struct Violation {
  std::string code;   // machine-readable, e.g. "negative_demand"
  std::string path;   // location, e.g. "routes[2].demand[0][3]"
  std::string detail;
};

/// Checks every structural invariant of the instance. Violations are data,
/// not failures: an empty result means the instance is well formed.
std::vector<Violation> validate_instance(const Instance& inst);

/// Strategic-state helpers shared by model builders and checkers.

/// Number of scalar components of x_p: I*K + J + R*B + R + R.
int strategic_dim(const Instance& inst);

/// Flattens x_p in the canonical component order
/// [chi_depot (i,k)] ++ [chi_terminal (j)] ++ [eta_depot (r,b)] ++ [eta_onroute (r)] ++ [eta_conventional (r)].
std::vector<int> flatten_state(const Instance& inst, const StrategicState& x);
StrategicState unflatten_state(const Instance& inst, const std::vector<int>& flat);

/// Canonical component indices within the flattened state.
int comp_chi_depot(const Instance& inst, int i, int k);
int comp_chi_terminal(const Instance& inst, int j);
int comp_eta_depot(const Instance& inst, int r, int b);
int comp_eta_onroute(const Instance& inst, int r);
int comp_eta_conventional(const Instance& inst, int r);
std::string component_name(const Instance& inst, int comp);

StrategicState zero_state(const Instance& inst);

}  // namespace bfep
