#pragma once

#include <optional>
#include <vector>

#include "bfep/instance.hpp"
#include "bfep/milp/model.hpp"
#include "bfep/soc_graph.hpp"

namespace bfep {

/// Decomposition of a row's right-hand side into a constant plus a linear
/// form over strategic components: rhs(x) = constant + sum coef * x[comp].
struct OpRowLink {
  double constant = 0.0;
  std::vector<std::pair<int, double>> x_terms;  // (strategic component, coefficient)
};

enum class OpRowKind {
  ChargerCap,        // per (depot, charger type, t); rhs chi_depot
  TerminalCap,       // per (terminal, t); rhs rho * chi_terminal
  Service,           // per (route, t); >= demand
  NodeBalance,       // per (route, bus, node); == 0
  FleetDepot,        // per (route, bus); rhs eta_depot
  FleetOnroute,      // per (route, t); rhs eta_onroute
  FleetConventional  // per (route, t); rhs eta_conventional
};

struct OperationalOptions {
  bool integrality = true;
  bool charger_rows = true;       // emit the charger/terminal capacity families
  bool no_early_charge = false;   // restrict charge arcs to the depleted state
  std::vector<int> bus_subset;    // empty = all bus types
  // arc_allowed[route position in route_set][bus type][arc]: others fixed to 0
  const std::vector<std::vector<std::vector<char>>>* arc_allowed = nullptr;
  const std::vector<char>* terminal_removed = nullptr;  // [terminal]; dual reductions
};

/// One period's scheduling model over a route set, with enough bookkeeping to
/// extract schedules and to run Benders arithmetic on the row structure.
struct OperationalModelHandle {
  milp::Model model;
  int period = 0;
  std::vector<int> route_set;
  std::vector<std::vector<SocGraph>> graphs;  // [route pos][bus type in bus order]
  std::vector<int> bus_types;                 // the bus types modeled

  struct RouteVars {
    std::vector<int> arc_base;   // [bus pos] first model var of that graph's arcs
    std::vector<int> onroute;    // [t * n_local + local j]
    std::vector<int> local_terminals;  // positions into routes[r].terminals kept
    std::vector<int> conventional;     // [t]
  };
  std::vector<RouteVars> vars;  // aligned with route_set

  int first_row = 0;                 // model row where this block starts
  std::vector<OpRowLink> links;      // per emitted row, from first_row on
  std::vector<OpRowKind> row_kinds;  // per emitted row, from first_row on

  /// Schedules for the handle's route set, in route_set order.
  std::vector<OperationalSchedule::RouteSchedule> extract(const Instance& inst,
                                                          const std::vector<double>& primal) const;
};

/// Builds the period-p scheduling problem for a fixed strategic state
/// (flattened). Strategic values land on the row right-hand sides; the link
/// decomposition is recorded per row.
OperationalModelHandle build_operational(const Instance& inst, int p,
                                         const std::vector<int>& x_flat,
                                         const OperationalOptions& opts = {});
/// Fractional strategic values (guiding points, epigraph samples).
OperationalModelHandle build_operational(const Instance& inst, int p,
                                         const std::vector<double>& x_flat,
                                         const OperationalOptions& opts = {});

/// Appends the period-p scheduling block to an existing model. Exactly one of
/// x_flat / x_vars must be given: fixed values go to the rhs, variable ids
/// (indexed by strategic component, -1 = absent) move to the lhs. Bookkeeping
/// lands in `h` (h.model stays untouched); links/kinds cover rows from
/// h.first_row on.
void emit_operational_block(const Instance& inst, int p, const std::vector<int>& routes,
                            const OperationalOptions& opts, milp::Model& model,
                            const std::vector<double>* x_flat, const std::vector<int>* x_vars,
                            bool per_route_linking, OperationalModelHandle& h);
OperationalModelHandle build_operational_routes(const Instance& inst, int p,
                                                const std::vector<int>& routes,
                                                const std::vector<int>& x_flat,
                                                const OperationalOptions& opts = {});
OperationalModelHandle build_operational_routes(const Instance& inst, int p,
                                                const std::vector<int>& routes,
                                                const std::vector<double>& x_flat,
                                                const OperationalOptions& opts = {});

struct OperationalValue {
  milp::SolveStatus status = milp::SolveStatus::Error;
  bool feasible = false;
  double value = milp::kInf;        // optimal (or incumbent) cost; +inf if infeasible
  double lower_bound = -milp::kInf; // proven bound; equals value when solved out
  bool proven = false;              // true when value is the exact optimum
  std::vector<double> primal;       // flows at the incumbent
};

/// Q_p(x): exact optimal cost of the integer scheduling problem, or +inf.
OperationalValue solve_operational(const Instance& inst, int p, const std::vector<int>& x_flat,
                                   const milp::SolveLimits& limits = {},
                                   const OperationalOptions& opts = {});

/// Single-route relaxation value Q~_pr(x); per-route copies of the linking
/// rows make sum_r of these a lower bound on Q_p(x).
OperationalValue solve_single_route(const Instance& inst, int p, int r,
                                    const std::vector<int>& x_flat, bool integrality,
                                    const milp::SolveLimits& limits = {});

enum class MinFleetCapVariant {
  ConventionalPlusOnroute,  // cap eta_hat + eta_tilde <= m
  Printed                   // cap eta_hat + sum_b eta_depot <= m (audit variant)
};

constexpr int kMinFleetInfeasible = std::numeric_limits<int>::max();

/// Minimum number of depot BEBs that can cover route r's demand in period p
/// when at most m conventional buses and on-route BEBs assist and charging
/// capacity is unrestricted. Returns kMinFleetInfeasible when no depot bus
/// type exists and m buses cannot cover the peak.
int min_depot_fleet(const Instance& inst, int p, int r, int m,
                    const std::vector<int>& bus_types_subset = {},
                    MinFleetCapVariant variant = MinFleetCapVariant::ConventionalPlusOnroute);

/// Single-route scheduling problem of the arc-selection sweep: depot type b
/// pinned to fleet_b buses, other depot types absent, at most m conventional +
/// on-route buses, charging capacity relaxed, cost objective.
struct SweepResult {
  bool feasible = false;
  double value = milp::kInf;
  std::vector<double> primal;
  OperationalModelHandle handle;
};
SweepResult solve_route_sweep(const Instance& inst, int p, int r, int b, int m, int fleet_b,
                              MinFleetCapVariant variant, const milp::SolveLimits& limits = {});

}  // namespace bfep
