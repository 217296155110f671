#include "bfep/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bfep/heuristics.hpp"
#include "bfep/milp/solver.hpp"

namespace bfep {

namespace {

// splitmix64: stable across platforms and standard libraries.
struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  int uniform(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

}  // namespace

Instance generate_synthetic(const GeneratorParams& params, std::uint64_t seed) {
  if (params.routes < 1 || params.intervals < 1 || params.periods < 1 || params.depots < 1 ||
      params.bus_types < 0 || params.peak_min < 0 || params.peak_max < params.peak_min)
    throw std::invalid_argument("generate_synthetic: invalid parameters");

  Rng rng{seed ^ 0x5851f42d4c957f2dull};
  Instance inst;
  inst.periods = params.periods;
  inst.intervals = params.intervals;
  inst.gamma = params.gamma;
  inst.rho = params.rho;
  inst.service_days = params.service_days;
  inst.shared_budget = params.shared_budget;

  for (int i = 0; i < params.depots; ++i)
    inst.depots.push_back({"d" + std::to_string(i), params.depot_cap});
  const int terminals = params.onroute_enabled ? params.terminals : 0;
  for (int j = 0; j < terminals; ++j)
    inst.terminals.push_back({"t" + std::to_string(j), params.terminal_cap});

  std::vector<int> batteries = params.batteries;
  if (batteries.empty()) batteries = {6, 12};
  while (static_cast<int>(batteries.size()) < params.bus_types)
    batteries.push_back(batteries.back());
  batteries.resize(params.bus_types);
  for (int b = 0; b < params.bus_types; ++b) {
    const Money price = money_from_dollars(b == 0 ? 943000.0 : 1093000.0);
    inst.bus_types.push_back({"b" + std::to_string(b), batteries[b], price});
  }
  inst.charger_types.push_back({"k0", money_from_dollars(60050.0)});

  const Money day_factor = params.service_days;
  inst.costs.service.assign(params.bus_types, money_from_dollars(29.0) * day_factor);
  inst.costs.idle.assign(params.bus_types,
                         money_from_dollars(params.idle_cost_hourly) * day_factor);
  inst.costs.onroute_service = money_from_dollars(31.0) * day_factor;
  inst.costs.conventional_service = money_from_dollars(50.0) * day_factor;
  inst.costs.conventional_maintenance = money_from_dollars(10000.0);
  inst.costs.onroute_bus_price = money_from_dollars(1093000.0);
  inst.costs.onroute_charger_price = money_from_dollars(877590.0);

  long total_conventional = 0;
  for (int r = 0; r < params.routes; ++r) {
    Route route;
    route.id = "r" + std::to_string(r);
    if (terminals > 0) {
      // One or two connected terminals; distinct.
      const int first = rng.uniform(0, terminals - 1);
      route.terminals.push_back(first);
      if (terminals > 1 && rng.uniform(0, 1) == 1) {
        int second = rng.uniform(0, terminals - 2);
        if (second >= first) ++second;
        route.terminals.push_back(second);
      }
    }
    const int peak = rng.uniform(params.peak_min, params.peak_max);
    std::vector<int> day(inst.intervals, 0);
    for (int t = 0; t < inst.intervals; ++t) day[t] = peak > 0 ? rng.uniform(0, peak) : 0;
    if (peak > 0) day[rng.uniform(0, inst.intervals - 1)] = peak;
    route.demand.assign(inst.periods, day);  // stationary by default
    route.travel.resize(params.depots);
    for (int i = 0; i < params.depots; ++i)
      route.travel[i] = rng.uniform(params.travel_min, params.travel_max);
    inst.routes.push_back(std::move(route));
    total_conventional += peak;
  }

  // Charging-time and charging-cost tables.
  inst.kappa.assign(params.routes, {});
  inst.charge_cost.assign(params.routes, {});
  for (int r = 0; r < params.routes; ++r) {
    inst.kappa[r].assign(params.bus_types, {});
    inst.charge_cost[r].assign(params.bus_types, {});
    for (int b = 0; b < params.bus_types; ++b) {
      const int sb = batteries[b];
      inst.kappa[r][b].assign(params.depots, {});
      inst.charge_cost[r][b].assign(params.depots, {});
      for (int i = 0; i < params.depots; ++i) {
        std::vector<int> col(sb);
        std::vector<Money> cost(sb);
        for (int s = 0; s < sb; ++s) {
          col[s] = inst.routes[r].travel[i] +
                   (sb - s + params.charge_rate - 1) / params.charge_rate;
          cost[s] = money_from_dollars(params.deadhead_cost_per_interval *
                                       inst.routes[r].travel[i]) *
                    day_factor;
        }
        inst.kappa[r][b][i] = {col};
        inst.charge_cost[r][b][i] = {cost};
      }
    }
  }

  inst.initial_state = zero_state(inst);
  for (int r = 0; r < params.routes; ++r)
    inst.initial_state.eta_conventional[r] = inst.peak_demand(0, r);

  inst.retirement_caps.assign(inst.periods, static_cast<int>(total_conventional));
  if (params.retirement_last_only) {
    inst.retirement_caps[inst.periods - 1] = 0;
  } else {
    for (int p = 0; p < inst.periods; ++p)
      inst.retirement_caps[p] = static_cast<int>(
          (total_conventional * (inst.periods - 1 - p)) / inst.periods);
  }

  // Budget: scaled minimum-investment value of the LP relaxation. The
  // calibration pass runs under a plain everything-maxed-out budget.
  {
    double all_assets = 0.0;
    for (const Depot& d : inst.depots)
      for (const ChargerType& k : inst.charger_types)
        all_assets += money_to_dollars(k.price) * d.host_cap;
    for (const Terminal& t : inst.terminals)
      all_assets += money_to_dollars(inst.costs.onroute_charger_price) * t.host_cap;
    double fleet_cap = 0.0;
    for (int r = 0; r < params.routes; ++r) fleet_cap += inst.peak_demand(0, r);
    for (const DepotBusType& b : inst.bus_types)
      all_assets += money_to_dollars(b.price) * fleet_cap;
    all_assets += money_to_dollars(inst.costs.onroute_bus_price) * fleet_cap;
    inst.budgets.assign(inst.periods, money_from_dollars(all_assets + 1.0));
  }
  {
    StrategicWeights w;
    w.invest.assign(inst.periods, 1.0);
    w.maint.assign(inst.periods, 0.0);
    w.opex.assign(inst.periods, 0.0);
    ExtensiveOptions eo;
    eo.integrality = false;
    eo.weights = w;
    ExtensiveModel ext = build_extensive(inst, empty_preprocessing(inst), eo);
    milp::SolveOutcome lp = milp::solve_lp(ext.model);
    if (lp.status != milp::SolveStatus::Optimal)
      throw std::runtime_error("generate_synthetic: minimum-investment relaxation failed");
    const double factor =
        params.budget_factor > 0 ? params.budget_factor : (params.onroute_enabled ? 1.5 : 2.5);
    const Money total = money_from_dollars(std::ceil(lp.obj * factor));
    const Money per_period = (total + inst.periods - 1) / inst.periods;
    inst.budgets.assign(inst.periods, per_period);
  }
  return inst;
}

}  // namespace bfep
