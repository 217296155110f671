#pragma once

#include <cstdint>
#include <vector>

#include "bfep/instance.hpp"

namespace bfep {

/// Synthetic-instance parameters. Cost defaults follow the standard regime:
/// $60.05k depot chargers, $877.59k fast chargers, $943k short-range and
/// $1093k long-range/on-route buses, $50/$29/$31 hourly operating costs,
/// $10k/yr conventional maintenance, 250 service days, gamma = 0.96, rho = 8,
/// two fast chargers per terminal. Budgets are set to budget_factor times the
/// minimum investment of the LP relaxation (1.5 with on-route buses allowed,
/// 2.5 without), split evenly across periods.
struct GeneratorParams {
  int routes = 3;
  int depots = 1;
  int terminals = 2;
  int bus_types = 2;
  int periods = 4;
  int intervals = 24;
  int peak_min = 1;
  int peak_max = 3;
  bool onroute_enabled = true;
  std::vector<int> batteries;  // per bus type; default 6 then 12
  int charge_rate = 2;         // charge units regained per interval
  int travel_min = 0;          // round-trip intervals to a depot
  int travel_max = 0;
  double deadhead_cost_per_interval = 0.0;  // dollars per travel interval per trip
  bool shared_budget = false;
  bool retirement_last_only = true;
  double budget_factor = 0.0;  // 0: auto (1.5 / 2.5)
  int service_days = 250;
  double gamma = 0.96;
  int rho = 8;
  int terminal_cap = 2;
  int depot_cap = 50;
  double idle_cost_hourly = 0.0;
};

/// Deterministic for a fixed (params, seed): the stream is derived from a
/// fixed-width mixer, not the standard library distributions.
Instance generate_synthetic(const GeneratorParams& params, std::uint64_t seed);

}  // namespace bfep
