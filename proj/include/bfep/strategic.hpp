#pragma once

#include <vector>

#include "bfep/instance.hpp"
#include "bfep/milp/model.hpp"
#include "bfep/preprocessing.hpp"

namespace bfep {

/// Per-period objective weights. Investment and maintenance costs of period p
/// are scaled by invest[p] / maint[p]; the default is the discount gamma^p
/// (0-based) for both.
struct StrategicWeights {
  std::vector<double> invest;
  std::vector<double> maint;
  std::vector<double> opex;  // schedule-cost scale, used by extensive builders
};

StrategicWeights default_weights(const Instance& inst);

/// Bookkeeping of the investment-planning block emitted into a model:
/// strategic variables per period, acquisition variables carrying purchase
/// prices, and the budget/monotonicity/retirement/hosting rows.
struct StrategicVars {
  std::vector<std::vector<int>> x;  // [p][strategic component] model var
  // Acquisition cost expression of period p: sum of price * u over these
  // terms (prices in dollars); used by budget rows and objectives.
  std::vector<std::vector<std::pair<int, double>>> invest_terms;  // [p] (var, price)

  double invest_cost(int p, const std::vector<double>& primal) const {
    double c = 0.0;
    for (auto [v, price] : invest_terms[p]) c += price * primal[v];
    return c;
  }
};

/// Emits the multi-period investment feasible set into `model`: integer state
/// variables with hosting caps (tightened by the preprocessing report),
/// acquisition variables tied to state increments (which enforces the
/// monotonicity rows), conventional-fleet nonincrease, retirement caps,
/// budget rows (per period, or pooled when the instance says so), and the
/// fleet-size envelope inequalities. Objective contributions: acquisitions at
/// invest weight, conventional maintenance at maint weight.
StrategicVars emit_strategic(milp::Model& model, const Instance& inst,
                             const PreprocessReport& pre, const StrategicWeights& weights);

/// Exact investment cost of moving from x_prev to x_cur (cents): purchase
/// prices times acquired chargers and buses; retirements earn nothing.
Money investment_cost_cents(const Instance& inst, const StrategicState& x_prev,
                            const StrategicState& x_cur);

/// Fixed maintenance cost of holding state x for one period (cents).
Money maintenance_cost_cents(const Instance& inst, const StrategicState& x);

}  // namespace bfep
