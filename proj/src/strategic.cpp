#include "bfep/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bfep {

namespace {

using milp::Model;
using milp::RowSense;
using milp::VarKind;

// Generous hard cap for fleet variables: everything the initial state holds
// plus one bus per demanded slot. Keeps branch-and-bound boxes finite without
// cutting any optimal plan.
int fleet_cap(const Instance& inst) {
  long cap = 0;
  for (int r = 0; r < inst.num_routes(); ++r) {
    long peak_total = 0;
    for (int p = 0; p < inst.periods; ++p) {
      long tot = 0;
      for (int d : inst.routes[r].demand[p]) tot += d;
      peak_total = std::max(peak_total, tot);
    }
    cap += peak_total;
    for (int b = 0; b < inst.num_bus_types(); ++b) cap += inst.initial_state.eta_depot[r][b];
    cap += inst.initial_state.eta_onroute[r] + inst.initial_state.eta_conventional[r];
  }
  return static_cast<int>(std::min<long>(cap, 1 << 24));
}

}  // namespace

StrategicWeights default_weights(const Instance& inst) {
  StrategicWeights w;
  w.invest.resize(inst.periods);
  w.maint.resize(inst.periods);
  w.opex.resize(inst.periods);
  for (int p = 0; p < inst.periods; ++p) {
    w.invest[p] = std::pow(inst.gamma, p);
    w.maint[p] = w.invest[p];
    w.opex[p] = w.invest[p];
  }
  return w;
}

StrategicVars emit_strategic(Model& model, const Instance& inst, const PreprocessReport& pre,
                             const StrategicWeights& weights) {
  const int P = inst.periods;
  const int I = inst.num_depots(), J = inst.num_terminals();
  const int R = inst.num_routes(), B = inst.num_bus_types(), K = inst.num_charger_types();
  const int eta_ub = fleet_cap(inst);

  StrategicVars sv;
  sv.x.assign(P, std::vector<int>(strategic_dim(inst), -1));
  sv.invest_terms.resize(P);

  for (int p = 0; p < P; ++p) {
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k)
        sv.x[p][comp_chi_depot(inst, i, k)] =
            model.add_var(VarKind::Integer, 0.0, inst.depots[i].host_cap, 0.0);
    for (int j = 0; j < J; ++j)
      sv.x[p][comp_chi_terminal(inst, j)] =
          model.add_var(VarKind::Integer, 0.0, pre.terminal_bound[p][j], 0.0);
    for (int r = 0; r < R; ++r) {
      for (int b = 0; b < B; ++b)
        sv.x[p][comp_eta_depot(inst, r, b)] = model.add_var(VarKind::Integer, 0.0, eta_ub, 0.0);
      sv.x[p][comp_eta_onroute(inst, r)] = model.add_var(VarKind::Integer, 0.0, eta_ub, 0.0);
      sv.x[p][comp_eta_conventional(inst, r)] =
          model.add_var(VarKind::Integer, 0.0, eta_ub,
                        weights.maint[p] * money_to_dollars(inst.costs.conventional_maintenance));
    }
  }

  const std::vector<int> x0 = flatten_state(inst, inst.initial_state);
  // x_prev(comp): previous period's variable (+1 coef) or the initial value.
  auto prev_terms = [&](int p, int comp, std::vector<std::pair<int, double>>& terms,
                        double& rhs_shift, double sign) {
    if (p == 0)
      rhs_shift += sign * x0[comp];
    else
      terms.push_back({sv.x[p - 1][comp], sign});
  };

  for (int p = 0; p < P; ++p) {
    // Acquisition variables: u = (state) - (previous state) >= 0. Chargers
    // are site-level; buses count acquisitions on fleet totals per type,
    // since vehicles may be reassigned across routes.
    auto add_acq = [&](std::vector<int> comps, double price_dollars) {
      const int u = model.add_var(VarKind::Continuous, 0.0, milp::kInf,
                                  weights.invest[p] * price_dollars);
      std::vector<std::pair<int, double>> terms{{u, -1.0}};
      double rhs = 0.0;
      for (int comp : comps) {
        terms.push_back({sv.x[p][comp], 1.0});
        prev_terms(p, comp, terms, rhs, -1.0);
      }
      model.add_row(std::move(terms), RowSense::EQ, -rhs);
      sv.invest_terms[p].push_back({u, price_dollars});
    };
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k)
        add_acq({comp_chi_depot(inst, i, k)}, money_to_dollars(inst.charger_types[k].price));
    for (int j = 0; j < J; ++j)
      add_acq({comp_chi_terminal(inst, j)}, money_to_dollars(inst.costs.onroute_charger_price));
    for (int b = 0; b < B; ++b) {
      std::vector<int> comps;
      for (int r = 0; r < R; ++r) comps.push_back(comp_eta_depot(inst, r, b));
      add_acq(std::move(comps), money_to_dollars(inst.bus_types[b].price));
    }
    {
      std::vector<int> comps;
      for (int r = 0; r < R; ++r) comps.push_back(comp_eta_onroute(inst, r));
      add_acq(std::move(comps), money_to_dollars(inst.costs.onroute_bus_price));
    }

    // Conventional totals can only shrink; retirement caps bound what stays.
    {
      std::vector<std::pair<int, double>> terms;
      double rhs = 0.0;
      for (int r = 0; r < R; ++r) {
        terms.push_back({sv.x[p][comp_eta_conventional(inst, r)], 1.0});
        prev_terms(p, comp_eta_conventional(inst, r), terms, rhs, -1.0);
      }
      model.add_row(terms, RowSense::LE, -rhs);
      std::vector<std::pair<int, double>> cap_terms;
      for (int r = 0; r < R; ++r)
        cap_terms.push_back({sv.x[p][comp_eta_conventional(inst, r)], 1.0});
      model.add_row(std::move(cap_terms), RowSense::LE,
                    static_cast<double>(inst.retirement_caps[p]));
    }

    // Depot hosting capacity is shared across charger types.
    for (int i = 0; i < I; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int k = 0; k < K; ++k) terms.push_back({sv.x[p][comp_chi_depot(inst, i, k)], 1.0});
      model.add_row(std::move(terms), RowSense::LE, static_cast<double>(inst.depots[i].host_cap));
    }

    // Fleet-size envelope inequalities from preprocessing.
    for (int r = 0; r < R; ++r)
      for (const EnvelopeConstraint& c : pre.envelopes[p][r]) {
        if (c.kind == EnvelopeConstraint::Kind::Floor) {
          model.add_row({{sv.x[p][comp_eta_onroute(inst, r)], 1.0},
                         {sv.x[p][comp_eta_conventional(inst, r)], 1.0}},
                        RowSense::GE, static_cast<double>(c.floor_m));
        } else {
          std::vector<std::pair<int, double>> terms;
          for (int b = 0; b < B; ++b) terms.push_back({sv.x[p][comp_eta_depot(inst, r, b)], 1.0});
          terms.push_back({sv.x[p][comp_eta_onroute(inst, r)], -c.slope});
          terms.push_back({sv.x[p][comp_eta_conventional(inst, r)], -c.slope});
          model.add_row(std::move(terms), RowSense::GE, c.intercept);
        }
      }
  }

  // Budgets: one row per period, or a single pooled row.
  if (inst.shared_budget) {
    std::vector<std::pair<int, double>> terms;
    Money total = 0;
    for (int p = 0; p < P; ++p) {
      for (auto [v, price] : sv.invest_terms[p]) terms.push_back({v, price});
      total += inst.budgets[p];
    }
    model.add_row(std::move(terms), RowSense::LE, money_to_dollars(total));
  } else {
    for (int p = 0; p < P; ++p) {
      std::vector<std::pair<int, double>> terms;
      for (auto [v, price] : sv.invest_terms[p]) terms.push_back({v, price});
      model.add_row(std::move(terms), RowSense::LE, money_to_dollars(inst.budgets[p]));
    }
  }
  return sv;
}

Money investment_cost_cents(const Instance& inst, const StrategicState& x_prev,
                            const StrategicState& x_cur) {
  Money total = 0;
  for (int i = 0; i < inst.num_depots(); ++i)
    for (int k = 0; k < inst.num_charger_types(); ++k) {
      const int d = x_cur.chi_depot[i][k] - x_prev.chi_depot[i][k];
      if (d > 0) total += inst.charger_types[k].price * d;
    }
  for (int j = 0; j < inst.num_terminals(); ++j) {
    const int d = x_cur.chi_terminal[j] - x_prev.chi_terminal[j];
    if (d > 0) total += inst.costs.onroute_charger_price * d;
  }
  for (int b = 0; b < inst.num_bus_types(); ++b) {
    long prev = 0, cur = 0;
    for (int r = 0; r < inst.num_routes(); ++r) {
      prev += x_prev.eta_depot[r][b];
      cur += x_cur.eta_depot[r][b];
    }
    if (cur > prev) total += inst.bus_types[b].price * (cur - prev);
  }
  long prev_or = 0, cur_or = 0;
  for (int r = 0; r < inst.num_routes(); ++r) {
    prev_or += x_prev.eta_onroute[r];
    cur_or += x_cur.eta_onroute[r];
  }
  if (cur_or > prev_or) total += inst.costs.onroute_bus_price * (cur_or - prev_or);
  return total;
}

Money maintenance_cost_cents(const Instance& inst, const StrategicState& x) {
  long conv = 0;
  for (int r = 0; r < inst.num_routes(); ++r) conv += x.eta_conventional[r];
  return inst.costs.conventional_maintenance * conv;
}

}  // namespace bfep
