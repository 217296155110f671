#include <doctest.h>

#include "bfep/operational.hpp"
#include "bfep/preprocessing.hpp"
#include "support/fixtures.hpp"

using namespace bfep;

namespace {

// Two routes, three terminals: t0 covers both routes, t1 covers route 0 only,
// t2 covers the same routes as t0 with equal capacity.
Instance make_terminal_instance() {
  Instance inst = test::make_ec3_instance();
  inst.routes.push_back(inst.routes[0]);
  inst.routes[1].id = "r1";
  inst.kappa.push_back(inst.kappa[0]);
  inst.charge_cost.push_back(inst.charge_cost[0]);
  inst.terminals = {{"t0", 2}, {"t1", 2}, {"t2", 2}};
  inst.routes[0].terminals = {0, 1, 2};
  inst.routes[1].terminals = {0, 2};
  inst.rho = 8;
  inst.initial_state = zero_state(inst);
  inst.initial_state.chi_depot[0][0] = 2;
  inst.initial_state.eta_depot = {{3}, {3}};
  return inst;
}

}  // namespace

TEST_CASE("dominance follows the three conditions") {
  Instance inst = make_terminal_instance();
  const DominanceMap map = compute_dominance(inst);
  // strict subset of routes: t1 hosts {r0} against t0's {r0, r1}
  CHECK(map.dominates(0, 1));
  CHECK(!map.dominates(1, 0));
  // equal route sets, equal caps: index breaks the tie, lower index loses
  CHECK(map.dominates(2, 0));
  CHECK(!map.dominates(0, 2));

  // equal route sets with strictly smaller capacity
  inst.terminals[2].host_cap = 1;
  const DominanceMap map2 = compute_dominance(inst);
  CHECK(map2.dominates(0, 2));
  CHECK(!map2.dominates(2, 0));
}

TEST_CASE("dominance is a strict partial order") {
  const Instance inst = make_terminal_instance();
  const DominanceMap map = compute_dominance(inst);
  for (int a = 0; a < inst.num_terminals(); ++a) {
    CHECK(!map.dominates(a, a));
    for (int b = 0; b < inst.num_terminals(); ++b)
      if (map.dominates(a, b)) CHECK(!map.dominates(b, a));
  }
  for (int a = 0; a < inst.num_terminals(); ++a)
    for (int b = 0; b < inst.num_terminals(); ++b)
      for (int c = 0; c < inst.num_terminals(); ++c)
        if (a != c && map.dominates(a, b) && map.dominates(b, c)) CHECK(map.dominates(a, c));
}

TEST_CASE("dominated bound arithmetic") {
  Instance inst = make_terminal_instance();
  inst.routes[0].demand[0] = {5, 5, 5, 5, 5, 5};
  inst.routes[1].demand[0] = {5, 5, 5, 5, 5, 5};
  // rho=8, peak connected demand 10, cap 2 -> max{0, ceil(10/8) - 2} = 0
  CHECK(dominated_bound(inst, 0, 1, 0) == 0);
  inst.routes[0].demand[0] = {20, 20, 20, 20, 20, 20};
  inst.routes[1].demand[0] = {20, 20, 20, 20, 20, 20};
  // peak 40 -> ceil(40/8) - 2 = 3
  CHECK(dominated_bound(inst, 0, 1, 0) == 3);
  inst.routes[0].demand[0] = {0, 0, 0, 0, 0, 0};
  inst.routes[1].demand[0] = {0, 0, 0, 0, 0, 0};
  CHECK(dominated_bound(inst, 0, 1, 0) == 0);
}

TEST_CASE("preprocessing removes fully dominated terminals") {
  const Instance inst = make_terminal_instance();
  const PreprocessReport rep = apply_preprocessing(inst);
  // peak connected demand 6 fits under rho * cap, so dominated bounds are 0
  CHECK(rep.removed[0] == 1);  // loses the index tie-break against t2
  CHECK(rep.removed[1] == 1);
  CHECK(rep.removed[2] == 0);
  for (int p = 0; p < inst.periods; ++p) {
    CHECK(rep.terminal_bound[p][1] == 0);
    CHECK(rep.terminal_bound[p][2] == inst.terminals[2].host_cap);
  }
  const std::string js = rep.to_json();
  CHECK(js.find("removed_terminals") != std::string::npos);
  CHECK(js.find("envelopes") != std::string::npos);
}

TEST_CASE("stationary demand gives period-invariant bounds") {
  Instance inst = make_terminal_instance();
  inst.periods = 2;
  for (auto& r : inst.routes) r.demand = {r.demand[0], r.demand[0]};
  inst.budgets = {inst.budgets[0], inst.budgets[0]};
  inst.retirement_caps = {6, 0};
  const PreprocessReport rep = apply_preprocessing(inst);
  CHECK(rep.terminal_bound[0] == rep.terminal_bound[1]);
}

TEST_CASE("fleet envelope of the worked example is one collinear piece") {
  const Instance inst = test::make_ec3_instance();
  // grid: (0,3),(1,2),(2,1),(3,0) is collinear
  const auto constraints = fleet_envelope_constraints(inst, 0, 0);
  REQUIRE(constraints.size() == 1);
  CHECK(constraints[0].kind == EnvelopeConstraint::Kind::Piece);
  CHECK(constraints[0].slope == doctest::Approx(-1.0));
  CHECK(constraints[0].intercept == doctest::Approx(3.0));
}

TEST_CASE("zero-demand route yields no envelope constraints") {
  Instance inst = test::make_ec3_instance();
  inst.routes[0].demand[0] = {0, 0, 0, 0, 0, 0};
  CHECK(fleet_envelope_constraints(inst, 0, 0).empty());
}

TEST_CASE("infeasible grid prefix becomes a floor constraint") {
  Instance inst = test::make_ec3_instance();
  inst.bus_types.clear();
  inst.costs.service.clear();
  inst.costs.idle.clear();
  inst.kappa[0].clear();
  inst.charge_cost[0].clear();
  inst.initial_state.eta_depot[0].clear();
  inst.initial_state.eta_conventional[0] = 3;
  // no depot types: m < peak is infeasible, m = peak needs zero depot buses
  const auto constraints = fleet_envelope_constraints(inst, 0, 0);
  REQUIRE(constraints.size() == 1);
  CHECK(constraints[0].kind == EnvelopeConstraint::Kind::Floor);
  CHECK(constraints[0].floor_m == 3);
}

TEST_CASE("every grid point satisfies every emitted envelope inequality") {
  const Instance inst = test::make_ec3_instance();
  const auto constraints = fleet_envelope_constraints(inst, 0, 0);
  const int peak = inst.peak_demand(0, 0);
  for (int m = 0; m <= peak; ++m) {
    const int fleet = min_depot_fleet(inst, 0, 0, m);
    REQUIRE(fleet != kMinFleetInfeasible);
    for (const auto& c : constraints) {
      if (c.kind == EnvelopeConstraint::Kind::Floor)
        CHECK(m >= c.floor_m);
      else
        CHECK(fleet >= c.slope * m + c.intercept - 1e-9);
    }
  }
  // the collinear grid puts every point on the hull, met with equality
  for (int m = 0; m <= peak; ++m)
    CHECK(min_depot_fleet(inst, 0, 0, m) ==
          doctest::Approx(constraints[0].slope * m + constraints[0].intercept));
}
