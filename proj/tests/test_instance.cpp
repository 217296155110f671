#include <doctest.h>

#include "bfep/generator.hpp"
#include "bfep/instance.hpp"
#include "bfep/instance_io.hpp"
#include "support/fixtures.hpp"

using namespace bfep;

TEST_CASE("worked-example fixture validates cleanly") {
  const Instance inst = test::make_ec3_instance();
  CHECK(validate_instance(inst).empty());
}

TEST_CASE("negative demand is flagged") {
  Instance inst = test::make_ec3_instance();
  inst.routes[0].demand[0][0] = -1;
  const auto violations = validate_instance(inst);
  REQUIRE(!violations.empty());
  bool found = false;
  for (const auto& v : violations) found |= v.code == "negative_demand";
  CHECK(found);
}

TEST_CASE("kappa must be nonincreasing in the charge state") {
  Instance inst = test::make_ec3_instance();
  inst.kappa[0][0][0][0] = {2, 2, 3};  // s=2 slower than s=1
  const auto violations = validate_instance(inst);
  bool found = false;
  for (const auto& v : violations) found |= v.code == "kappa_not_nonincreasing";
  CHECK(found);
}

TEST_CASE("kappa below one interval is flagged") {
  Instance inst = test::make_ec3_instance();
  inst.kappa[0][0][0][0] = {2, 1, 0};
  bool found = false;
  for (const auto& v : validate_instance(inst)) found |= v.code == "nonpositive_kappa";
  CHECK(found);
}

TEST_CASE("a route with demand but no way to serve it is flagged") {
  Instance inst = test::make_ec3_instance();
  inst.bus_types.clear();
  inst.costs.service.clear();
  inst.costs.idle.clear();
  inst.kappa[0].clear();
  inst.charge_cost[0].clear();
  inst.initial_state.eta_depot[0].clear();
  // no terminals, no depot bus types, no initial conventional buses
  bool found = false;
  for (const auto& v : validate_instance(inst)) found |= v.code == "unservable_route";
  CHECK(found);
}

TEST_CASE("save/load round-trips the fixture") {
  const Instance inst = test::make_ec3_instance();
  const std::string bytes = save_instance(inst);
  const Instance back = load_instance(bytes);
  CHECK(save_instance(back) == bytes);
  CHECK(back.periods == inst.periods);
  CHECK(back.intervals == inst.intervals);
  CHECK(back.kappa == inst.kappa);
  CHECK(back.routes[0].demand == inst.routes[0].demand);
  CHECK(back.initial_state.chi_depot == inst.initial_state.chi_depot);
  CHECK(back.budgets == inst.budgets);
}

TEST_CASE("truncated document raises a parse error with position") {
  const std::string bytes = save_instance(test::make_ec3_instance());
  CHECK_THROWS_AS(load_instance(bytes.substr(0, bytes.size() / 2)), ParseError);
}

TEST_CASE("unknown fields are rejected with a schema path") {
  std::string bytes = save_instance(test::make_ec3_instance());
  bytes.insert(bytes.find('{') + 1, "\"bogus\": 1,");
  CHECK_THROWS_AS(load_instance(bytes), SchemaError);
}

TEST_CASE("flatten/unflatten is the identity on states") {
  const Instance inst = test::make_ec3_instance();
  const std::vector<int> flat = flatten_state(inst, inst.initial_state);
  REQUIRE(static_cast<int>(flat.size()) == strategic_dim(inst));
  CHECK(flat[comp_chi_depot(inst, 0, 0)] == 2);
  CHECK(flat[comp_eta_depot(inst, 0, 0)] == 3);
  const StrategicState back = unflatten_state(inst, flat);
  CHECK(back.chi_depot == inst.initial_state.chi_depot);
  CHECK(back.eta_depot == inst.initial_state.eta_depot);
}

TEST_CASE("generator is deterministic and respects cardinalities") {
  GeneratorParams params;
  params.routes = 3;
  params.terminals = 5;
  params.periods = 2;
  params.intervals = 6;
  params.bus_types = 1;
  params.batteries = {3};
  const Instance a = generate_synthetic(params, 7);
  const Instance b = generate_synthetic(params, 7);
  CHECK(save_instance(a) == save_instance(b));
  CHECK(a.num_routes() == 3);
  CHECK(a.num_terminals() == 5);
  const Instance c = generate_synthetic(params, 8);
  CHECK(save_instance(a) != save_instance(c));
}

TEST_CASE("generator defaults follow the cost regime and validate") {
  GeneratorParams params;
  params.routes = 2;
  params.terminals = 2;
  params.periods = 2;
  params.intervals = 6;
  params.peak_max = 2;
  params.batteries = {3, 5};
  const Instance inst = generate_synthetic(params, 42);
  CHECK(validate_instance(inst).empty());
  CHECK(inst.bus_types[0].price == money_from_dollars(943000));
  CHECK(inst.bus_types[1].price == money_from_dollars(1093000));
  CHECK(inst.costs.onroute_charger_price == money_from_dollars(877590));
  CHECK(inst.charger_types[0].price == money_from_dollars(60050));
  CHECK(inst.rho == 8);
  CHECK(inst.gamma == doctest::Approx(0.96));
  CHECK(inst.terminals[0].host_cap == 2);
  // kappa = travel + ceil((s_b - s)/2), travel = 0
  CHECK(inst.kappa[0][0][0][0][0] == (3 + 1) / 2);
  // loads back identically
  const Instance back = load_instance(save_instance(inst));
  CHECK(save_instance(back) == save_instance(inst));
  CHECK(validate_instance(back).empty());
}

TEST_CASE("generator rejects empty systems") {
  GeneratorParams params;
  params.routes = 0;
  CHECK_THROWS_AS(generate_synthetic(params, 1), std::invalid_argument);
  params.routes = 1;
  params.intervals = 0;
  CHECK_THROWS_AS(generate_synthetic(params, 1), std::invalid_argument);
}
