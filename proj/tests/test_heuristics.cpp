#include <doctest.h>

#include "bfep/generator.hpp"
#include "bfep/heuristics.hpp"
#include "bfep/lbbd.hpp"
#include "bfep/soc_graph.hpp"
#include "support/fixtures.hpp"

using namespace bfep;

namespace {

Instance tiny_instance(std::uint64_t seed) {
  GeneratorParams params;
  params.routes = 2;
  params.depots = 1;
  params.terminals = 2;
  params.bus_types = 1;
  params.batteries = {3};
  params.periods = 2;
  params.intervals = 6;
  params.peak_min = 1;
  params.peak_max = 3;
  return generate_synthetic(params, seed);
}

}  // namespace

TEST_CASE("extensive solve matches the decomposition on the worked example") {
  const Instance inst = test::make_ec3_instance();
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  const SolveResult ext = solve_extensive(inst, empty_preprocessing(inst), lim);
  REQUIRE(ext.plan.has_value());
  // keeping the initial assets and running the 10 service intervals at $1
  CHECK(ext.upper_bound == doctest::Approx(10.0));
  const SolveResult lbbd = run_lbbd(inst, {});
  REQUIRE(lbbd.plan.has_value());
  CHECK(lbbd.upper_bound == doctest::Approx(ext.upper_bound).epsilon(1e-6));
}

TEST_CASE("zero budget holds the initial state through the horizon") {
  Instance inst = test::make_ec3_instance({100, 0, 0, 500}, 3);
  inst.gamma = 0.5;
  for (auto& b : inst.budgets) b = 0;
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  const SolveResult res = solve_extensive(inst, empty_preprocessing(inst), lim);
  REQUIRE(res.plan.has_value());
  for (int p = 0; p < 3; ++p) {
    CHECK(res.plan->states[p].chi_depot == inst.initial_state.chi_depot);
    CHECK(res.plan->states[p].eta_depot == inst.initial_state.eta_depot);
  }
  // discounted sum of the per-period schedule cost: 10 (1 + 1/2 + 1/4)
  CHECK(res.upper_bound == doctest::Approx(10.0 * (1 + 0.5 + 0.25)));
}

TEST_CASE("warm start bounds the incumbent of the extensive solve") {
  const Instance inst = tiny_instance(5);
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  const SolveResult base = solve_extensive(inst, empty_preprocessing(inst), lim);
  REQUIRE(base.plan.has_value());
  milp::SolveLimits quick;
  quick.rel_gap = 0.5;  // stop at the first incumbent no worse than the warm start
  const SolveResult warmed = solve_extensive(inst, empty_preprocessing(inst), quick, &*base.plan);
  REQUIRE(warmed.plan.has_value());
  CHECK(warmed.upper_bound <= base.upper_bound + 1e-6);
}

TEST_CASE("active arcs of the published circulation are exactly its support") {
  const Instance inst = test::make_ec3_instance();
  ExtensiveModel ext = build_extensive(inst, empty_preprocessing(inst), {});
  PlanSolution plan;
  plan.states = {inst.initial_state};
  plan.schedule = test::ec3_schedule(inst);
  const std::vector<double> v = plan_to_vector(inst, ext, plan);
  const ArcSet arcs = collect_active_arcs(inst, ext, v);
  CHECK(arcs.count() == 15);  // 10 service + 1 idle + 4 charge
  CHECK(arcs.total() == 60);  // 18 + 24 + 18 arcs in the graph

  const std::vector<double> zeros(ext.model.num_vars(), 0.0);
  CHECK(collect_active_arcs(inst, ext, zeros).count() == 0);

  // fractional flow above tolerance counts as active
  std::vector<double> frac = zeros;
  frac[ext.ops[0].vars[0].arc_base[0]] = 0.5;
  CHECK(collect_active_arcs(inst, ext, frac).count() == 1);
}

TEST_CASE("arc selection reaches the extensive optimum on a tiny instance") {
  const Instance inst = tiny_instance(7);
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  lim.time_limit_sec = 300;
  const SolveResult ext = solve_extensive(inst, empty_preprocessing(inst), lim);
  REQUIRE(ext.plan.has_value());
  const SolveResult as = run_arc_selection(inst, empty_preprocessing(inst), {}, lim);
  REQUIRE(as.plan.has_value());
  CHECK(as.upper_bound == doctest::Approx(ext.upper_bound).epsilon(1e-6));
  CHECK(as.lower_bound <= as.upper_bound + 1e-6);

  // phase order and the restriction chain: later phases never worsen
  REQUIRE(as.phases.size() == 6);
  CHECK(as.phases[0].phase == "LP1");
  CHECK(as.phases[1].phase == "LP2");
  CHECK(as.phases[2].phase == "SR");
  CHECK(as.phases[3].phase == "IP1");
  CHECK(as.phases[4].phase == "IP2");
  CHECK(as.phases[5].phase == "EX");
  double prev = milp::kInf;
  for (size_t i = 3; i < as.phases.size(); ++i) {
    if (as.phases[i].ub < milp::kInf) {
      CHECK(as.phases[i].ub <= prev + 1e-6);
      prev = as.phases[i].ub;
    }
  }
  // arc sets only grow between the restricted phases
  CHECK(as.phases[3].arcs_retained <= as.phases[4].arcs_retained);
}

TEST_CASE("policy restriction forbids early charging and busy idling") {
  const Instance inst = test::make_ec3_instance();
  for (int b = 0; b < inst.num_bus_types(); ++b) {
    const SocGraph g = build_soc_graph(inst, 0, 0, b);
    // count arcs surviving the policy rules: charge only from empty, idle
    // below full charge only in demand-free intervals (none here)
    int charge_ok = 0, idle_ok = 0;
    for (const SocArc& a : g.arcs()) {
      if (a.kind == ArcKind::Charge && a.tail_s == 0) ++charge_ok;
      if (a.kind == ArcKind::Idle && a.tail_s == 3) ++idle_ok;
    }
    CHECK(charge_ok == 6);
    CHECK(idle_ok == 6);
  }
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  lim.time_limit_sec = 300;
  const SolveResult pr = run_policy_restriction(inst, empty_preprocessing(inst), lim);
  REQUIRE(pr.plan.has_value());
  // the restricted phase needs a fourth bus (no daily three-service cover of
  // the demand profile exists under the rules), so its bound sits above the
  // unrestricted optimum of 10; the warm-started full solve recovers it
  REQUIRE(pr.phases.size() == 2);
  CHECK(pr.phases[0].phase == "PR");
  CHECK(pr.phases[0].ub > 10.0 + 1e-6);
  CHECK(pr.upper_bound == doctest::Approx(10.0));
}

TEST_CASE("policy restriction with zero demand is free") {
  Instance inst = test::make_ec3_instance();
  inst.routes[0].demand[0] = {0, 0, 0, 0, 0, 0};
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  const SolveResult pr = run_policy_restriction(inst, empty_preprocessing(inst), lim);
  REQUIRE(pr.plan.has_value());
  CHECK(pr.upper_bound == doctest::Approx(0.0));
}

TEST_CASE("no-early-charge restriction empties the upper charge states") {
  const Instance inst = tiny_instance(3);
  ExtensiveOptions eo;
  eo.integrality = false;
  eo.no_early_charge = true;
  ExtensiveModel ext = build_extensive(inst, empty_preprocessing(inst), eo);
  const milp::SolveOutcome lp = milp::solve_lp(ext.model);
  REQUIRE(lp.status == milp::SolveStatus::Optimal);
  const ArcSet active = collect_active_arcs(inst, ext, lp.x);
  for (int p = 0; p < inst.periods; ++p)
    for (int r = 0; r < inst.num_routes(); ++r)
      for (int b = 0; b < inst.num_bus_types(); ++b) {
        const SocGraph g = build_soc_graph(inst, p, r, b);
        for (size_t a = 0; a < g.arcs().size(); ++a)
          if (g.arcs()[a].kind == ArcKind::Charge && g.arcs()[a].tail_s > 0)
            CHECK(active.allowed[p][r][b][a] == 0);
      }
}
