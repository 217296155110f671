#include <doctest.h>

#include <cmath>

#include "bfep/generator.hpp"
#include "bfep/lbbd.hpp"
#include "bfep/milp/solver.hpp"
#include "support/fixtures.hpp"

using namespace bfep;

namespace {

std::vector<double> to_d(const std::vector<int>& v) { return {v.begin(), v.end()}; }

Instance tiny_instance(std::uint64_t seed, int routes = 2, int periods = 2) {
  GeneratorParams params;
  params.routes = routes;
  params.depots = 1;
  params.terminals = 2;
  params.bus_types = 1;
  params.batteries = {3};
  params.periods = periods;
  params.intervals = 6;
  params.peak_min = 1;
  params.peak_max = 3;
  return generate_synthetic(params, seed);
}

}  // namespace

TEST_CASE("duty-cycle and charge-rate bounds on the worked example") {
  const Instance inst = test::make_ec3_instance();
  // battery 3, kappa=(2,2,1): best of 3/5, 2/4, 1/2
  CHECK(duty_cycle_bound(inst, 0, 0) == doctest::Approx(0.6));
  // best of 3/2, 2/2, 1/1
  CHECK(charge_rate_bound(inst, 0, 0) == doctest::Approx(1.5));
}

TEST_CASE("guiding point: zero demand gives zero cost anchors") {
  Instance inst = test::make_ec3_instance();
  inst.routes[0].demand[0] = {0, 0, 0, 0, 0, 0};
  const PreprocessReport pre = empty_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  CHECK(g.theta[0] == doctest::Approx(0.0));
  CHECK(g.theta_route[0][0] == doctest::Approx(0.0));
  for (int c = 0; c < strategic_dim(inst); ++c) CHECK(g.x[0][c] >= 0.1 - 1e-9);
}

TEST_CASE("no method separates the guiding point") {
  const Instance inst = tiny_instance(11);
  const PreprocessReport pre = apply_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  for (const CutMethod method : {CutMethod::Standard, CutMethod::MW, CutMethod::MIS,
                                 CutMethod::Closest, CutMethod::DeepestL1}) {
    for (int p = 0; p < inst.periods; ++p) {
      const auto cut = separate_cut(inst, pre, method, p, g.x[p], g.theta[p], &g, -1);
      CHECK(!cut.has_value());
    }
  }
}

TEST_CASE("single-period guiding cost matches the relaxation's schedule cost") {
  const Instance inst = test::make_ec3_instance();
  const PreprocessReport pre = empty_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  // one route: the period anchor equals the per-route anchor
  CHECK(g.theta[0] == doctest::Approx(g.theta_route[0][0]));
  CHECK(g.theta[0] > 0.0);
}

TEST_CASE("zero assets with positive demand produce a feasibility cut") {
  const Instance inst = tiny_instance(3);
  const PreprocessReport pre = apply_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  const std::vector<double> x_zero(strategic_dim(inst), 0.0);
  for (const CutMethod method : {CutMethod::Standard, CutMethod::MW, CutMethod::MIS,
                                 CutMethod::Closest, CutMethod::DeepestL1}) {
    const auto cut = separate_cut(inst, pre, method, 0, x_zero, 0.0, &g, -1);
    REQUIRE_MESSAGE(cut.has_value(), "method should separate the origin");
    CHECK(cut->violated(x_zero, 0.0));
    // guide never violated
    CHECK(!cut->violated(g.x[0], g.theta[0]));
    if (method == CutMethod::Standard) CHECK(cut->theta_coef == doctest::Approx(0.0));
  }
}

TEST_CASE("theta below cost at a feasible point produces an optimality cut") {
  const Instance inst = test::make_ec3_instance();
  const PreprocessReport pre = empty_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  const std::vector<double> x = to_d(flatten_state(inst, inst.initial_state));
  for (const CutMethod method : {CutMethod::Standard, CutMethod::MW, CutMethod::MIS,
                                 CutMethod::Closest, CutMethod::DeepestL1}) {
    const auto cut = separate_cut(inst, pre, method, 0, x, 0.0, &g, -1);
    REQUIRE(cut.has_value());
    CHECK(cut->theta_coef < -1e-9);  // pure optimality flavor
    CHECK(cut->violated(x, 0.0));
    CHECK(!cut->violated(g.x[0], g.theta[0]));
  }
}

TEST_CASE("single-route cuts carry only that route's strategic columns") {
  const Instance inst = tiny_instance(19);
  const PreprocessReport pre = apply_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  const std::vector<double> x_zero(strategic_dim(inst), 0.0);
  const auto cut = separate_cut(inst, pre, CutMethod::Closest, 0, x_zero, 0.0, &g, 1);
  REQUIRE(cut.has_value());
  CHECK(cut->route == 1);
  // components tied to route 0's fleet must not appear
  for (int b = 0; b < inst.num_bus_types(); ++b)
    CHECK(cut->x_coefs[comp_eta_depot(inst, 0, b)] == doctest::Approx(0.0));
  CHECK(cut->x_coefs[comp_eta_onroute(inst, 0)] == doctest::Approx(0.0));
  CHECK(cut->x_coefs[comp_eta_conventional(inst, 0)] == doctest::Approx(0.0));
}

TEST_CASE("zero-demand route separates nothing") {
  Instance inst = tiny_instance(5);
  for (auto& day : inst.routes[0].demand) day.assign(inst.intervals, 0);
  const PreprocessReport pre = empty_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  const std::vector<double> x_zero(strategic_dim(inst), 0.0);
  const auto cut = separate_cut(inst, pre, CutMethod::Closest, 0, x_zero, 0.0, &g, 0);
  CHECK(!cut.has_value());
}

TEST_CASE("closest and deepest separations coincide") {
  const Instance inst = tiny_instance(23);
  const PreprocessReport pre = apply_preprocessing(inst);
  const GuidingPoint g = compute_guiding_point(inst, pre);
  int checked = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    std::vector<double> x(strategic_dim(inst), 0.0);
    for (int c = 0; c < strategic_dim(inst); ++c) x[c] = static_cast<int>((s * 2654435761u + c * 40503u) % 3);
    const EquivalenceReport rep = closest_equals_cw_deepest(inst, pre, 0, x, 0.0, g, -1);
    if (!rep.both_separating) continue;
    ++checked;
    CHECK(rep.objectives_equal);
    CHECK((rep.cuts_match || rep.degenerate));
  }
  CHECK(checked >= 3);
  // the guiding point itself: both return nothing
  const EquivalenceReport at_guide =
      closest_equals_cw_deepest(inst, pre, 0, g.x[0], g.theta[0], g, -1);
  CHECK(!at_guide.both_separating);
  CHECK(at_guide.closest_objective == doctest::Approx(0.0));
}

TEST_CASE("single-route fleet probe flags impossible assignments") {
  const Instance inst = test::make_ec3_instance();
  std::vector<int> x(strategic_dim(inst), 0);
  // zero fleet, positive demand
  CHECK(feasibility_probe_single_route(inst, 0, 0, x));
  // conventional buses at the peak cover everything
  x[comp_eta_conventional(inst, 0)] = 3;
  CHECK(!feasibility_probe_single_route(inst, 0, 0, x));
  // two depot buses cannot cover the worked example
  x[comp_eta_conventional(inst, 0)] = 0;
  x[comp_eta_depot(inst, 0, 0)] = 2;
  CHECK(feasibility_probe_single_route(inst, 0, 0, x));
  x[comp_eta_depot(inst, 0, 0)] = 3;
  CHECK(!feasibility_probe_single_route(inst, 0, 0, x));
}

TEST_CASE("aggregate probe bounds the depot charger total") {
  const Instance inst = test::make_ec3_instance();
  std::vector<int> x = flatten_state(inst, inst.initial_state);
  // fleet of 3 but no chargers: some charger is required
  x[comp_chi_depot(inst, 0, 0)] = 0;
  const auto lb = feasibility_probe_aggregate(inst, 0, x);
  REQUIRE(lb.has_value());
  CHECK(*lb >= 1);
  // with ample chargers the probe finds no shortfall
  x[comp_chi_depot(inst, 0, 0)] = 5;
  const auto lb2 = feasibility_probe_aggregate(inst, 0, x);
  REQUIRE(lb2.has_value());
  CHECK(*lb2 <= 5);
}

TEST_CASE("indicator pool reuses thresholds and encodes the lower orthant") {
  const Instance inst = test::make_ec3_instance();
  milp::Model master;
  const PreprocessReport pre = empty_preprocessing(inst);
  StrategicVars sv = emit_strategic(master, inst, pre, default_weights(inst));
  const int theta = master.add_var(milp::VarKind::Continuous, 0.0, milp::kInf, 1.0);

  IndicatorPool pool;
  const IndicatorPool::Key key{0, IndicatorPool::KeyKind::Component,
                               comp_eta_depot(inst, 0, 0), 3};
  const int a1 = pool.get_or_create(master, inst, sv.x, key);
  const int a2 = pool.get_or_create(master, inst, sv.x, key);
  CHECK(a1 == a2);
  CHECK(pool.size() == 1);

  // Optimality-cut encoding: Theta + Q * sum(a) >= Q forces Theta >= Q on the
  // lower orthant of x' (here x' = the initial state, which the plan cannot
  // shrink anyway).
  const std::vector<int> x_source = flatten_state(inst, inst.initial_state);
  const double q = 42.0;
  std::vector<std::pair<int, double>> terms{{theta, 1.0}};
  for (int c = 0; c < strategic_dim(inst); ++c) {
    const int a = pool.get_or_create(master, inst, sv.x,
                                     {0, IndicatorPool::KeyKind::Component, c, x_source[c]});
    terms.push_back({a, q});
  }
  master.add_row(std::move(terms), milp::RowSense::GE, q);
  // clamp x <= x': Theta must rise to 42
  for (int c = 0; c < strategic_dim(inst); ++c)
    master.vars[sv.x[0][c]].hi = x_source[c];
  milp::SolveLimits lim;
  lim.rel_gap = 0.0;
  const milp::SolveOutcome r = milp::solve_mip(master, lim);
  REQUIRE(r.feasible());
  CHECK(r.x[theta] >= q - 1e-6);
}

TEST_CASE("decomposition matches the monolithic solve on a tiny instance") {
  const Instance inst = tiny_instance(7);
  LbbdConfig cfg;
  cfg.rel_tol = 1e-9;
  const SolveResult lbbd = run_lbbd(inst, cfg);
  REQUIRE(lbbd.plan.has_value());
  milp::SolveLimits lim;
  lim.rel_gap = 1e-9;
  const SolveResult ext = solve_extensive(inst, apply_preprocessing(inst), lim);
  REQUIRE(ext.plan.has_value());
  CHECK(lbbd.upper_bound ==
        doctest::Approx(ext.upper_bound).epsilon(1e-6));
  // bounds sandwich the optimum and the log is monotone
  double prev_lb = 0.0;
  for (const IterationLog& log : lbbd.iterations) {
    CHECK(log.lb >= prev_lb - 1e-9);
    prev_lb = log.lb;
    if (log.ub < milp::kInf) CHECK(log.lb <= log.ub + 1e-6);
  }
}

TEST_CASE("unit tolerance stops after the first incumbent") {
  const Instance inst = tiny_instance(13);
  LbbdConfig cfg;
  cfg.rel_tol = 1.0;
  const SolveResult res = run_lbbd(inst, cfg);
  REQUIRE(res.plan.has_value());
  int incumbents = 0;
  for (const IterationLog& log : res.iterations)
    if (log.ub < milp::kInf) ++incumbents;
  CHECK(incumbents <= 1);
}

TEST_CASE("all accelerations off reaches the same optimum") {
  const Instance inst = tiny_instance(5);
  LbbdConfig fast;
  fast.rel_tol = 1e-9;
  LbbdConfig bare;
  bare.rel_tol = 1e-9;
  bare.method = CutMethod::Standard;
  bare.preprocessing = false;
  bare.disaggregation = false;
  bare.partial_decomposition = false;
  bare.monotone_strengthening = false;
  const SolveResult a = run_lbbd(inst, fast);
  const SolveResult b = run_lbbd(inst, bare);
  REQUIRE(a.plan.has_value());
  REQUIRE(b.plan.has_value());
  CHECK(a.upper_bound == doctest::Approx(b.upper_bound).epsilon(1e-6));
}

TEST_CASE("impossible budgets are reported infeasible") {
  Instance inst = tiny_instance(9);
  for (auto& b : inst.budgets) b = 0;  // no money, full retirement forced
  const SolveResult res = run_lbbd(inst, {});
  CHECK(res.status == milp::SolveStatus::Infeasible);
  CHECK(!res.message.empty());
}
