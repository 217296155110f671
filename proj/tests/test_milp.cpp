#include <doctest.h>

#include <random>

#include "bfep/milp/branch_bound.hpp"
#include "bfep/milp/simplex.hpp"
#include "bfep/milp/solver.hpp"

using namespace bfep::milp;

TEST_CASE("lp: min x subject to x >= 3") {
  Model m;
  const int x = m.add_var(VarKind::Continuous, 0, kInf, 1.0);
  m.add_row({{x, 1.0}}, RowSense::GE, 3.0);
  const SolveOutcome r = solve_lp(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.obj == doctest::Approx(3.0));
  CHECK(r.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("lp: infeasible box yields a certifying ray") {
  Model m;
  const int x = m.add_var(VarKind::Continuous, 0, kInf, 0.0);
  m.add_row({{x, 1.0}}, RowSense::LE, -1.0);
  const SolveOutcome r = solve_lp(m, {}, /*want_ray=*/true);
  REQUIRE(r.status == SolveStatus::Infeasible);
  REQUIRE(!r.ray.empty());
  CHECK(r.ray[0] <= 0.0);              // sign-matched to the <= row
  CHECK(r.ray[0] * 1.0 <= 1e-9);       // ray^T A <= 0
  CHECK(r.ray[0] * -1.0 > 1e-9);       // ray^T rhs > 0
  CHECK(std::fabs(r.ray[0]) == doctest::Approx(1.0));  // sup-norm one
}

TEST_CASE("mip: integer rounding up") {
  Model m;
  const int x = m.add_var(VarKind::Integer, 0, kInf, 1.0);
  m.add_row({{x, 1.0}}, RowSense::GE, 2.5);
  const SolveOutcome r = solve_mip(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.obj == doctest::Approx(3.0));
}

TEST_CASE("mip: warm start bounds the incumbent; infeasible warm rejected") {
  Model m;
  const int x = m.add_var(VarKind::Integer, 0, 10, 1.0);
  m.add_row({{x, 1.0}}, RowSense::GE, 4.0);
  std::vector<double> warm = {6.0};
  SolveOutcome r = solve_mip(m, {}, &warm);
  CHECK(!r.warm_start_rejected);
  CHECK(r.ub <= 6.0 + 1e-9);
  CHECK(r.obj == doctest::Approx(4.0));

  std::vector<double> bad = {3.0};
  r = solve_mip(m, {}, &bad);
  CHECK(r.warm_start_rejected);
  CHECK(!r.message.empty());
  CHECK(r.obj == doctest::Approx(4.0));

  // warm start equal to the optimum is returned as the bound
  std::vector<double> exact = {4.0};
  r = solve_mip(m, {}, &exact);
  CHECK(!r.warm_start_rejected);
  CHECK(r.ub == doctest::Approx(4.0));
}

TEST_CASE("lp duals satisfy stationarity and complementary slackness") {
  std::mt19937_64 rng(20240817);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) / static_cast<double>(1ull << 53);
  };
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4, rows = 3;
    Model m;
    for (int j = 0; j < n; ++j) m.add_var(VarKind::Continuous, 0, kInf, unif(0.1, 5));
    for (int i = 0; i < rows; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, unif(-1, 2)});
      m.add_row(std::move(terms), RowSense::GE, unif(0.5, 4));
    }
    const SolveOutcome r = solve_lp(m);
    if (r.status != SolveStatus::Optimal) continue;
    ++solved;
    for (int j = 0; j < n; ++j) {
      double reduced = m.vars[j].obj;
      for (int i = 0; i < rows; ++i)
        for (auto [jj, c] : m.rows[i].terms)
          if (jj == j) reduced -= r.duals[i] * c;
      CHECK(reduced >= -1e-6);
      CHECK(std::fabs(reduced * r.x[j]) < 1e-5);
    }
    for (int i = 0; i < rows; ++i) {
      CHECK(r.duals[i] >= -1e-8);
      CHECK(std::fabs(r.duals[i] * (m.activity(i, r.x) - m.rows[i].rhs)) < 1e-5);
    }
  }
  CHECK(solved > 50);
}

TEST_CASE("deterministic repeat solves") {
  Model m;
  m.maximize = true;
  for (int j = 0; j < 6; ++j) m.add_var(VarKind::Binary, 0, 1, 3 + j);
  m.add_row({{0, 2.0}, {1, 3.0}, {2, 4.0}, {3, 5.0}, {4, 6.0}, {5, 7.0}}, RowSense::LE, 11.0);
  SolveLimits lim;
  lim.rel_gap = 0.0;
  const SolveOutcome a = solve_mip(m, lim);
  const SolveOutcome b = solve_mip(m, lim);
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(a.obj == b.obj);
  CHECK(a.x == b.x);
}

TEST_CASE("unknown backend name raises a typed error") {
  CHECK_THROWS_AS(backend_by_name("no-such-solver"), BackendError);
  CHECK(backend_by_name("builtin").name() == "builtin");
}

TEST_CASE("mps export uses bit-exact v/c names") {
  Model m;
  const int x = m.add_var(VarKind::Integer, 0, 5, 2.0);
  const int y = m.add_var(VarKind::Continuous, 1, kInf, 1.0);
  m.add_row({{x, 1.0}, {y, 2.0}}, RowSense::LE, 7.0);
  m.add_row({{x, 1.0}}, RowSense::EQ, 3.0);
  const std::string mps = to_mps(m, "T");
  CHECK(mps.find(" L  c0") != std::string::npos);
  CHECK(mps.find(" E  c1") != std::string::npos);
  CHECK(mps.find("v0") != std::string::npos);
  CHECK(mps.find("v1") != std::string::npos);
  CHECK(mps.find("INTORG") != std::string::npos);
  CHECK(mps.find("ENDATA") != std::string::npos);
}

TEST_CASE("time limit surfaces partial bounds") {
  // A knapsack family big enough to take some nodes; zero time budget forces
  // an immediate stop with no incumbent.
  Model m;
  m.maximize = true;
  std::mt19937_64 rng(5);
  for (int j = 0; j < 30; ++j)
    m.add_var(VarKind::Binary, 0, 1, 1.0 + static_cast<double>(rng() % 100) / 7.0);
  std::vector<std::pair<int, double>> terms;
  for (int j = 0; j < 30; ++j) terms.push_back({j, 1.0 + static_cast<double>(rng() % 50) / 9.0});
  m.add_row(std::move(terms), RowSense::LE, 40.0);
  SolveLimits lim;
  lim.time_limit_sec = 0.0;
  const SolveOutcome r = solve_mip(m, lim);
  CHECK((r.status == SolveStatus::TimeLimit || r.status == SolveStatus::Feasible));
}
