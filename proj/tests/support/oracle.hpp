#pragma once

// Test-only brute-force oracles, independent of the simplex/branch-and-bound
// path they cross-check.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bfep/milp/model.hpp"

namespace bfep::test {

struct EnumResult {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
};

// Exhaustive integer enumeration of min c^T x over the model's rows, with x_j
// in [0, ub_j]. Row feasibility is pruned incrementally on <= rows.
inline EnumResult enumerate_ip(const milp::Model& model, const std::vector<int>& ub) {
  const int n = model.num_vars();
  EnumResult best;
  std::vector<int> x(n, 0);
  std::function<void(int, double)> rec = [&](int j, double cost) {
    if (cost >= best.value) return;
    if (j == n) {
      for (const auto& row : model.rows) {
        double act = 0;
        for (auto [v, c] : row.terms) act += c * x[v];
        if (row.sense == milp::RowSense::LE && act > row.rhs + 1e-9) return;
        if (row.sense == milp::RowSense::GE && act < row.rhs - 1e-9) return;
        if (row.sense == milp::RowSense::EQ && std::fabs(act - row.rhs) > 1e-9) return;
      }
      best.feasible = true;
      best.value = cost;
      best.arg = x;
      return;
    }
    for (int v = 0; v <= ub[j]; ++v) {
      x[j] = v;
      rec(j + 1, cost + model.vars[j].obj * v);
    }
    x[j] = 0;
  };
  rec(0, 0.0);
  return best;
}

}  // namespace bfep::test
