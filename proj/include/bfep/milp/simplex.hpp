#pragma once

#include "bfep/milp/model.hpp"

namespace bfep::milp {

/// Snapshot of a simplex basis for warm starts: the basic column per row and
/// the nonbasic rest-state of every column (structural then slack).
struct SimplexBasis {
  std::vector<int> basic;            // [row] column index
  std::vector<unsigned char> state;  // [column] 0 basic, 1 at lower, 2 at upper, 3 free-at-zero
};

struct LpOptions {
  bool want_ray = false;        // compute a Farkas certificate on infeasibility
  long iteration_limit = -1;    // <0: scale-based default
  // Optional per-variable bound overrides (same length as model.vars); used by
  // branch-and-bound so nodes do not copy the whole model.
  const std::vector<double>* lo_override = nullptr;
  const std::vector<double>* hi_override = nullptr;
  const SimplexBasis* warm_basis = nullptr;  // start here when structurally valid
  SimplexBasis* basis_out = nullptr;         // final basis, for reuse
};

/// Solves the LP relaxation of `model` (integrality is ignored).
/// On Optimal, `duals` satisfy c = A^T y + z with z sign-feasible for the
/// variable bounds; equivalently y_i <= 0 on binding <= rows and y_i >= 0 on
/// binding >= rows for minimization.
/// On Infeasible with `want_ray` and a model whose variables are all [0, inf),
/// `ray` holds y with y^T A <= 0 (componentwise), y^T rhs > 0, sign-matched to
/// row senses and normalized to ||y||_inf = 1.
SolveOutcome simplex_solve(const Model& model, const LpOptions& opts = {});

}  // namespace bfep::milp
