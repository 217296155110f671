#pragma once

#include "bfep/milp/model.hpp"

namespace bfep::milp {

/// Branch-and-bound over the simplex LP relaxation. Deterministic: best-bound
/// node selection interleaved with diving, most-fractional branching, fixed
/// tie-breaking. A feasible warm start seeds the incumbent; an infeasible one
/// is reported via `warm_start_rejected` and the solve continues cold.
SolveOutcome branch_and_bound(const Model& model, const SolveLimits& limits,
                              const std::vector<double>* warm_start = nullptr);

}  // namespace bfep::milp
