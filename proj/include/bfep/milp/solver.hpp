#pragma once

#include <memory>
#include <string>

#include "bfep/milp/model.hpp"

namespace bfep::milp {

/// Capability contract every optimization module codes against: LP solves
/// with duals and Farkas rays, MIP solves with warm start, time limit and
/// relative gap. Backends register by name; BFEP_SOLVER selects one.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveOutcome solve_lp(const Model& model, const SolveLimits& limits,
                                bool want_ray) const = 0;
  virtual SolveOutcome solve_mip(const Model& model, const SolveLimits& limits,
                                 const std::vector<double>* warm_start) const = 0;
};

/// Backend selected by the BFEP_SOLVER environment variable ("builtin" when
/// unset). Throws BackendError for unknown names.
const SolverBackend& default_backend();
const SolverBackend& backend_by_name(const std::string& name);

/// Convenience wrappers over the default backend.
SolveOutcome solve_lp(const Model& model, const SolveLimits& limits = {}, bool want_ray = false);
SolveOutcome solve_mip(const Model& model, const SolveLimits& limits = {},
                       const std::vector<double>* warm_start = nullptr);

/// MPS export for debugging; variable/row names are bit-exact v{idx}/c{idx}.
std::string to_mps(const Model& model, const std::string& name = "BFEP");

}  // namespace bfep::milp
