#pragma once

#include <vector>

#include "bfep/operational.hpp"
#include "bfep/preprocessing.hpp"
#include "bfep/solve_result.hpp"
#include "bfep/strategic.hpp"

namespace bfep {

/// Arc subsets of the depot-BEB scheduling graphs, indexed canonically by
/// (period, route, bus type, arc position).
struct ArcSet {
  std::vector<std::vector<std::vector<std::vector<char>>>> allowed;  // [p][r][b][arc]

  static ArcSet none(const Instance& inst);
  void unite(const ArcSet& other);
  long count() const;
  long total() const;
};

struct ExtensiveOptions {
  bool integrality = true;
  bool no_early_charge = false;
  const ArcSet* arc_restriction = nullptr;  // flows allowed on these arcs only
  bool policy_restriction = false;  // no early charging + no idling below full
                                    // charge during demanded intervals
  StrategicWeights weights;         // empty -> discounted defaults
};

/// The monolithic model: investment polytope plus every period's scheduling
/// block, schedule costs discounted into the objective.
struct ExtensiveModel {
  milp::Model model;
  StrategicVars svars;
  std::vector<OperationalModelHandle> ops;  // per period (bookkeeping)
  std::vector<double> opex_weight;          // objective scale of each block
};

ExtensiveModel build_extensive(const Instance& inst, const PreprocessReport& pre,
                               const ExtensiveOptions& opts = {});

/// Raw (undiscounted) schedule cost of one period's block at a primal point.
double block_cost(const Instance& inst, const OperationalModelHandle& h,
                  const std::vector<double>& primal);

/// Arcs carrying flow above tol at a primal point of an extensive model.
ArcSet collect_active_arcs(const Instance& inst, const ExtensiveModel& ext,
                           const std::vector<double>& primal, double tol = 1e-6);

PlanSolution extract_plan(const Instance& inst, const ExtensiveModel& ext,
                          const std::vector<double>& primal);
std::vector<double> plan_to_vector(const Instance& inst, const ExtensiveModel& ext,
                                   const PlanSolution& plan);

SolveResult solve_extensive(const Instance& inst, const PreprocessReport& pre,
                            const milp::SolveLimits& limits = {},
                            const PlanSolution* warm = nullptr);

/// Time split of the arc-selection run: heuristic_share of the budget goes to
/// the restricted phases, ip2_share of that to the second restricted IP, and
/// the remainder to the final unrestricted solve. Unused time rolls forward.
struct PhasePlan {
  double heuristic_share = 0.75;
  double ip2_share = 0.75;
};

SolveResult run_arc_selection(const Instance& inst, const PreprocessReport& pre,
                              const PhasePlan& plan, const milp::SolveLimits& limits,
                              MinFleetCapVariant sweep_variant =
                                  MinFleetCapVariant::ConventionalPlusOnroute);

SolveResult run_policy_restriction(const Instance& inst, const PreprocessReport& pre,
                                   const milp::SolveLimits& limits);

}  // namespace bfep
