#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfep/instance.hpp"
#include "bfep/preprocessing.hpp"
#include "bfep/solve_result.hpp"

namespace bfep {

/// Exact integer re-check of every planning and scheduling constraint family;
/// no solver involved. Empty result = the plan is feasible.
std::vector<Violation> verify_solution(const Instance& inst, const PlanSolution& plan);

struct CostBreakdown {
  struct PeriodRow {
    Money invest = 0;       // I_p
    Money maintenance = 0;  // H_p
    Money schedule = 0;     // Q_p (from the plan's schedules)
    Money opex = 0;         // H_p + Q_p
    // Savings convention: (O_{p-1} - O_p) / I_p, positive when operations get
    // cheaper; absent when I_p = 0 or the reference cost is unavailable.
    std::optional<double> roi;
    double roi_raw = 0.0;  // (O_p - O_{p-1}) / I_p, the sign-flipped form
  };
  std::vector<PeriodRow> periods;
  Money initial_opex = 0;    // O(x_0), solved fresh; kMoneyInfinity if x_0 cannot operate
  double discounted_total = 0.0;  // dollars: sum gamma^p (I_p + O_p)

  std::string to_json() const;
  /// Plot series: per-period, per-interval buses in service by class, and
  /// charger counts per location per period.
  static std::string service_csv(const Instance& inst, const PlanSolution& plan);
  static std::string chargers_csv(const Instance& inst, const PlanSolution& plan);
};

/// Throws std::invalid_argument when the plan fails verify_solution.
CostBreakdown cost_breakdown(const Instance& inst, const PlanSolution& plan);

struct MonotoneOpexReport {
  enum class Status { Ok, NotApplicable, Violated };
  Status status = Status::NotApplicable;
  std::string note;
  int violating_period = -1;  // first p with O(x_{p-1}) < O(x_p)
};

/// Operational costs decrease along optimal plans when demand is stationary
/// and retirement binds only in the last period; `tol` absorbs solver gap.
MonotoneOpexReport check_monotone_opex(const Instance& inst, const PlanSolution& plan,
                                       double tol = 1e-6);

struct ThreePhaseReport {
  bool applicable = false;
  std::string note;
  // Maximal run of zero-investment periods [idle_begin, idle_end), 0-based;
  // empty when every period invests.
  int idle_begin = -1;
  int idle_end = -1;
  std::vector<std::optional<double>> roi;  // per period, savings convention
  bool threshold_degenerate = false;       // gamma = 1
  // Advisory: thresholds hold for some optimum, not necessarily this one.
  bool last_early_roi_ok = true;   // ROI of the last phase-1 investment >= 1-gamma
  bool first_late_roi_ok = true;   // ROI of the first phase-3 investment <= 1-gamma
  std::string to_json() const;
};

ThreePhaseReport check_three_phase(const Instance& inst, const PlanSolution& plan);

/// Optimal value of the collapsed two-period problem that is equivalent to
/// the full horizon under a pooled budget, last-period-only retirement and
/// period-invariant costs/demands.
SolveResult solve_two_period_reformulation(const Instance& inst, const PreprocessReport& pre,
                                           const milp::SolveLimits& limits = {});

/// Plan (de)serialization for the solution.json artifact.
std::string plan_to_json(const Instance& inst, const PlanSolution& plan, double lb, double ub,
                         const std::string& status);
PlanSolution plan_from_json(const Instance& inst, const std::string& bytes);

}  // namespace bfep
