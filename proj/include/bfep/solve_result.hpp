#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfep/instance.hpp"
#include "bfep/milp/model.hpp"

namespace bfep {

/// Full solution: yearly states plus the daily schedules that certify them.
struct PlanSolution {
  std::vector<StrategicState> states;  // [p]
  OperationalSchedule schedule;        // periods x routes
};

struct IterationLog {
  int iter = 0;
  double lb = 0.0;
  double ub = milp::kInf;
  int bcuts = 0;       // linear cuts added this iteration
  int mcuts = 0;       // monotone cuts added this iteration
  int indicators = 0;  // total indicator variables in the master so far
  long t_master_ms = 0;
  long t_lp_ms = 0;
  long t_ip_ms = 0;
  std::string to_json() const;
};

struct PhaseLog {
  std::string phase;
  long arcs_total = 0;
  long arcs_retained = 0;
  double lb = -milp::kInf;
  double ub = milp::kInf;
  long wall_ms = 0;
  std::string to_json() const;
};

struct SolveResult {
  milp::SolveStatus status = milp::SolveStatus::Error;
  double lower_bound = -milp::kInf;
  double upper_bound = milp::kInf;  // incumbent objective (dollars)
  std::optional<PlanSolution> plan;
  std::vector<IterationLog> iterations;  // decomposition engines
  std::vector<PhaseLog> phases;          // restriction heuristics
  std::string message;

  bool feasible() const { return plan.has_value(); }
  double gap() const {
    if (upper_bound >= milp::kInf || lower_bound <= -milp::kInf) return milp::kInf;
    return (upper_bound - lower_bound) / std::max(1.0, std::fabs(upper_bound));
  }
};

}  // namespace bfep
