#pragma once

#include <map>
#include <optional>
#include <vector>

#include "bfep/heuristics.hpp"
#include "bfep/operational.hpp"
#include "bfep/preprocessing.hpp"
#include "bfep/solve_result.hpp"
#include "bfep/strategic.hpp"

namespace bfep {

enum class CutMethod { Standard, MW, MIS, Closest, DeepestL1 };

/// Linear cut pi0*Theta_p + <x_coefs, x_p> + constant <= 0 over one period's
/// strategic variables and its cost variable (Theta_p, or theta_pr for
/// single-route cuts). pi0 = 0 is a pure feasibility cut.
struct UnifiedCut {
  int period = 0;
  int route = -1;  // -1: period scope
  double theta_coef = 0.0;
  std::vector<double> x_coefs;  // dense over strategic components
  double constant = 0.0;

  double lhs(const std::vector<double>& x, double theta) const {
    double v = theta_coef * theta + constant;
    for (size_t c = 0; c < x_coefs.size(); ++c) v += x_coefs[c] * x[c];
    return v;
  }
  bool violated(const std::vector<double>& x, double theta, double tol = 1e-6) const {
    return lhs(x, theta) > tol;
  }
};

/// Point that no valid cut separates: the extensive LP relaxation's strategic
/// solution nudged by +0.1, with cost values taken from its schedules.
struct GuidingPoint {
  std::vector<std::vector<double>> x;            // [p][comp]
  std::vector<double> theta;                     // [p]
  std::vector<std::vector<double>> theta_route;  // [p][r]
};

/// Solves the extensive LP relaxation and derives the guiding point. Throws
/// InfeasibleInstance when even the relaxation is infeasible.
GuidingPoint compute_guiding_point(const Instance& inst, const PreprocessReport& pre,
                                   double epsilon = 0.1);

struct InfeasibleInstance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pool of threshold indicators a <= 1[expr >= threshold+1]. Keys identify
/// the thresholded expression: a single strategic component, a route's
/// conventional + on-route total, or the total depot-charger count; cuts
/// referencing the same (period, expression, threshold) share the indicator.
class IndicatorPool {
 public:
  enum class KeyKind { Component, RouteMixedFleet, TotalDepotChargers };
  struct Key {
    int period;
    KeyKind kind;
    int id;  // component index / route index / 0
    int threshold;
    auto operator<=>(const Key&) const = default;
  };

  // Returns the indicator variable, creating it (plus its linking row) on
  // first use. x_vars maps strategic components to master variables.
  int get_or_create(milp::Model& master, const Instance& inst,
                    const std::vector<std::vector<int>>& x_vars, const Key& key);
  int size() const { return static_cast<int>(vars_.size()); }
  // Naive mode: always create a fresh indicator (no pooling).
  void set_pooling(bool on) { pooling_ = on; }

 private:
  std::map<Key, int> vars_;
  bool pooling_ = true;
};

/// Best duty-cycle fraction of a depot bus type on a route: the share of the
/// day it can spend in service under the fastest recharge option.
double duty_cycle_bound(const Instance& inst, int r, int b);
/// Most charge units a single charger of (depot, type) can hand out per
/// interval across bus types and states.
double charge_rate_bound(const Instance& inst, int i, int k);

/// Separation of linear Benders cuts from the LP relaxation of one period's
/// scheduling problem (route < 0) or its single-route relaxation.
/// Returns a violated cut or nothing; the guide is required by MW/Closest.
std::optional<UnifiedCut> separate_cut(const Instance& inst, const PreprocessReport& pre,
                                       CutMethod method, int p,
                                       const std::vector<double>& x_prime, double theta_prime,
                                       const GuidingPoint* guide, int route = -1);

/// Closest vs Conforti-Wolsey deepest separation on one point: both problems
/// solved independently; their optima coincide and, when the optimum is
/// unique, so do the normalized cut vectors.
struct EquivalenceReport {
  bool both_separating = false;
  double closest_objective = 0.0;
  double deepest_objective = 0.0;
  bool objectives_equal = false;
  bool cuts_match = false;   // normalized coefficient vectors within tol
  bool degenerate = false;   // equal objectives but different optimal cuts
};
EquivalenceReport closest_equals_cw_deepest(const Instance& inst, const PreprocessReport& pre,
                                            int p, const std::vector<double>& x_prime,
                                            double theta_prime, const GuidingPoint& guide,
                                            int route = -1);

/// Single-route fleet-insufficiency probe: emits the route's threshold cut
/// when its service levels are unreachable with the fixed fleet even under
/// unlimited charging capacity.
bool feasibility_probe_single_route(const Instance& inst, int p, int r,
                                    const std::vector<int>& x_prime);

/// Aggregate-depot probe: least total depot-charger count that restores
/// feasibility when all depots collapse into one with optimistic charging
/// times. Returns the bound, or nothing when the probe is inconclusive or hit
/// its limit.
std::optional<int> feasibility_probe_aggregate(const Instance& inst, int p,
                                               const std::vector<int>& x_prime,
                                               const milp::SolveLimits& limits = {});

struct LbbdConfig {
  CutMethod method = CutMethod::Closest;
  double rel_tol = 1e-4;
  double time_limit_sec = milp::kInf;
  bool preprocessing = true;          // PP
  bool disaggregation = true;         // DA: theta_pr variables + route cuts
  bool partial_decomposition = true;  // PD: averaged-service relaxation in the master
  bool monotone_strengthening = true; // MC: probe cuts + pooled indicators
  double master_early_stop_sec = 2.0; // <= 0 disables early stopping
  int threads = 1;
  bool collect_cut_audit = false;
};

/// Everything emitted during a run, for the validity test harness.
struct CutAudit {
  struct LinearEntry {
    UnifiedCut cut;
    std::vector<int> x_source;
    double theta_source = 0.0;
  };
  struct MonotoneEntry {
    int period = 0;
    std::vector<int> x_source;
    double q_value = 0.0;  // threshold of optimality cuts; NaN for feasibility
    bool optimality = false;
  };
  std::vector<LinearEntry> linear;
  std::vector<MonotoneEntry> monotone;
};

SolveResult run_lbbd(const Instance& inst, const LbbdConfig& config = {},
                     CutAudit* audit = nullptr);

}  // namespace bfep
