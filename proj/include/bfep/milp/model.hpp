#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfep::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };
enum class RowSense { LE, GE, EQ };

/// A linear program / mixed-integer program in natural row form.
/// Objective sense is minimization unless `maximize` is set.
struct Model {
  struct Var {
    VarKind kind = VarKind::Continuous;
    double lo = 0.0;
    double hi = kInf;
    double obj = 0.0;
  };
  struct Row {
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
  };

  std::vector<Var> vars;
  std::vector<Row> rows;
  bool maximize = false;

  int add_var(VarKind kind, double lo, double hi, double obj) {
    vars.push_back({kind, lo, hi, obj});
    return static_cast<int>(vars.size()) - 1;
  }
  int add_row(std::vector<std::pair<int, double>> terms, RowSense sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
    return static_cast<int>(rows.size()) - 1;
  }

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  bool has_integers() const {
    for (const Var& v : vars)
      if (v.kind != VarKind::Continuous) return true;
    return false;
  }

  /// Row activity at a point; used by feasibility checks.
  double activity(int row, const std::vector<double>& x) const {
    double a = 0.0;
    for (auto [j, c] : rows[row].terms) a += c * x[j];
    return a;
  }
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, TimeLimit, Error };

struct SolveOutcome {
  SolveStatus status = SolveStatus::Error;
  double obj = std::numeric_limits<double>::quiet_NaN();
  double lb = -kInf;  // proven lower bound on the (minimization) objective
  double ub = kInf;   // incumbent value
  std::vector<double> x;
  std::vector<double> duals;  // per row; populated for LP solves only
  std::vector<double> ray;    // per row; Farkas certificate on LP infeasibility
  bool warm_start_rejected = false;
  std::string message;

  bool feasible() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
  double rel_gap() const {
    if (ub >= kInf || lb <= -kInf) return kInf;
    return (ub - lb) / std::max(1.0, std::fabs(ub));
  }
};

struct SolveLimits {
  double time_limit_sec = kInf;
  double rel_gap = 1e-4;
  long node_limit = -1;  // <0: unlimited
  // Optional caller-controlled stop; checked between nodes with the current
  // proven bound, incumbent and elapsed seconds. Return true to stop early.
  std::function<bool(double lb, double ub, double elapsed)> stop;
};

/// Typed backend failure (numerical breakdown, iteration cap, ...).
struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bfep::milp
