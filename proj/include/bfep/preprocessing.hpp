#pragma once

#include <string>
#include <vector>

#include "bfep/envelope.hpp"
#include "bfep/instance.hpp"

namespace bfep {

/// Strict partial order between terminals: j dominates j' when it connects a
/// superset of routes, or the same routes with more hosting capacity, or ties
/// broken by index.
struct DominanceMap {
  std::vector<std::vector<int>> dominated;  // per terminal j: sorted list J(j)
  bool dominates(int j, int j_prime) const {
    for (int d : dominated[j])
      if (d == j_prime) return true;
    return false;
  }
};

DominanceMap compute_dominance(const Instance& inst);

/// Valid installation bound for dominated terminal j' under dominator j:
/// max{0, ceil(peak connected demand of j / rho) - host_cap(j)}.
int dominated_bound(const Instance& inst, int j, int j_prime, int p);

/// One linear inequality over (mixed = eta_onroute + eta_conventional,
/// depot_total = sum_b eta_depot) implied by the minimum-fleet grid.
struct EnvelopeConstraint {
  enum class Kind { Piece, Floor };
  Kind kind = Kind::Piece;
  double slope = 0.0;      // Piece: depot_total >= slope * mixed + intercept
  double intercept = 0.0;
  int floor_m = 0;         // Floor: mixed >= floor_m
};

std::vector<EnvelopeConstraint> fleet_envelope_constraints(const Instance& inst, int p, int r);

struct PreprocessReport {
  DominanceMap dominance;
  // Effective per-period installation bound per terminal (host cap tightened
  // by the dominance reductions).
  std::vector<std::vector<int>> terminal_bound;  // [p][j]
  std::vector<char> removed;                     // [j]; bound is 0 in every period
  std::vector<std::vector<std::vector<EnvelopeConstraint>>> envelopes;  // [p][r]

  std::string to_json() const;
};

struct PreprocessOptions {
  bool dominance = true;
  bool envelopes = true;
};

/// Runs the dual reductions and fleet-size inequalities once; downstream
/// model builders attach the results.
PreprocessReport apply_preprocessing(const Instance& inst, const PreprocessOptions& opts = {});

/// A report that changes nothing (all accelerations off).
PreprocessReport empty_preprocessing(const Instance& inst);

}  // namespace bfep
