#include "bfep/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bfep/operational.hpp"

namespace bfep {

namespace {

std::vector<std::vector<int>> routes_of_terminal(const Instance& inst) {
  std::vector<std::vector<int>> by_term(inst.num_terminals());
  for (int r = 0; r < inst.num_routes(); ++r)
    for (int j : inst.routes[r].terminals) by_term[j].push_back(r);
  for (auto& v : by_term) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return by_term;
}

}  // namespace

DominanceMap compute_dominance(const Instance& inst) {
  const auto by_term = routes_of_terminal(inst);
  DominanceMap map;
  map.dominated.resize(inst.num_terminals());
  for (int a = 0; a < inst.num_terminals(); ++a)
    for (int b = 0; b < inst.num_terminals(); ++b) {
      if (a == b) continue;
      const auto& ra = by_term[a];
      const auto& rb = by_term[b];
      const bool subset = std::includes(ra.begin(), ra.end(), rb.begin(), rb.end());
      if (!subset) continue;
      const bool equal = ra.size() == rb.size();
      bool dominates = false;
      if (!equal) {
        dominates = true;  // strict subset of connected routes
      } else if (inst.terminals[b].host_cap < inst.terminals[a].host_cap) {
        dominates = true;
      } else if (inst.terminals[b].host_cap == inst.terminals[a].host_cap && b < a) {
        dominates = true;
      }
      if (dominates) map.dominated[a].push_back(b);
    }
  return map;
}

int dominated_bound(const Instance& inst, int j, int j_prime, int p) {
  (void)j_prime;
  (void)p;  // the bound is uniform over periods; kept in the signature for call sites
  const auto by_term = routes_of_terminal(inst);
  int peak = 0;
  for (int pp = 0; pp < inst.periods; ++pp)
    for (int t = 0; t < inst.intervals; ++t) {
      int sum = 0;
      for (int r : by_term[j]) sum += inst.routes[r].demand[pp][t];
      peak = std::max(peak, sum);
    }
  const int needed = static_cast<int>(std::ceil(static_cast<double>(peak) / inst.rho));
  return std::max(0, needed - inst.terminals[j].host_cap);
}

std::vector<EnvelopeConstraint> fleet_envelope_constraints(const Instance& inst, int p, int r) {
  const int peak = inst.peak_demand(p, r);
  if (peak == 0) return {};
  std::vector<std::pair<int, double>> points;
  for (int m = 0; m <= peak; ++m) {
    const int lb = min_depot_fleet(inst, p, r, m);
    points.push_back({m, lb == kMinFleetInfeasible
                             ? std::numeric_limits<double>::infinity()
                             : static_cast<double>(lb)});
  }
  const Envelope env = lower_envelope(std::move(points));
  std::vector<EnvelopeConstraint> out;
  if (env.min_m && *env.min_m > 0) {
    EnvelopeConstraint floor;
    floor.kind = EnvelopeConstraint::Kind::Floor;
    floor.floor_m = *env.min_m;
    out.push_back(floor);
  }
  for (const auto& piece : env.pieces) {
    if (piece.slope == 0.0 && piece.intercept <= 0.0) continue;  // implied by nonnegativity
    EnvelopeConstraint c;
    c.kind = EnvelopeConstraint::Kind::Piece;
    c.slope = piece.slope;
    c.intercept = piece.intercept;
    out.push_back(c);
  }
  return out;
}

PreprocessReport apply_preprocessing(const Instance& inst, const PreprocessOptions& opts) {
  PreprocessReport rep = empty_preprocessing(inst);
  if (opts.dominance) {
    rep.dominance = compute_dominance(inst);
    for (int j = 0; j < inst.num_terminals(); ++j)
      for (int jp : rep.dominance.dominated[j]) {
        for (int p = 0; p < inst.periods; ++p) {
          const int bound = dominated_bound(inst, j, jp, p);
          rep.terminal_bound[p][jp] = std::min(rep.terminal_bound[p][jp], bound);
        }
      }
    for (int j = 0; j < inst.num_terminals(); ++j) {
      bool zero = true;
      for (int p = 0; p < inst.periods; ++p) zero &= rep.terminal_bound[p][j] == 0;
      rep.removed[j] = zero ? 1 : 0;
    }
  }
  if (opts.envelopes) {
    for (int p = 0; p < inst.periods; ++p)
      for (int r = 0; r < inst.num_routes(); ++r)
        rep.envelopes[p][r] = fleet_envelope_constraints(inst, p, r);
  }
  return rep;
}

PreprocessReport empty_preprocessing(const Instance& inst) {
  PreprocessReport rep;
  rep.dominance.dominated.resize(inst.num_terminals());
  rep.terminal_bound.assign(inst.periods, std::vector<int>(inst.num_terminals(), 0));
  for (int p = 0; p < inst.periods; ++p)
    for (int j = 0; j < inst.num_terminals(); ++j)
      rep.terminal_bound[p][j] = inst.terminals[j].host_cap;
  rep.removed.assign(inst.num_terminals(), 0);
  rep.envelopes.assign(inst.periods,
                       std::vector<std::vector<EnvelopeConstraint>>(inst.num_routes()));
  return rep;
}

std::string PreprocessReport::to_json() const {
  std::ostringstream out;
  out << "{\"removed_terminals\":[";
  bool first = true;
  for (size_t j = 0; j < removed.size(); ++j)
    if (removed[j]) {
      if (!first) out << ",";
      out << j;
      first = false;
    }
  out << "],\"bounds\":{";
  for (size_t p = 0; p < terminal_bound.size(); ++p) {
    if (p) out << ",";
    out << "\"" << p << "\":[";
    for (size_t j = 0; j < terminal_bound[p].size(); ++j) {
      if (j) out << ",";
      out << terminal_bound[p][j];
    }
    out << "]";
  }
  out << "},\"envelopes\":{";
  bool firstp = true;
  for (size_t p = 0; p < envelopes.size(); ++p) {
    if (!firstp) out << ",";
    firstp = false;
    out << "\"" << p << "\":[";
    for (size_t r = 0; r < envelopes[p].size(); ++r) {
      if (r) out << ",";
      out << "[";
      for (size_t e = 0; e < envelopes[p][r].size(); ++e) {
        const auto& c = envelopes[p][r][e];
        if (e) out << ",";
        if (c.kind == EnvelopeConstraint::Kind::Floor)
          out << "{\"floor_m\":" << c.floor_m << "}";
        else
          out << "{\"slope\":" << c.slope << ",\"intercept\":" << c.intercept << "}";
      }
      out << "]";
    }
    out << "]";
  }
  out << "}}";
  return out.str();
}

}  // namespace bfep
