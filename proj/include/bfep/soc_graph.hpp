#pragma once

#include <cstdint>
#include <tuple>
#include <string>
#include <vector>

#include "bfep/instance.hpp"

namespace bfep {

enum class ArcKind : std::uint8_t { Service, Idle, Charge };

/// One arc of the cyclic time-expanded state-of-charge graph.
/// Service: (t,s) -> (t+1 mod T, s-1). Idle: (t,s) -> (t+1 mod T, s).
/// Charge: (t,s) -> (t+kappa mod T, s_b), tagged with its (depot, charger type).
struct SocArc {
  ArcKind kind;
  int tail_t, tail_s;
  int head_t, head_s;
  int depot = -1;    // charge arcs only
  int charger = -1;  // charge arcs only
  int kappa = 0;     // charge arcs only
  Money cost = 0;
};

class SocGraph {
 public:
  SocGraph(int intervals, int battery) : T_(intervals), battery_(battery) {}

  int intervals() const { return T_; }
  int battery() const { return battery_; }
  int num_nodes() const { return T_ * (battery_ + 1); }
  int node_index(int t, int s) const { return t * (battery_ + 1) + s; }

  const std::vector<SocArc>& arcs() const { return arcs_; }
  void add_arc(SocArc arc) { arcs_.push_back(arc); }

 private:
  int T_;
  int battery_;
  std::vector<SocArc> arcs_;
};

/// Builds the SoC graph of (route r, bus type b) for period p, with arc costs
/// taken from the instance's cost model. Deterministic arc order: all service
/// arcs (t-major, s ascending), then idle, then charge (t, depot, charger, s).
SocGraph build_soc_graph(const Instance& inst, int p, int r, int b);

/// The kappa consecutive intervals {t, ..., t+kappa-1} mod T during which a
/// charge arc holds a charger at its (depot, charger type). When kappa > T the
/// result wraps and lists intervals with multiplicity.
std::vector<int> charger_footprint(const SocArc& arc, int intervals);

struct CirculationCheck {
  bool ok = true;
  // (t, s, imbalance = outflow - inflow) for every violated node
  std::vector<std::tuple<int, int, long long>> violated;
};

/// Node-balance check: flows form a circulation iff inflow equals outflow at
/// every node. flows must be indexed like graph.arcs() and nonnegative.
CirculationCheck circulation_check(const SocGraph& graph, const std::vector<long long>& flows);

/// Exact cost of a schedule: sum over all routes of c^y . y, in cents.
/// Throws std::invalid_argument on dimension mismatch.
Money schedule_cost(const Instance& inst, int p, const OperationalSchedule& schedule);

/// Debug dump, one arc per line: tail_t,tail_s,head_t,head_s,kind,i,k,kappa,cost_cents
std::string dump_soc_graph_csv(const Instance& inst, const SocGraph& graph);

}  // namespace bfep
