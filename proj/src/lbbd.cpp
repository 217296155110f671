#include "bfep/lbbd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "bfep/milp/solver.hpp"

namespace bfep {

namespace {

using milp::Model;
using milp::RowSense;
using milp::SolveStatus;
using milp::VarKind;

constexpr double kViolationTol = 1e-6;

long ms_between(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
}

// Undiscounted schedule cost of the routes in `h` restricted to one route
// position (or all when rs < 0).
double route_block_cost(const Instance& inst, const OperationalModelHandle& h,
                        const std::vector<double>& primal, int rs_only) {
  double cost = 0.0;
  for (size_t rs = 0; rs < h.route_set.size(); ++rs) {
    if (rs_only >= 0 && static_cast<int>(rs) != rs_only) continue;
    for (size_t bp = 0; bp < h.bus_types.size(); ++bp) {
      const SocGraph& g = h.graphs[rs][bp];
      for (size_t a = 0; a < g.arcs().size(); ++a)
        cost += money_to_dollars(g.arcs()[a].cost) * primal[h.vars[rs].arc_base[bp] + a];
    }
    for (int v : h.vars[rs].onroute) cost += money_to_dollars(inst.costs.onroute_service) * primal[v];
    for (int v : h.vars[rs].conventional)
      cost += money_to_dollars(inst.costs.conventional_service) * primal[v];
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Separation machinery

struct SeparationSetup {
  OperationalModelHandle handle;  // LP structure at x'
  std::vector<double> rhs_at_guide;  // rhs_i(x°); empty when no guide
};

SeparationSetup build_separation_setup(const Instance& inst, const PreprocessReport& pre, int p,
                                       const std::vector<double>& x_prime, int route,
                                       const GuidingPoint* guide) {
  SeparationSetup s;
  OperationalOptions opts;
  opts.integrality = false;
  opts.terminal_removed = &pre.removed;
  if (route < 0) {
    s.handle = build_operational(inst, p, x_prime, opts);
  } else {
    s.handle = build_operational_routes(inst, p, {route}, x_prime, opts);
  }
  if (guide) {
    s.rhs_at_guide.reserve(s.handle.links.size());
    for (const OpRowLink& link : s.handle.links) {
      double v = link.constant;
      for (auto [comp, coef] : link.x_terms) v += coef * guide->x[p][comp];
      s.rhs_at_guide.push_back(v);
    }
  }
  return s;
}

UnifiedCut cut_from_multipliers(const Instance& inst, const OperationalModelHandle& h, int p,
                                int route, double pi0, const std::vector<double>& duals) {
  UnifiedCut cut;
  cut.period = p;
  cut.route = route;
  cut.theta_coef = pi0;
  cut.x_coefs.assign(strategic_dim(inst), 0.0);
  for (size_t i = 0; i < h.links.size(); ++i) {
    if (duals[i] == 0.0) continue;
    cut.constant += duals[i] * h.links[i].constant;
    for (auto [comp, coef] : h.links[i].x_terms) cut.x_coefs[comp] += duals[i] * coef;
  }
  return cut;
}

enum class Normalization { MIS, Closest, CW, L1 };

// Unified cut-selection LP over the dual cone, truncated by h(pi, pi0) = 1.
std::optional<UnifiedCut> separate_normalized(const Instance& inst, const SeparationSetup& s,
                                              int p, int route,
                                              const std::vector<double>& x_prime,
                                              double theta_prime, const GuidingPoint* guide,
                                              Normalization norm) {
  const Model& op = s.handle.model;
  Model sep;
  sep.maximize = true;

  std::vector<int> dual(op.num_rows());
  for (int i = 0; i < op.num_rows(); ++i) {
    double lo = -milp::kInf, hi = milp::kInf;
    switch (op.rows[i].sense) {
      case RowSense::LE: hi = 0.0; break;
      case RowSense::GE: lo = 0.0; break;
      case RowSense::EQ: break;
    }
    dual[i] = sep.add_var(VarKind::Continuous, lo, hi, op.rows[i].rhs);
  }
  const int pi0 = sep.add_var(VarKind::Continuous, -milp::kInf, 0.0, theta_prime);

  // Dual cone: pi0 c_j + sum_i a_ij dual_i <= 0 for every scheduling column.
  std::vector<std::vector<std::pair<int, double>>> cols(op.num_vars());
  for (int i = 0; i < op.num_rows(); ++i)
    for (auto [j, c] : op.rows[i].terms) cols[j].push_back({dual[i], c});
  for (int j = 0; j < op.num_vars(); ++j) {
    if (op.vars[j].hi <= 0.0) continue;  // pinned-out column
    auto terms = cols[j];
    if (op.vars[j].obj != 0.0) terms.push_back({pi0, op.vars[j].obj});
    if (terms.empty()) continue;
    sep.add_row(std::move(terms), RowSense::LE, 0.0);
  }

  // Normalization h(pi, pi0) = 1.
  std::vector<std::pair<int, double>> hterms;
  const double theta_guide = guide ? (route < 0 ? guide->theta[p] : guide->theta_route[p][route])
                                   : 0.0;
  switch (norm) {
    case Normalization::MIS:
      hterms.push_back({pi0, -1.0});
      for (size_t i = 0; i < s.handle.links.size(); ++i)
        if (!s.handle.links[i].x_terms.empty()) hterms.push_back({dual[i], -1.0});
      break;
    case Normalization::L1:
      hterms.push_back({pi0, -1.0});
      for (size_t i = 0; i < s.handle.links.size(); ++i) {
        double tot = 0.0;
        for (auto [comp, coef] : s.handle.links[i].x_terms) tot += coef;
        if (tot != 0.0) hterms.push_back({dual[i], -tot});
      }
      break;
    case Normalization::Closest:
      // h_CC: pi0 (Theta' - Theta°) + D(x'; pi) - D(x°; pi), via rhs values.
      hterms.push_back({pi0, theta_prime - theta_guide});
      for (int i = 0; i < op.num_rows(); ++i) {
        const double diff = op.rows[i].rhs - s.rhs_at_guide[i];
        if (diff != 0.0) hterms.push_back({dual[i], diff});
      }
      break;
    case Normalization::CW:
      // h_CW: pi0 (Theta' - Theta°) + <link coefficients, x' - x°>.
      hterms.push_back({pi0, theta_prime - theta_guide});
      for (size_t i = 0; i < s.handle.links.size(); ++i) {
        double diff = 0.0;
        for (auto [comp, coef] : s.handle.links[i].x_terms)
          diff += coef * (x_prime[comp] - guide->x[p][comp]);
        if (diff != 0.0) hterms.push_back({dual[i], diff});
      }
      break;
  }
  sep.add_row(std::move(hterms), RowSense::EQ, 1.0);

  milp::SolveOutcome res = milp::solve_lp(sep);
  if (res.status == SolveStatus::Infeasible) return std::nullopt;  // no violated cut
  if (res.status != SolveStatus::Optimal)
    throw milp::BackendError("cut separation LP failed");
  if (res.obj <= kViolationTol) return std::nullopt;

  std::vector<double> duals(op.num_rows());
  for (int i = 0; i < op.num_rows(); ++i) duals[i] = res.x[dual[i]];
  UnifiedCut cut = cut_from_multipliers(inst, s.handle, p, route, res.x[pi0], duals);
  if (!cut.violated(x_prime, theta_prime)) return std::nullopt;
  return cut;
}

// Standard selection: solve the primal LP; Farkas ray on infeasibility,
// optimal duals otherwise.
std::optional<UnifiedCut> separate_standard(const Instance& inst, const SeparationSetup& s, int p,
                                            int route, const std::vector<double>& x_prime,
                                            double theta_prime) {
  milp::SolveOutcome lp = milp::solve_lp(s.handle.model, {}, /*want_ray=*/true);
  if (lp.status == SolveStatus::Infeasible) {
    if (lp.ray.empty()) throw milp::BackendError("no Farkas certificate on infeasible LP");
    UnifiedCut cut = cut_from_multipliers(inst, s.handle, p, route, 0.0, lp.ray);
    if (!cut.violated(x_prime, theta_prime)) return std::nullopt;
    return cut;
  }
  if (lp.status != SolveStatus::Optimal) throw milp::BackendError("subproblem LP failed");
  if (lp.obj <= theta_prime + kViolationTol) return std::nullopt;
  return cut_from_multipliers(inst, s.handle, p, route, -1.0, lp.duals);
}

// Magnanti-Wong: strongest dual bound at the guide among the duals optimal at
// x'. Falls back to the standard selection when inapplicable.
std::optional<UnifiedCut> separate_mw(const Instance& inst, const SeparationSetup& s, int p,
                                      int route, const std::vector<double>& x_prime,
                                      double theta_prime, const GuidingPoint* guide) {
  milp::SolveOutcome lp = milp::solve_lp(s.handle.model, {}, /*want_ray=*/true);
  if (lp.status == SolveStatus::Infeasible) {
    if (lp.ray.empty()) throw milp::BackendError("no Farkas certificate on infeasible LP");
    UnifiedCut cut = cut_from_multipliers(inst, s.handle, p, route, 0.0, lp.ray);
    if (!cut.violated(x_prime, theta_prime)) return std::nullopt;
    return cut;
  }
  if (lp.status != SolveStatus::Optimal) throw milp::BackendError("subproblem LP failed");
  if (lp.obj <= theta_prime + kViolationTol) return std::nullopt;

  const Model& op = s.handle.model;
  Model mw;
  mw.maximize = true;
  std::vector<int> dual(op.num_rows());
  for (int i = 0; i < op.num_rows(); ++i) {
    double lo = -milp::kInf, hi = milp::kInf;
    switch (op.rows[i].sense) {
      case RowSense::LE: hi = 0.0; break;
      case RowSense::GE: lo = 0.0; break;
      case RowSense::EQ: break;
    }
    dual[i] = mw.add_var(VarKind::Continuous, lo, hi, s.rhs_at_guide[i]);
  }
  std::vector<std::vector<std::pair<int, double>>> cols(op.num_vars());
  for (int i = 0; i < op.num_rows(); ++i)
    for (auto [j, c] : op.rows[i].terms) cols[j].push_back({dual[i], c});
  for (int j = 0; j < op.num_vars(); ++j) {
    if (op.vars[j].hi <= 0.0 || cols[j].empty()) continue;
    mw.add_row(cols[j], RowSense::LE, op.vars[j].obj);
  }
  // Optimality at x': D(x'; pi) equals the subproblem LP value.
  std::vector<std::pair<int, double>> opt_terms;
  for (int i = 0; i < op.num_rows(); ++i)
    if (op.rows[i].rhs != 0.0) opt_terms.push_back({dual[i], op.rows[i].rhs});
  mw.add_row(std::move(opt_terms), RowSense::EQ, lp.obj);

  milp::SolveOutcome res = milp::solve_lp(mw);
  if (res.status != SolveStatus::Optimal) {
    // Dual unbounded over the optimal face: resort to the standard cut.
    return cut_from_multipliers(inst, s.handle, p, route, -1.0, lp.duals);
  }
  std::vector<double> duals(op.num_rows());
  for (int i = 0; i < op.num_rows(); ++i) duals[i] = res.x[dual[i]];
  return cut_from_multipliers(inst, s.handle, p, route, -1.0, duals);
}

}  // namespace

double duty_cycle_bound(const Instance& inst, int r, int b) {
  const int sb = inst.bus_types[b].battery;
  double alpha = 0.0;
  for (int i = 0; i < inst.num_depots(); ++i)
    for (int k = 0; k < inst.num_charger_types(); ++k)
      for (int s = 0; s < sb; ++s)
        alpha = std::max(alpha,
                         static_cast<double>(sb - s) / (sb - s + inst.kappa[r][b][i][k][s]));
  return alpha;
}

double charge_rate_bound(const Instance& inst, int i, int k) {
  double beta = 0.0;
  for (int r = 0; r < inst.num_routes(); ++r)
    for (int b = 0; b < inst.num_bus_types(); ++b) {
      const int sb = inst.bus_types[b].battery;
      for (int s = 0; s < sb; ++s)
        beta = std::max(beta, static_cast<double>(sb - s) / inst.kappa[r][b][i][k][s]);
    }
  return beta;
}

GuidingPoint compute_guiding_point(const Instance& inst, const PreprocessReport& pre,
                                   double epsilon) {
  ExtensiveOptions eo;
  eo.integrality = false;
  ExtensiveModel ext = build_extensive(inst, pre, eo);
  milp::SolveOutcome lp = milp::solve_lp(ext.model);
  if (lp.status == SolveStatus::Infeasible)
    throw InfeasibleInstance("extensive LP relaxation is infeasible");
  if (lp.status != SolveStatus::Optimal)
    throw milp::BackendError("extensive LP relaxation did not solve");

  GuidingPoint g;
  g.x.assign(inst.periods, std::vector<double>(strategic_dim(inst), 0.0));
  g.theta.assign(inst.periods, 0.0);
  g.theta_route.assign(inst.periods, std::vector<double>(inst.num_routes(), 0.0));
  for (int p = 0; p < inst.periods; ++p) {
    for (int c = 0; c < strategic_dim(inst); ++c)
      g.x[p][c] = lp.x[ext.svars.x[p][c]] + epsilon;
    g.theta[p] = route_block_cost(inst, ext.ops[p], lp.x, -1);
    for (int rs = 0; rs < inst.num_routes(); ++rs)
      g.theta_route[p][rs] = route_block_cost(inst, ext.ops[p], lp.x, rs);
  }
  return g;
}

std::optional<UnifiedCut> separate_cut(const Instance& inst, const PreprocessReport& pre,
                                       CutMethod method, int p,
                                       const std::vector<double>& x_prime, double theta_prime,
                                       const GuidingPoint* guide, int route) {
  if ((method == CutMethod::MW || method == CutMethod::Closest) && !guide)
    throw std::invalid_argument("separate_cut: method requires a guiding point");
  SeparationSetup s = build_separation_setup(inst, pre, p, x_prime, route, guide);
  switch (method) {
    case CutMethod::Standard:
      return separate_standard(inst, s, p, route, x_prime, theta_prime);
    case CutMethod::MW:
      return separate_mw(inst, s, p, route, x_prime, theta_prime, guide);
    case CutMethod::MIS:
      return separate_normalized(inst, s, p, route, x_prime, theta_prime, guide,
                                 Normalization::MIS);
    case CutMethod::Closest:
      return separate_normalized(inst, s, p, route, x_prime, theta_prime, guide,
                                 Normalization::Closest);
    case CutMethod::DeepestL1:
      return separate_normalized(inst, s, p, route, x_prime, theta_prime, guide,
                                 Normalization::L1);
  }
  return std::nullopt;
}

EquivalenceReport closest_equals_cw_deepest(const Instance& inst, const PreprocessReport& pre,
                                            int p, const std::vector<double>& x_prime,
                                            double theta_prime, const GuidingPoint& guide,
                                            int route) {
  EquivalenceReport rep;
  SeparationSetup s = build_separation_setup(inst, pre, p, x_prime, route, &guide);

  struct Raw {
    bool separating = false;
    double obj = 0.0;
    UnifiedCut cut;
  };
  auto run = [&](Normalization norm) {
    Raw raw;
    const Model& op = s.handle.model;
    Model sep;
    sep.maximize = true;
    std::vector<int> dual(op.num_rows());
    for (int i = 0; i < op.num_rows(); ++i) {
      double lo = -milp::kInf, hi = milp::kInf;
      if (op.rows[i].sense == RowSense::LE) hi = 0.0;
      if (op.rows[i].sense == RowSense::GE) lo = 0.0;
      dual[i] = sep.add_var(VarKind::Continuous, lo, hi, op.rows[i].rhs);
    }
    const int pi0 = sep.add_var(VarKind::Continuous, -milp::kInf, 0.0, theta_prime);
    std::vector<std::vector<std::pair<int, double>>> cols(op.num_vars());
    for (int i = 0; i < op.num_rows(); ++i)
      for (auto [j, c] : op.rows[i].terms) cols[j].push_back({dual[i], c});
    for (int j = 0; j < op.num_vars(); ++j) {
      if (op.vars[j].hi <= 0.0) continue;
      auto terms = cols[j];
      if (op.vars[j].obj != 0.0) terms.push_back({pi0, op.vars[j].obj});
      if (!terms.empty()) sep.add_row(std::move(terms), RowSense::LE, 0.0);
    }
    const double theta_guide = route < 0 ? guide.theta[p] : guide.theta_route[p][route];
    std::vector<std::pair<int, double>> hterms{{pi0, theta_prime - theta_guide}};
    if (norm == Normalization::Closest) {
      for (int i = 0; i < op.num_rows(); ++i) {
        const double diff = op.rows[i].rhs - s.rhs_at_guide[i];
        if (diff != 0.0) hterms.push_back({dual[i], diff});
      }
    } else {
      for (size_t i = 0; i < s.handle.links.size(); ++i) {
        double diff = 0.0;
        for (auto [comp, coef] : s.handle.links[i].x_terms)
          diff += coef * (x_prime[comp] - guide.x[p][comp]);
        if (diff != 0.0) hterms.push_back({dual[i], diff});
      }
    }
    sep.add_row(std::move(hterms), RowSense::EQ, 1.0);
    milp::SolveOutcome res = milp::solve_lp(sep);
    if (res.status != SolveStatus::Optimal || res.obj <= kViolationTol) return raw;
    raw.separating = true;
    raw.obj = res.obj;
    std::vector<double> duals(op.num_rows());
    for (int i = 0; i < op.num_rows(); ++i) duals[i] = res.x[dual[i]];
    raw.cut = cut_from_multipliers(inst, s.handle, p, route, res.x[pi0], duals);
    return raw;
  };

  const Raw closest = run(Normalization::Closest);
  const Raw deepest = run(Normalization::CW);
  rep.both_separating = closest.separating && deepest.separating;
  if (!closest.separating && !deepest.separating) return rep;
  rep.closest_objective = closest.obj;
  rep.deepest_objective = deepest.obj;
  rep.objectives_equal = std::fabs(closest.obj - deepest.obj) <=
                         1e-6 * (1.0 + std::max(std::fabs(closest.obj), std::fabs(deepest.obj)));
  if (rep.both_separating) {
    auto normalize = [](const UnifiedCut& c) {
      std::vector<double> v = c.x_coefs;
      v.push_back(c.theta_coef);
      v.push_back(c.constant);
      double norm = 0.0;
      for (double a : v) norm = std::max(norm, std::fabs(a));
      if (norm > 0)
        for (double& a : v) a /= norm;
      return v;
    };
    const auto a = normalize(closest.cut), b = normalize(deepest.cut);
    rep.cuts_match = true;
    for (size_t i = 0; i < a.size(); ++i)
      if (std::fabs(a[i] - b[i]) > 1e-6) rep.cuts_match = false;
    rep.degenerate = rep.objectives_equal && !rep.cuts_match;
  }
  return rep;
}

int IndicatorPool::get_or_create(Model& master, const Instance& inst,
                                 const std::vector<std::vector<int>>& x_vars, const Key& key) {
  if (pooling_) {
    const auto it = vars_.find(key);
    if (it != vars_.end()) return it->second;
  }
  const int a = master.add_var(VarKind::Binary, 0.0, 1.0, 0.0);
  std::vector<std::pair<int, double>> terms{{a, static_cast<double>(key.threshold + 1)}};
  switch (key.kind) {
    case KeyKind::Component:
      terms.push_back({x_vars[key.period][key.id], -1.0});
      break;
    case KeyKind::RouteMixedFleet:
      terms.push_back({x_vars[key.period][comp_eta_onroute(inst, key.id)], -1.0});
      terms.push_back({x_vars[key.period][comp_eta_conventional(inst, key.id)], -1.0});
      break;
    case KeyKind::TotalDepotChargers:
      for (int i = 0; i < inst.num_depots(); ++i)
        for (int k = 0; k < inst.num_charger_types(); ++k)
          terms.push_back({x_vars[key.period][comp_chi_depot(inst, i, k)], -1.0});
      break;
  }
  master.add_row(std::move(terms), RowSense::LE, 0.0);
  if (pooling_) vars_[key] = a;
  else vars_[Key{key.period, key.kind, key.id, -static_cast<int>(vars_.size()) - 1}] = a;
  return a;
}

bool feasibility_probe_single_route(const Instance& inst, int p, int r,
                                    const std::vector<int>& x_prime) {
  OperationalOptions opts;
  opts.integrality = true;
  opts.charger_rows = false;
  OperationalModelHandle h = build_operational_routes(inst, p, {r}, x_prime, opts);
  milp::SolveLimits lim;
  lim.rel_gap = 1.0;  // feasibility only
  milp::SolveOutcome res = milp::solve_mip(h.model, lim);
  return res.status == SolveStatus::Infeasible;
}

std::optional<int> feasibility_probe_aggregate(const Instance& inst, int p,
                                               const std::vector<int>& x_prime,
                                               const milp::SolveLimits& limits) {
  // Collapse depots and charger types into one location with the most
  // optimistic charging times; the charger count becomes the objective.
  Instance agg = inst;
  agg.depots = {{"_agg", 1 << 20}};
  agg.charger_types = {{"_agg", 0}};
  for (int r = 0; r < inst.num_routes(); ++r) {
    agg.routes[r].travel = {0};
    for (int b = 0; b < inst.num_bus_types(); ++b) {
      const int sb = inst.bus_types[b].battery;
      std::vector<int> kmin(sb, 0);
      std::vector<Money> cmin(sb, 0);
      for (int s = 0; s < sb; ++s) {
        int best = inst.kappa[r][b][0][0][s];
        Money bc = inst.charge_cost[r][b][0][0][s];
        for (int i = 0; i < inst.num_depots(); ++i)
          for (int k = 0; k < inst.num_charger_types(); ++k) {
            best = std::min(best, inst.kappa[r][b][i][k][s]);
            bc = std::min(bc, inst.charge_cost[r][b][i][k][s]);
          }
        kmin[s] = best;
        cmin[s] = bc;
      }
      agg.kappa[r][b] = {{kmin}};
      agg.charge_cost[r][b] = {{cmin}};
    }
  }
  agg.initial_state.chi_depot = {{0}};

  // x' mapped into the aggregate component space; the lone charger count is a
  // decision variable.
  std::vector<double> x_agg(strategic_dim(agg), 0.0);
  std::vector<int> x_vars(strategic_dim(agg), -1);
  for (int j = 0; j < inst.num_terminals(); ++j)
    x_agg[comp_chi_terminal(agg, j)] = x_prime[comp_chi_terminal(inst, j)];
  for (int r = 0; r < inst.num_routes(); ++r) {
    for (int b = 0; b < inst.num_bus_types(); ++b)
      x_agg[comp_eta_depot(agg, r, b)] = x_prime[comp_eta_depot(inst, r, b)];
    x_agg[comp_eta_onroute(agg, r)] = x_prime[comp_eta_onroute(inst, r)];
    x_agg[comp_eta_conventional(agg, r)] = x_prime[comp_eta_conventional(inst, r)];
  }

  OperationalModelHandle h;
  std::vector<int> routes(agg.num_routes());
  std::iota(routes.begin(), routes.end(), 0);
  OperationalOptions opts;
  opts.integrality = true;
  // Mixed mode: the aggregate charger count is free, everything else pinned.
  const int chi_var = h.model.add_var(VarKind::Integer, 0.0, milp::kInf, 1.0);
  x_vars[comp_chi_depot(agg, 0, 0)] = chi_var;
  emit_operational_block(agg, p, routes, opts, h.model, &x_agg, &x_vars, false, h);
  // Charger count is the whole objective; schedule costs do not participate.
  for (int v = 0; v < h.model.num_vars(); ++v)
    if (v != chi_var) h.model.vars[v].obj = 0.0;

  milp::SolveLimits lim = limits;
  lim.rel_gap = 0.0;
  milp::SolveOutcome res = milp::solve_mip(h.model, lim);
  if (res.status == SolveStatus::Infeasible) return std::numeric_limits<int>::max();
  if (res.status == SolveStatus::Optimal) return static_cast<int>(std::llround(res.obj));
  return std::nullopt;  // limit hit: probe inconclusive
}

// ---------------------------------------------------------------------------
// Master assembly and the main loop

namespace {

struct MasterContext {
  Model model;
  StrategicVars sv;
  std::vector<int> theta;                      // [p]
  std::vector<std::vector<int>> theta_route;   // [p][r] (empty without DA)
  IndicatorPool pool;
  std::set<std::vector<long long>> cut_hashes;
};

// EC-style averaged-service relaxation of one period-route block.
void emit_partial_relaxation(MasterContext& ctx, const Instance& inst,
                             const PreprocessReport& pre, bool disaggregation) {
  const int T = inst.intervals;
  for (int p = 0; p < inst.periods; ++p) {
    std::vector<std::pair<int, double>> omega_tilde_total;  // for the network-wide rows
    std::vector<std::pair<int, double>> omega_bar_total;
    std::vector<std::vector<std::pair<int, double>>> theta_link_terms(
        disaggregation ? 0 : 1);
    for (int r = 0; r < inst.num_routes(); ++r) {
      double avg_demand = 0.0;
      for (int t = 0; t < T; ++t) avg_demand += inst.routes[r].demand[p][t];
      avg_demand /= T;

      std::vector<int> omega_bar(inst.num_bus_types());
      for (int b = 0; b < inst.num_bus_types(); ++b)
        omega_bar[b] = ctx.model.add_var(VarKind::Continuous, 0.0, milp::kInf, 0.0);
      const int omega_tilde = ctx.model.add_var(VarKind::Continuous, 0.0, milp::kInf, 0.0);
      const int omega_hat = ctx.model.add_var(VarKind::Continuous, 0.0, milp::kInf, 0.0);

      // Average service level must cover average demand.
      {
        std::vector<std::pair<int, double>> terms;
        for (int b = 0; b < inst.num_bus_types(); ++b) terms.push_back({omega_bar[b], 1.0});
        terms.push_back({omega_tilde, 1.0});
        terms.push_back({omega_hat, 1.0});
        ctx.model.add_row(std::move(terms), RowSense::GE, avg_demand);
      }
      // Fleet availability: a depot bus can serve at most the best
      // duty-cycle fraction of the day; the others serve at most fully.
      for (int b = 0; b < inst.num_bus_types(); ++b)
        ctx.model.add_row({{omega_bar[b], 1.0},
                           {ctx.sv.x[p][comp_eta_depot(inst, r, b)],
                            -duty_cycle_bound(inst, r, b)}},
                          RowSense::LE, 0.0);
      ctx.model.add_row({{omega_tilde, 1.0}, {ctx.sv.x[p][comp_eta_onroute(inst, r)], -1.0}},
                        RowSense::LE, 0.0);
      ctx.model.add_row({{omega_hat, 1.0}, {ctx.sv.x[p][comp_eta_conventional(inst, r)], -1.0}},
                        RowSense::LE, 0.0);
      // Route-connected fast-charging capacity.
      {
        std::vector<std::pair<int, double>> terms{{omega_tilde, 1.0}};
        for (int lj : inst.routes[r].terminals)
          if (!pre.removed[lj])
            terms.push_back({ctx.sv.x[p][comp_chi_terminal(inst, lj)],
                             -static_cast<double>(inst.rho)});
        ctx.model.add_row(std::move(terms), RowSense::LE, 0.0);
      }
      // Conventional + on-route service never beats the clipped-demand curve.
      {
        const int peak = inst.peak_demand(p, r);
        std::vector<std::pair<int, double>> pts_terms;
        std::vector<std::pair<int, double>> points;
        for (int m = 0; m <= peak; ++m) {
          double sigma = 0.0;
          for (int t = 0; t < T; ++t) sigma += std::min(inst.routes[r].demand[p][t], m);
          points.push_back({m, sigma / T});
        }
        if (points.size() >= 2) {
          const Envelope env = upper_envelope(points);
          for (const auto& piece : env.pieces) {
            ctx.model.add_row({{omega_tilde, 1.0},
                               {omega_hat, 1.0},
                               {ctx.sv.x[p][comp_eta_onroute(inst, r)], -piece.slope},
                               {ctx.sv.x[p][comp_eta_conventional(inst, r)], -piece.slope}},
                              RowSense::LE, piece.intercept);
          }
        }
      }
      // Cost link: theta_pr >= cheapest way to buy this average service.
      {
        Money cw_min = inst.costs.onroute_service;
        Money ch_min = inst.costs.conventional_service;
        std::vector<std::pair<int, double>> terms;
        for (int b = 0; b < inst.num_bus_types(); ++b) {
          const int sb = inst.bus_types[b].battery;
          double charge_per_unit = milp::kInf;
          for (int i = 0; i < inst.num_depots(); ++i)
            for (int k = 0; k < inst.num_charger_types(); ++k)
              for (int s = 0; s < sb; ++s)
                charge_per_unit =
                    std::min(charge_per_unit,
                             money_to_dollars(inst.charge_cost[r][b][i][k][s]) / (sb - s));
          const double unit =
              T * (money_to_dollars(inst.costs.service[b]) + charge_per_unit);
          terms.push_back({omega_bar[b], unit});
        }
        terms.push_back({omega_tilde, T * money_to_dollars(cw_min)});
        terms.push_back({omega_hat, T * money_to_dollars(ch_min)});
        if (disaggregation) {
          std::vector<std::pair<int, double>> row{{ctx.theta_route[p][r], 1.0}};
          for (auto [v, c] : terms) row.push_back({v, -c});
          ctx.model.add_row(std::move(row), RowSense::GE, 0.0);
        } else {
          for (auto [v, c] : terms) theta_link_terms[0].push_back({v, -c});
        }
      }

      for (int b = 0; b < inst.num_bus_types(); ++b)
        omega_bar_total.push_back({omega_bar[b], 1.0});
      omega_tilde_total.push_back({omega_tilde, 1.0});
    }
    if (!disaggregation) {
      theta_link_terms[0].push_back({ctx.theta[p], 1.0});
      ctx.model.add_row(std::move(theta_link_terms[0]), RowSense::GE, 0.0);
    }
    // Network-wide charging capacity, averaged.
    {
      std::vector<std::pair<int, double>> terms = omega_tilde_total;
      for (int j = 0; j < inst.num_terminals(); ++j)
        if (!pre.removed[j])
          terms.push_back({ctx.sv.x[p][comp_chi_terminal(inst, j)],
                           -static_cast<double>(inst.rho)});
      ctx.model.add_row(std::move(terms), RowSense::LE, 0.0);
    }
    {
      std::vector<std::pair<int, double>> terms = omega_bar_total;
      for (int i = 0; i < inst.num_depots(); ++i)
        for (int k = 0; k < inst.num_charger_types(); ++k)
          terms.push_back(
              {ctx.sv.x[p][comp_chi_depot(inst, i, k)], -charge_rate_bound(inst, i, k)});
      ctx.model.add_row(std::move(terms), RowSense::LE, 0.0);
    }
  }
}

// Normalized signature for cut deduplication.
std::vector<long long> cut_signature(const UnifiedCut& cut) {
  double norm = std::fabs(cut.theta_coef);
  for (double c : cut.x_coefs) norm = std::max(norm, std::fabs(c));
  norm = std::max(norm, std::fabs(cut.constant));
  if (norm == 0.0) norm = 1.0;
  std::vector<long long> sig{cut.period, cut.route,
                             static_cast<long long>(std::llround(cut.theta_coef / norm * 1e9))};
  for (double c : cut.x_coefs) sig.push_back(std::llround(c / norm * 1e9));
  sig.push_back(std::llround(cut.constant / norm * 1e9));
  return sig;
}

}  // namespace

SolveResult run_lbbd(const Instance& inst, const LbbdConfig& config, CutAudit* audit) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
  auto time_left = [&] { return config.time_limit_sec - elapsed(); };

  SolveResult result;

  const PreprocessReport pre = config.preprocessing
                                   ? apply_preprocessing(inst)
                                   : empty_preprocessing(inst);

  GuidingPoint guide;
  const bool needs_guide =
      config.method == CutMethod::MW || config.method == CutMethod::Closest;
  try {
    if (needs_guide) guide = compute_guiding_point(inst, pre);
  } catch (const InfeasibleInstance& e) {
    result.status = SolveStatus::Infeasible;
    result.message = e.what();
    return result;
  }

  MasterContext ctx;
  ctx.sv = emit_strategic(ctx.model, inst, pre, default_weights(inst));
  ctx.theta.resize(inst.periods);
  for (int p = 0; p < inst.periods; ++p)
    ctx.theta[p] = ctx.model.add_var(VarKind::Continuous, 0.0, milp::kInf,
                                     std::pow(inst.gamma, p));
  if (config.disaggregation) {
    ctx.theta_route.resize(inst.periods);
    for (int p = 0; p < inst.periods; ++p) {
      std::vector<std::pair<int, double>> row{{ctx.theta[p], 1.0}};
      ctx.theta_route[p].resize(inst.num_routes());
      for (int r = 0; r < inst.num_routes(); ++r) {
        ctx.theta_route[p][r] = ctx.model.add_var(VarKind::Continuous, 0.0, milp::kInf, 0.0);
        row.push_back({ctx.theta_route[p][r], -1.0});
      }
      ctx.model.add_row(std::move(row), RowSense::EQ, 0.0);
    }
  }
  if (config.partial_decomposition) emit_partial_relaxation(ctx, inst, pre, config.disaggregation);
  ctx.pool.set_pooling(config.monotone_strengthening);

  double lb = 0.0, ub = milp::kInf;
  std::optional<PlanSolution> incumbent;
  int iter = 0;
  bool timed_out = false;
  bool force_full_master = false;

  auto add_cut_row = [&](const UnifiedCut& cut) {
    const auto sig = cut_signature(cut);
    if (!ctx.cut_hashes.insert(sig).second) return false;
    std::vector<std::pair<int, double>> terms;
    const int theta_var =
        cut.route < 0 ? ctx.theta[cut.period] : ctx.theta_route[cut.period][cut.route];
    if (cut.theta_coef != 0.0) terms.push_back({theta_var, cut.theta_coef});
    for (int c = 0; c < strategic_dim(inst); ++c)
      if (cut.x_coefs[c] != 0.0) terms.push_back({ctx.sv.x[cut.period][c], cut.x_coefs[c]});
    ctx.model.add_row(std::move(terms), RowSense::LE, -cut.constant);
    return true;
  };

  while (true) {
    ++iter;
    IterationLog log;
    log.iter = iter;
    if (time_left() <= 0) {
      timed_out = true;
      break;
    }

    // Phase 1: master.
    const auto t_master = clock::now();
    milp::SolveLimits mlim;
    mlim.rel_gap = 1e-9;
    mlim.time_limit_sec = time_left();
    const double global_lb = lb, global_ub = ub;
    if (config.master_early_stop_sec > 0.0 && !force_full_master) {
      const double stop_after = config.master_early_stop_sec;
      const double rel_tol = config.rel_tol;
      mlim.stop = [global_lb, global_ub, stop_after, rel_tol](double node_lb, double node_ub,
                                                              double sec) {
        if (sec <= stop_after) return false;
        if (node_lb < global_lb - 1e-9) return false;
        if (node_ub >= milp::kInf) return false;
        if (global_ub < milp::kInf && (global_ub - node_ub) / std::max(1.0, global_ub) <= rel_tol)
          return false;
        return true;
      };
    }
    milp::SolveOutcome master = milp::solve_mip(ctx.model, mlim);
    log.t_master_ms = ms_between(t_master, clock::now());
    if (master.status == SolveStatus::Infeasible) {
      result.status = SolveStatus::Infeasible;
      result.message = "master problem infeasible: budgets/caps admit no plan "
                       "satisfying the accumulated cuts";
      break;
    }
    if (!master.feasible()) {
      timed_out = true;
      break;
    }
    lb = std::max(lb, master.lb);

    std::vector<std::vector<int>> x_prime(inst.periods, std::vector<int>(strategic_dim(inst)));
    std::vector<std::vector<double>> x_prime_d(inst.periods,
                                               std::vector<double>(strategic_dim(inst)));
    for (int p = 0; p < inst.periods; ++p)
      for (int c = 0; c < strategic_dim(inst); ++c) {
        x_prime[p][c] = static_cast<int>(std::llround(master.x[ctx.sv.x[p][c]]));
        x_prime_d[p][c] = x_prime[p][c];
      }
    std::vector<double> theta_prime(inst.periods);
    for (int p = 0; p < inst.periods; ++p) theta_prime[p] = master.x[ctx.theta[p]];

    // Phase 2: linear cuts + LP feasibility screen. Periods separate
    // independently; the master is only touched in the ordered merge below.
    const auto t_lp = clock::now();
    struct PeriodSeparation {
      bool lp_feasible = true;
      std::vector<std::pair<UnifiedCut, double>> cuts;  // cut, theta at source
    };
    std::vector<PeriodSeparation> seps(inst.periods);
    auto separate_period = [&](int p) {
      PeriodSeparation out;
      OperationalOptions lp_opts;
      lp_opts.integrality = false;
      lp_opts.terminal_removed = &pre.removed;
      OperationalModelHandle lp_h = build_operational(inst, p, x_prime[p], lp_opts);
      out.lp_feasible = milp::solve_lp(lp_h.model).status == SolveStatus::Optimal;

      std::optional<UnifiedCut> cut =
          separate_cut(inst, pre, config.method, p, x_prime_d[p], theta_prime[p],
                       needs_guide ? &guide : nullptr, -1);
      if (cut) {
        out.cuts.push_back({*cut, theta_prime[p]});
        if (config.disaggregation) {
          for (int r = 0; r < inst.num_routes(); ++r) {
            const double theta_pr = master.x[ctx.theta_route[p][r]];
            std::optional<UnifiedCut> rcut =
                separate_cut(inst, pre, config.method, p, x_prime_d[p], theta_pr,
                             needs_guide ? &guide : nullptr, r);
            if (rcut) out.cuts.push_back({*rcut, theta_pr});
          }
        }
      }
      return out;
    };
    if (config.threads > 1 && inst.periods > 1) {
      std::vector<std::future<PeriodSeparation>> futs;
      for (int p = 0; p < inst.periods; ++p)
        futs.push_back(std::async(std::launch::async, separate_period, p));
      for (int p = 0; p < inst.periods; ++p) seps[p] = futs[p].get();
    } else {
      for (int p = 0; p < inst.periods; ++p) seps[p] = separate_period(p);
    }
    std::vector<char> lp_feasible(inst.periods, 1);
    for (int p = 0; p < inst.periods; ++p) {
      lp_feasible[p] = seps[p].lp_feasible;
      for (auto& [cut, theta_src] : seps[p].cuts) {
        if (add_cut_row(cut)) {
          ++log.bcuts;
          if (audit) audit->linear.push_back({cut, x_prime[p], theta_src});
        }
      }
    }
    log.t_lp_ms = ms_between(t_lp, clock::now());

    // Phase 3: integer subproblems, monotone cuts, incumbent.
    const auto t_ip = clock::now();
    bool all_lp_feasible = true;
    for (char f : lp_feasible) all_lp_feasible &= f != 0;
    if (all_lp_feasible) {
      double candidate = 0.0;
      bool candidate_ok = true;
      PlanSolution plan;
      for (int p = 0; p < inst.periods; ++p) {
        milp::SolveLimits slim;
        slim.time_limit_sec = std::max(1.0, time_left());
        OperationalOptions op_opts;
        op_opts.terminal_removed = &pre.removed;
        OperationalValue q = solve_operational(inst, p, x_prime[p], slim, op_opts);
        if (q.feasible) {
          if (theta_prime[p] < q.lower_bound - kViolationTol) {
            // Monotone optimality cut at the proven subproblem bound.
            std::vector<std::pair<int, double>> terms{{ctx.theta[p], 1.0}};
            for (int c = 0; c < strategic_dim(inst); ++c) {
              const int a = ctx.pool.get_or_create(
                  ctx.model, inst, ctx.sv.x,
                  {p, IndicatorPool::KeyKind::Component, c, x_prime[p][c]});
              terms.push_back({a, q.lower_bound});
            }
            ctx.model.add_row(std::move(terms), RowSense::GE, q.lower_bound);
            ++log.mcuts;
            if (audit) audit->monotone.push_back({p, x_prime[p], q.lower_bound, true});
          }
          OperationalModelHandle hh = build_operational(inst, p, x_prime[p], op_opts);
          plan.states.push_back(unflatten_state(inst, x_prime[p]));
          plan.schedule.periods.push_back(hh.extract(inst, q.primal));
          candidate += std::pow(inst.gamma, p) *
                       (ctx.sv.invest_cost(p, master.x) +
                        money_to_dollars(maintenance_cost_cents(inst, plan.states.back())) +
                        q.value);
        } else {
          candidate_ok = false;
          // Strengthened monotone feasibility cuts: per-route fleet test,
          // aggregate-charger test, generic disjunction.
          bool any_route_cut = false;
          if (config.monotone_strengthening) {
            for (int r = 0; r < inst.num_routes(); ++r) {
              if (!feasibility_probe_single_route(inst, p, r, x_prime[p])) continue;
              any_route_cut = true;
              std::vector<std::pair<int, double>> terms;
              for (int b = 0; b < inst.num_bus_types(); ++b) {
                const int a = ctx.pool.get_or_create(
                    ctx.model, inst, ctx.sv.x,
                    {p, IndicatorPool::KeyKind::Component, comp_eta_depot(inst, r, b),
                     x_prime[p][comp_eta_depot(inst, r, b)]});
                terms.push_back({a, 1.0});
              }
              const int mixed = x_prime[p][comp_eta_onroute(inst, r)] +
                                x_prime[p][comp_eta_conventional(inst, r)];
              const int a = ctx.pool.get_or_create(
                  ctx.model, inst, ctx.sv.x,
                  {p, IndicatorPool::KeyKind::RouteMixedFleet, r, mixed});
              terms.push_back({a, 1.0});
              ctx.model.add_row(std::move(terms), RowSense::GE, 1.0);
              ++log.mcuts;
              if (audit)
                audit->monotone.push_back(
                    {p, x_prime[p], std::numeric_limits<double>::quiet_NaN(), false});
            }
          }
          if (!any_route_cut) {
            std::optional<int> chi_lb;
            if (config.monotone_strengthening) {
              milp::SolveLimits plim;
              plim.time_limit_sec = std::min(30.0, std::max(1.0, time_left()));
              chi_lb = feasibility_probe_aggregate(inst, p, x_prime[p], plim);
            }
            int total_chargers = 0;
            for (int i = 0; i < inst.num_depots(); ++i)
              for (int k = 0; k < inst.num_charger_types(); ++k)
                total_chargers += x_prime[p][comp_chi_depot(inst, i, k)];
            if (chi_lb && *chi_lb > total_chargers) {
              // Aggregate cut: fleet, fast chargers, or the depot-charger
              // total must grow.
              std::vector<std::pair<int, double>> terms;
              for (int r = 0; r < inst.num_routes(); ++r) {
                for (int b = 0; b < inst.num_bus_types(); ++b) {
                  const int c = comp_eta_depot(inst, r, b);
                  terms.push_back({ctx.pool.get_or_create(
                                       ctx.model, inst, ctx.sv.x,
                                       {p, IndicatorPool::KeyKind::Component, c, x_prime[p][c]}),
                                   1.0});
                }
                const int c1 = comp_eta_onroute(inst, r);
                const int c2 = comp_eta_conventional(inst, r);
                terms.push_back({ctx.pool.get_or_create(
                                     ctx.model, inst, ctx.sv.x,
                                     {p, IndicatorPool::KeyKind::Component, c1, x_prime[p][c1]}),
                                 1.0});
                terms.push_back({ctx.pool.get_or_create(
                                     ctx.model, inst, ctx.sv.x,
                                     {p, IndicatorPool::KeyKind::Component, c2, x_prime[p][c2]}),
                                 1.0});
              }
              for (int j = 0; j < inst.num_terminals(); ++j) {
                const int c = comp_chi_terminal(inst, j);
                terms.push_back({ctx.pool.get_or_create(
                                     ctx.model, inst, ctx.sv.x,
                                     {p, IndicatorPool::KeyKind::Component, c, x_prime[p][c]}),
                                 1.0});
              }
              if (*chi_lb != std::numeric_limits<int>::max())
                terms.push_back(
                    {ctx.pool.get_or_create(ctx.model, inst, ctx.sv.x,
                                            {p, IndicatorPool::KeyKind::TotalDepotChargers, 0,
                                             *chi_lb - 1}),
                     1.0});
              ctx.model.add_row(std::move(terms), RowSense::GE, 1.0);
            } else {
              // Generic disjunction over every component of x_p.
              std::vector<std::pair<int, double>> terms;
              for (int c = 0; c < strategic_dim(inst); ++c)
                terms.push_back({ctx.pool.get_or_create(
                                     ctx.model, inst, ctx.sv.x,
                                     {p, IndicatorPool::KeyKind::Component, c, x_prime[p][c]}),
                                 1.0});
              ctx.model.add_row(std::move(terms), RowSense::GE, 1.0);
            }
            ++log.mcuts;
            if (audit)
              audit->monotone.push_back(
                  {p, x_prime[p], std::numeric_limits<double>::quiet_NaN(), false});
          }
        }
      }
      if (candidate_ok && candidate < ub - 1e-9) {
        ub = candidate;
        incumbent = std::move(plan);
      }
    }
    log.t_ip_ms = ms_between(t_ip, clock::now());

    log.lb = lb;
    log.ub = ub;
    log.indicators = ctx.pool.size();
    result.iterations.push_back(log);

    if (ub < milp::kInf && (ub - lb) / std::max(std::fabs(ub), 1e-9) <= config.rel_tol) break;
    if (log.bcuts == 0 && log.mcuts == 0) {
      // Nothing separated the master solution. Under early stopping the
      // master bound may simply be stale; re-solve it to optimality once
      // before concluding.
      if (!force_full_master && config.master_early_stop_sec > 0.0) {
        force_full_master = true;
        continue;
      }
      result.message = "no separating cut at the optimal master solution";
      break;
    }
    force_full_master = false;
  }

  if (result.status != SolveStatus::Infeasible) {
    result.lower_bound = lb;
    result.upper_bound = ub;
    result.plan = std::move(incumbent);
    if (result.plan && (ub - lb) / std::max(std::fabs(ub), 1e-9) <= config.rel_tol)
      result.status = SolveStatus::Optimal;
    else if (result.plan)
      result.status = SolveStatus::Feasible;
    else
      result.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Error;
  }
  return result;
}

}  // namespace bfep
