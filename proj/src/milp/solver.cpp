#include "bfep/milp/solver.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "bfep/milp/branch_bound.hpp"
#include "bfep/milp/simplex.hpp"

namespace bfep::milp {

namespace {

class BuiltinBackend final : public SolverBackend {
 public:
  std::string name() const override { return "builtin"; }

  SolveOutcome solve_lp(const Model& model, const SolveLimits& limits,
                        bool want_ray) const override {
    (void)limits;  // the simplex runs to completion; its iteration cap guards runaway solves
    LpOptions opts;
    opts.want_ray = want_ray;
    return simplex_solve(model, opts);
  }

  SolveOutcome solve_mip(const Model& model, const SolveLimits& limits,
                         const std::vector<double>* warm_start) const override {
    return branch_and_bound(model, limits, warm_start);
  }
};

const std::map<std::string, const SolverBackend*>& registry() {
  static const BuiltinBackend builtin;
  static const std::map<std::string, const SolverBackend*> reg = {{"builtin", &builtin}};
  return reg;
}

}  // namespace

const SolverBackend& backend_by_name(const std::string& name) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw BackendError("unknown solver backend: " + name);
  return *it->second;
}

const SolverBackend& default_backend() {
  const char* env = std::getenv("BFEP_SOLVER");
  return backend_by_name(env && *env ? env : "builtin");
}

SolveOutcome solve_lp(const Model& model, const SolveLimits& limits, bool want_ray) {
  return default_backend().solve_lp(model, limits, want_ray);
}

SolveOutcome solve_mip(const Model& model, const SolveLimits& limits,
                       const std::vector<double>* warm_start) {
  return default_backend().solve_mip(model, limits, warm_start);
}

std::string to_mps(const Model& model, const std::string& name) {
  std::ostringstream out;
  out << "NAME          " << name << "\n";
  if (model.maximize) out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N  COST\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const char sense = model.rows[i].sense == RowSense::LE   ? 'L'
                       : model.rows[i].sense == RowSense::GE ? 'G'
                                                             : 'E';
    out << " " << sense << "  c" << i << "\n";
  }
  // COLUMNS wants entries grouped per variable.
  std::vector<std::vector<std::pair<int, double>>> by_var(model.num_vars());
  for (int i = 0; i < model.num_rows(); ++i)
    for (auto [j, c] : model.rows[i].terms) by_var[j].push_back({i, c});
  out << "COLUMNS\n";
  bool in_int = false;
  for (int j = 0; j < model.num_vars(); ++j) {
    const bool is_int = model.vars[j].kind != VarKind::Continuous;
    if (is_int && !in_int) {
      out << "    MARKER                 'MARKER'                 'INTORG'\n";
      in_int = true;
    } else if (!is_int && in_int) {
      out << "    MARKER                 'MARKER'                 'INTEND'\n";
      in_int = false;
    }
    if (model.vars[j].obj != 0.0)
      out << "    v" << j << "  COST  " << model.vars[j].obj << "\n";
    for (auto [i, c] : by_var[j]) out << "    v" << j << "  c" << i << "  " << c << "\n";
  }
  if (in_int) out << "    MARKER                 'MARKER'                 'INTEND'\n";
  out << "RHS\n";
  for (int i = 0; i < model.num_rows(); ++i)
    if (model.rows[i].rhs != 0.0) out << "    RHS  c" << i << "  " << model.rows[i].rhs << "\n";
  out << "BOUNDS\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    if (v.lo == 0.0 && v.hi == kInf) continue;
    if (v.lo == v.hi) {
      out << " FX BND  v" << j << "  " << v.lo << "\n";
      continue;
    }
    if (v.lo != 0.0) {
      if (std::isfinite(v.lo))
        out << " LO BND  v" << j << "  " << v.lo << "\n";
      else
        out << " MI BND  v" << j << "\n";
    }
    if (std::isfinite(v.hi)) out << " UP BND  v" << j << "  " << v.hi << "\n";
  }
  out << "ENDATA\n";
  return out.str();
}

}  // namespace bfep::milp
