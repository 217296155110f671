// Command-line front end: generate, validate, preprocess, solve, analyze,
// and run the acceleration ablation.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bfep/analysis.hpp"
#include "bfep/generator.hpp"
#include "bfep/heuristics.hpp"
#include "bfep/instance_io.hpp"
#include "bfep/lbbd.hpp"
#include "bfep/milp/solver.hpp"

namespace fs = std::filesystem;
using namespace bfep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBackend = 3;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string status_name(milp::SolveStatus s) {
  switch (s) {
    case milp::SolveStatus::Optimal: return "optimal";
    case milp::SolveStatus::Feasible: return "feasible";
    case milp::SolveStatus::Infeasible: return "infeasible";
    case milp::SolveStatus::Unbounded: return "unbounded";
    case milp::SolveStatus::TimeLimit: return "time_limit";
    case milp::SolveStatus::Error: return "error";
  }
  return "unknown";
}

std::string iteration_log_json(const std::vector<IterationLog>& logs) {
  std::string out;
  for (const IterationLog& log : logs) out += log.to_json() + "\n";
  return out;
}

struct SolveArgs {
  std::string engine = "lbbd";
  std::string cuts = "closest";
  double tol = 1e-4;
  double time_limit = milp::kInf;
  int threads = 1;
  std::uint64_t seed = 0;
  bool no_pp = false, no_da = false, no_pd = false, no_mc = false;
  std::string out_dir = ".";
  std::string instance_path;
};

CutMethod parse_cuts(const std::string& name) {
  if (name == "standard") return CutMethod::Standard;
  if (name == "mw") return CutMethod::MW;
  if (name == "mis") return CutMethod::MIS;
  if (name == "closest") return CutMethod::Closest;
  if (name == "deepest" || name == "deepest_l1") return CutMethod::DeepestL1;
  throw CLI::ValidationError("--cuts", "unknown cut method: " + name);
}

int run_solve(const SolveArgs& args) {
  const Instance inst = load_instance_file(args.instance_path);
  const auto violations = validate_instance(inst);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "invalid instance: " << v.code << " at " << v.path << "\n";
    return kExitUsage;
  }

  SolveResult res;
  if (args.engine == "lbbd") {
    LbbdConfig cfg;
    cfg.method = parse_cuts(args.cuts);
    cfg.rel_tol = args.tol;
    cfg.time_limit_sec = args.time_limit;
    cfg.preprocessing = !args.no_pp;
    cfg.disaggregation = !args.no_da;
    cfg.partial_decomposition = !args.no_pd;
    cfg.monotone_strengthening = !args.no_mc;
    cfg.threads = args.threads;
    res = run_lbbd(inst, cfg);
  } else {
    const PreprocessReport pre =
        args.no_pp ? empty_preprocessing(inst) : apply_preprocessing(inst);
    milp::SolveLimits lim;
    lim.rel_gap = args.tol;
    lim.time_limit_sec = args.time_limit;
    if (args.engine == "extensive") {
      res = solve_extensive(inst, pre, lim);
    } else if (args.engine == "as") {
      res = run_arc_selection(inst, pre, {}, lim);
    } else if (args.engine == "pr") {
      res = run_policy_restriction(inst, pre, lim);
    } else {
      std::cerr << "unknown engine: " << args.engine << "\n";
      return kExitUsage;
    }
  }

  const fs::path dir(args.out_dir);
  if (!res.iterations.empty()) write_file(dir / "log.jsonl", iteration_log_json(res.iterations));
  if (!res.phases.empty()) {
    std::string phases;
    for (const PhaseLog& log : res.phases) phases += log.to_json() + "\n";
    write_file(dir / "phases.jsonl", phases);
  }
  if (res.plan) {
    write_file(dir / "solution.json",
               plan_to_json(inst, *res.plan, res.lower_bound, res.upper_bound,
                            status_name(res.status)));
    std::cout << "status=" << status_name(res.status) << " objective=" << res.upper_bound
              << " lb=" << res.lower_bound << " gap=" << res.gap() << "\n";
    return kExitOk;
  }
  std::cout << "status=" << status_name(res.status);
  if (!res.message.empty()) std::cout << " (" << res.message << ")";
  std::cout << "\n";
  return res.status == milp::SolveStatus::Infeasible ? kExitInfeasible : kExitBackend;
}

int run_ablate(const std::string& instance_path, double tol, double time_limit) {
  const Instance inst = load_instance_file(instance_path);
  struct Config {
    const char* name;
    LbbdConfig cfg;
  };
  std::vector<Config> configs;
  auto base = LbbdConfig{};
  base.rel_tol = tol;
  base.time_limit_sec = time_limit;
  configs.push_back({"All", base});
  auto v = base;
  v.preprocessing = false;
  configs.push_back({"All-PP", v});
  v = base;
  v.disaggregation = false;
  configs.push_back({"All-DA", v});
  v = base;
  v.partial_decomposition = false;
  configs.push_back({"All-PD", v});
  v = base;
  v.method = CutMethod::Standard;
  configs.push_back({"All-CC", v});
  v = base;
  v.monotone_strengthening = false;
  configs.push_back({"All-MC", v});
  v = base;
  v.preprocessing = v.disaggregation = v.partial_decomposition = v.monotone_strengthening = false;
  v.method = CutMethod::Standard;
  configs.push_back({"None", v});

  std::cout << "config,opt,gap,time_s,iter,bcuts,mcuts,indicators\n";
  for (const Config& c : configs) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult res = run_lbbd(inst, c.cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    long bcuts = 0, mcuts = 0;
    int indicators = 0;
    for (const IterationLog& log : res.iterations) {
      bcuts += log.bcuts;
      mcuts += log.mcuts;
      indicators = log.indicators;
    }
    std::cout << c.name << ',' << (res.status == milp::SolveStatus::Optimal ? 1 : 0) << ','
              << res.gap() << ',' << secs << ',' << res.iterations.size() << ',' << bcuts << ','
              << mcuts << ',' << indicators << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-period bus fleet electrification planning"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  GeneratorParams gp;
  std::uint64_t seed = 0;
  std::string gen_out = "instance.json";
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--routes", gp.routes, "Route count");
  gen->add_option("--depots", gp.depots, "Depot count");
  gen->add_option("--terminals", gp.terminals, "Terminal count");
  gen->add_option("--bus-types", gp.bus_types, "Depot BEB type count");
  gen->add_option("--periods", gp.periods, "Planning periods");
  gen->add_option("--intervals", gp.intervals, "Intervals per day");
  gen->add_option("--peak-min", gp.peak_min, "Minimum demand peak");
  gen->add_option("--peak-max", gp.peak_max, "Maximum demand peak");
  gen->add_option("--batteries", gp.batteries, "Battery sizes per bus type");
  gen->add_flag("--no-onroute", [&gp](std::int64_t) { gp.onroute_enabled = false; },
                "Disable on-route buses/chargers");
  gen->add_flag("--shared-budget", [&gp](std::int64_t) { gp.shared_budget = true; },
                "Pool the budget over the horizon");
  gen->add_option("--out", gen_out, "Output file");

  // validate
  auto* validate = app.add_subcommand("validate", "Validate an instance file");
  std::string val_path;
  validate->add_option("instance", val_path, "Instance JSON")->required();

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Run dual reductions and envelopes");
  std::string pre_path, pre_out;
  preprocess->add_option("instance", pre_path, "Instance JSON")->required();
  preprocess->add_option("--out", pre_out, "Report file (stdout when absent)");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve an instance");
  SolveArgs sa;
  solve->add_option("instance", sa.instance_path, "Instance JSON")->required();
  solve->add_option("--engine", sa.engine, "extensive | lbbd | as | pr");
  solve->add_option("--cuts", sa.cuts, "standard | mw | mis | closest | deepest");
  solve->add_option("--tol", sa.tol, "Relative optimality tolerance");
  solve->add_option("--time-limit", sa.time_limit, "Seconds");
  solve->add_option("--threads", sa.threads, "Concurrent separations");
  solve->add_option("--seed", sa.seed, "Seed (reserved for randomized engines)");
  solve->add_flag("--no-pp", sa.no_pp, "Disable preprocessing");
  solve->add_flag("--no-da", sa.no_da, "Disable route disaggregation");
  solve->add_flag("--no-pd", sa.no_pd, "Disable the averaged relaxation in the master");
  solve->add_flag("--no-mc", sa.no_mc, "Disable strengthened monotone cuts");
  solve->add_option("--out", sa.out_dir, "Output directory");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Cost breakdown and structural checks");
  std::string an_inst, an_sol, an_out;
  analyze->add_option("instance", an_inst, "Instance JSON")->required();
  analyze->add_option("solution", an_sol, "solution.json")->required();
  analyze->add_option("--out", an_out, "Output directory (stdout when absent)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Acceleration ablation table");
  std::string ab_inst;
  double ab_tol = 1e-4, ab_time = milp::kInf;
  ablate->add_option("instance", ab_inst, "Instance JSON")->required();
  ablate->add_option("--tol", ab_tol, "Relative optimality tolerance");
  ablate->add_option("--time-limit", ab_time, "Seconds per configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const Instance inst = generate_synthetic(gp, seed);
      write_file(gen_out, save_instance(inst));
      std::cout << "wrote " << gen_out << "\n";
      return kExitOk;
    }
    if (validate->parsed()) {
      const Instance inst = load_instance_file(val_path);
      const auto violations = validate_instance(inst);
      for (const auto& v : violations)
        std::cout << v.code << " at " << v.path << (v.detail.empty() ? "" : ": " + v.detail)
                  << "\n";
      std::cout << (violations.empty() ? "valid" : "invalid") << "\n";
      return violations.empty() ? kExitOk : kExitInfeasible;
    }
    if (preprocess->parsed()) {
      const Instance inst = load_instance_file(pre_path);
      const PreprocessReport rep = apply_preprocessing(inst);
      if (pre_out.empty())
        std::cout << rep.to_json() << "\n";
      else
        write_file(pre_out, rep.to_json());
      return kExitOk;
    }
    if (solve->parsed()) return run_solve(sa);
    if (analyze->parsed()) {
      const Instance inst = load_instance_file(an_inst);
      std::ifstream in(an_sol, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + an_sol);
      std::stringstream ss;
      ss << in.rdbuf();
      const PlanSolution plan = plan_from_json(inst, ss.str());
      const auto violations = verify_solution(inst, plan);
      if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << v.code << " at " << v.path << "\n";
        return kExitInfeasible;
      }
      const CostBreakdown bd = cost_breakdown(inst, plan);
      const auto opex = check_monotone_opex(inst, plan);
      const auto phases = check_three_phase(inst, plan);
      if (an_out.empty()) {
        std::cout << bd.to_json() << "\n" << phases.to_json() << "\n";
      } else {
        write_file(fs::path(an_out) / "breakdown.json", bd.to_json());
        write_file(fs::path(an_out) / "three_phase.json", phases.to_json());
        write_file(fs::path(an_out) / "service.csv", CostBreakdown::service_csv(inst, plan));
        write_file(fs::path(an_out) / "chargers.csv", CostBreakdown::chargers_csv(inst, plan));
      }
      std::cout << "monotone_opex="
                << (opex.status == MonotoneOpexReport::Status::Ok
                        ? "ok"
                        : opex.status == MonotoneOpexReport::Status::NotApplicable
                              ? "not_applicable"
                              : "violated")
                << "\n";
      return kExitOk;
    }
    if (ablate->parsed()) return run_ablate(ab_inst, ab_tol, ab_time);
  } catch (const ParseError& e) {
    std::cerr << "parse error at line " << e.line << ", column " << e.column << ": " << e.what()
              << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const milp::BackendError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  }
  return kExitUsage;
}
