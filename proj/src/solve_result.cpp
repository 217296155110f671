#include "bfep/solve_result.hpp"

#include <sstream>

namespace bfep {

std::string IterationLog::to_json() const {
  std::ostringstream out;
  out << "{\"iter\":" << iter << ",\"lb\":" << lb << ",\"ub\":";
  if (ub >= milp::kInf)
    out << "null";
  else
    out << ub;
  out << ",\"bcuts\":" << bcuts << ",\"mcuts\":" << mcuts << ",\"indicators\":" << indicators
      << ",\"t_master_ms\":" << t_master_ms << ",\"t_lp_ms\":" << t_lp_ms
      << ",\"t_ip_ms\":" << t_ip_ms << "}";
  return out.str();
}

std::string PhaseLog::to_json() const {
  std::ostringstream out;
  out << "{\"phase\":\"" << phase << "\",\"arcs_total\":" << arcs_total
      << ",\"arcs_retained\":" << arcs_retained << ",\"lb\":";
  if (lb <= -milp::kInf)
    out << "null";
  else
    out << lb;
  out << ",\"ub\":";
  if (ub >= milp::kInf)
    out << "null";
  else
    out << ub;
  out << ",\"wall_ms\":" << wall_ms << "}";
  return out.str();
}

}  // namespace bfep
