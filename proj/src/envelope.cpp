#include "bfep/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bfep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// z-component of (b - a) x (c - b); positive = left turn.
double cross(const std::pair<int, double>& a, const std::pair<int, double>& b,
             const std::pair<int, double>& c) {
  return (static_cast<double>(b.first) - a.first) * (c.second - b.second) -
         (b.second - a.second) * (static_cast<double>(c.first) - b.first);
}

Envelope build(std::vector<std::pair<int, double>> pts, bool lower) {
  Envelope env;
  env.lower = lower;
  std::sort(pts.begin(), pts.end());
  for (size_t i = 1; i < pts.size(); ++i)
    if (pts[i].first == pts[i - 1].first)
      throw std::invalid_argument("envelope: duplicate grid point");

  std::vector<std::pair<int, double>> finite;
  for (const auto& p : pts) {
    if (std::isinf(p.second)) {
      if (!lower) throw std::invalid_argument("upper envelope: infinite value");
    } else {
      finite.push_back(p);
    }
  }
  if (lower && finite.size() < pts.size()) {
    // Infeasible entries must form a prefix of the grid for the floor bound
    // m >= first-feasible to capture them.
    for (size_t i = 0; i + 1 < pts.size(); ++i)
      if (std::isinf(pts[i + 1].second) && !std::isinf(pts[i].second))
        throw std::invalid_argument("lower envelope: infeasible points must form a prefix");
    if (!finite.empty()) env.min_m = finite.front().first;
  }
  if (finite.empty()) return env;

  // Monotone chain over the sorted grid. The lower hull keeps right turns
  // (cross <= 0 pops), the upper hull left turns; collinear points merge.
  std::vector<std::pair<int, double>> hull;
  for (const auto& p : finite) {
    while (hull.size() >= 2) {
      const double c = cross(hull[hull.size() - 2], hull.back(), p);
      const bool pop = lower ? c <= 1e-12 : c >= -1e-12;
      if (!pop) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }

  env.breakpoints = hull;
  if (hull.size() == 1) {
    env.pieces.push_back({0.0, hull[0].second});
  } else {
    for (size_t i = 0; i + 1 < hull.size(); ++i) {
      const double slope =
          (hull[i + 1].second - hull[i].second) / (hull[i + 1].first - hull[i].first);
      env.pieces.push_back({slope, hull[i].second - slope * hull[i].first});
    }
  }
  return env;
}

}  // namespace

double Envelope::eval(double m) const {
  if (pieces.empty()) return lower ? -kInf : kInf;
  double v = pieces[0].slope * m + pieces[0].intercept;
  for (size_t i = 1; i < pieces.size(); ++i) {
    const double c = pieces[i].slope * m + pieces[i].intercept;
    v = lower ? std::max(v, c) : std::min(v, c);
  }
  return v;
}

Envelope lower_envelope(std::vector<std::pair<int, double>> points) {
  return build(std::move(points), true);
}

Envelope upper_envelope(std::vector<std::pair<int, double>> points) {
  return build(std::move(points), false);
}

}  // namespace bfep
