#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "bfep/envelope.hpp"

using namespace bfep;

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

// Hull oracle: a pair of points spans a lower-hull edge iff every point lies
// on or above its line; the envelope at m is the max over such edges.
double lower_hull_oracle(const std::vector<std::pair<int, double>>& pts, double m) {
  double best = -kInfD;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      const double slope = (pts[j].second - pts[i].second) / (pts[j].first - pts[i].first);
      const double intercept = pts[i].second - slope * pts[i].first;
      bool edge = true;
      for (const auto& p : pts)
        if (p.second < slope * p.first + intercept - 1e-9) edge = false;
      if (edge) best = std::max(best, slope * m + intercept);
    }
  if (pts.size() == 1) best = pts[0].second;
  return best;
}

}  // namespace

TEST_CASE("collinear points collapse to one segment") {
  const Envelope env = lower_envelope({{0, 3}, {1, 2}, {2, 1}, {3, 0}});
  REQUIRE(env.pieces.size() == 1);
  CHECK(env.pieces[0].slope == doctest::Approx(-1.0));
  CHECK(env.pieces[0].intercept == doctest::Approx(3.0));
  CHECK(env.breakpoints.size() == 2);
}

TEST_CASE("a strict corner yields two segments") {
  const Envelope env = lower_envelope({{0, 4}, {1, 2}, {2, 1}, {3, 0}});
  REQUIRE(env.pieces.size() == 2);
  CHECK(env.pieces[0].slope == doctest::Approx(-2.0));
  CHECK(env.pieces[1].slope == doctest::Approx(-1.0));
  // evaluation reproduces hull values on the grid
  CHECK(env.eval(0) == doctest::Approx(4.0));
  CHECK(env.eval(1) == doctest::Approx(2.0));
  CHECK(env.eval(2) == doctest::Approx(1.0));
  CHECK(env.eval(3) == doctest::Approx(0.0));
}

TEST_CASE("single point becomes a constant piece") {
  const Envelope env = lower_envelope({{0, 0.0}});
  REQUIRE(env.pieces.size() == 1);
  CHECK(env.pieces[0].slope == 0.0);
  CHECK(env.pieces[0].intercept == doctest::Approx(0.0));
}

TEST_CASE("infeasible prefix becomes a floor bound") {
  const Envelope env = lower_envelope({{0, kInfD}, {1, kInfD}, {2, 1.0}, {3, 0.0}});
  REQUIRE(env.min_m.has_value());
  CHECK(*env.min_m == 2);
  CHECK(env.pieces.size() == 1);
  CHECK(env.eval(2) == doctest::Approx(1.0));
}

TEST_CASE("upper envelope is concave with decreasing slopes") {
  const Envelope env = upper_envelope({{0, 0.0}, {1, 0.9}, {2, 1.5}, {3, 1.8}, {4, 1.8}});
  for (size_t i = 1; i < env.pieces.size(); ++i)
    CHECK(env.pieces[i].slope < env.pieces[i - 1].slope + 1e-12);
  // every input point lies on or below every piece
  for (const auto& [m, v] : std::vector<std::pair<int, double>>{
           {0, 0.0}, {1, 0.9}, {2, 1.5}, {3, 1.8}, {4, 1.8}})
    CHECK(v <= env.eval(m) + 1e-9);
}

TEST_CASE("randomized envelopes match the pairwise hull oracle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<std::pair<int, double>> pts;
    for (int m = 0; m < n; ++m)
      pts.push_back({m, static_cast<double>(rng() % 1000) / 37.0});
    const Envelope env = lower_envelope(pts);
    for (const auto& [m, v] : pts) {
      CHECK(env.eval(m) == doctest::Approx(lower_hull_oracle(pts, m)).epsilon(1e-9));
      CHECK(env.eval(m) <= v + 1e-9);  // never above an input point
    }
    // slopes strictly increasing
    for (size_t i = 1; i < env.pieces.size(); ++i)
      CHECK(env.pieces[i].slope > env.pieces[i - 1].slope - 1e-12);
  }
}

TEST_CASE("duplicate grid points are rejected") {
  CHECK_THROWS_AS(lower_envelope({{1, 2.0}, {1, 3.0}}), std::invalid_argument);
}
