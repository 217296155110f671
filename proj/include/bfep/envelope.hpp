#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace bfep {

/// Piecewise-linear convex lower (or concave upper) envelope of a point set
/// over an integer grid. A lower envelope is the pointwise max of its pieces,
/// an upper envelope the pointwise min; slopes are strictly monotone.
struct Envelope {
  struct Piece {
    double slope = 0.0;
    double intercept = 0.0;
  };
  bool lower = true;
  std::vector<std::pair<int, double>> breakpoints;  // hull vertices, m ascending
  std::vector<Piece> pieces;
  // Lower case only: points with value +inf are excluded from the hull but
  // force m >= min_m.
  std::optional<int> min_m;

  double eval(double m) const;
};

/// Points must have distinct m. Lower envelopes accept +inf values
/// (infeasible grid entries); upper envelopes require finite values.
Envelope lower_envelope(std::vector<std::pair<int, double>> points);
Envelope upper_envelope(std::vector<std::pair<int, double>> points);

}  // namespace bfep
