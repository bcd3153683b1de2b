#pragma once

#include <vector>

#include "nhmetal/common.hpp"

namespace nhm {

/// Ordered momenta along an exceptional line, in unwrapped coordinates. For
/// closed curves the last point repeats the first, shifted by 2*pi*winding.
struct PolyCurve {
  std::vector<Momentum> points;
  bool closed = false;
  std::array<int, 3> winding{0, 0, 0};
  double residualMax = 0.0;

  double length() const;
  bool contractible() const { return winding == std::array<int, 3>{0, 0, 0}; }
};

struct ELSet {
  std::vector<PolyCurve> curves;
  std::vector<Momentum> isolatedPoints;
  /// Coalescence points where d itself vanishes (not EPs in the strict sense).
  std::vector<Momentum> degeneracyPoints;

  bool empty() const { return curves.empty() && isolatedPoints.empty() && degeneracyPoints.empty(); }
};

/// Smallest torus distance from k to any segment of the curve.
double distanceToCurve(const Momentum& k, const PolyCurve& c);

/// Symmetric Hausdorff distance between two curves (torus metric, vertex sampled).
double hausdorffDistance(const PolyCurve& a, const PolyCurve& b);

}  // namespace nhm
