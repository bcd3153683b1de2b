#pragma once

#include <span>
#include <vector>

#include "nhmetal/curves.hpp"
#include "nhmetal/grid.hpp"

namespace nhm {

/// Marching-squares iso-contours of a 2D lattice with linear interpolation
/// along cell edges. Periodic axes wrap, so contours crossing the zone
/// boundary come back closed with a winding vector. Curves keep the region
/// below iso on their left (counterclockwise around it); saddle cells are
/// resolved by the cell-center average.
std::vector<PolyCurve> contour2d(const GridSpec& g, std::span<const double> values, double iso = 0.0);

}  // namespace nhm
