#pragma once

#include <string>
#include <vector>

#include "nhmetal/curves.hpp"
#include "nhmetal/grid.hpp"

namespace nhm::svg {

enum class PlotKind { Heatmap2D, CurveOverlay, Section1D, Curve3DProjection };

struct PlotSpec {
  PlotKind kind = PlotKind::Heatmap2D;
  std::string title;
  std::string xLabel = "kx";
  std::string yLabel = "ky";
  std::string ramp = "viridis";  // or "diverging"
  int width = 640;
  int height = 560;
};

/// RGB triple in [0, 255] for t in [0, 1].
std::array<int, 3> colour(const std::string& ramp, double t);

/// Heatmap of a 2D lattice, optionally overlaid with curves (drawn modulo the
/// zone) and marked points.
std::string heatmap(const PlotSpec& spec, const GridSpec& g, const std::vector<double>& values,
                    const std::vector<PolyCurve>& curves = {}, const std::vector<Momentum>& points = {});

struct Series {
  std::string name;
  std::vector<double> x, y, err;  // err empty or same size as y
  std::string colour = "#1f77b4";
};

std::string section1d(const PlotSpec& spec, const std::vector<Series>& series);

/// Orthographic view of 3D curves along `view`, depth-cued; `markers` are drawn as dots.
std::string curves3d(const PlotSpec& spec, const std::vector<PolyCurve>& curves, const Vec3& view,
                     const std::vector<Momentum>& markers = {});

}  // namespace nhm::svg
