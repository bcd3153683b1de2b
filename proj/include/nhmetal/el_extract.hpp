#pragma once

#include <cstdint>
#include <vector>

#include "nhmetal/contour.hpp"
#include "nhmetal/newton.hpp"

namespace nhm {

struct Ep2dOptions {
  RefineOptions refine{};
  double mergeTol = 1e-6;
  /// Max |Im E^2| / scale over the grid below which the model is treated as
  /// sigma_x-symmetric (one constraint, ELs are contours of Re E^2).
  double symmetricTol = 1e-12;
};

/// EPs of a 2D section: refined contour lines for symmetric models, Newton
/// roots seeded from double sign-change cells otherwise, plus touching zeros
/// (tangency points) found as critical points of Re E^2.
ELSet findEp2dGeneric(const Section& s, const GridSpec& g, const Ep2dOptions& opt = {});

struct TraceOptions {
  RefineOptions corrector{};
  double closureTol = 1e-6;
  double hMin = 1e-3;
  double hMax = 5e-2;
  double turnTargetDeg = 5.0;
  std::size_t maxPoints = 20000;
};

/// Predictor-corrector continuation of a 3D exceptional line from a seed on it.
PolyCurve traceEl3d(const Section& s, const Momentum& seed, const TraceOptions& opt = {});

/// Unit tangent grad Re E^2 x grad Im E^2 at k; throws TangentDegenerate.
Vec3 elTangent(const Section& s, const Momentum& k, JacobianSource src = JacobianSource::Analytic);

/// Cells of a 3D lattice whose corners show sign changes of both Re E^2 and Im E^2.
std::vector<std::uint8_t> doubleSignChangeCells(const GridSpec& g, const std::vector<double>& re,
                                                const std::vector<double>& im);
namespace serial {
std::vector<std::uint8_t> doubleSignChangeCells(const GridSpec& g, const std::vector<double>& re,
                                                const std::vector<double>& im);
}  // namespace serial

/// One Newton-refined seed per connected cluster of double sign-change cells.
std::vector<Momentum> seedSearch3d(const Section& s, const GridSpec& g, const RefineOptions& opt = {},
                                   double mergeTol = 1e-6);

/// Seeds then traces every distinct component.
ELSet extractEl3d(const Section& s, const GridSpec& g, const TraceOptions& opt = {});

enum class FermiLabel : std::uint8_t { Gapped = 0, Fermi = 1, Boundary = 2 };
enum class FermiDefinition { FermiVolume2D, FermiSeifert3D };

const char* to_string(FermiLabel l) noexcept;
const char* to_string(FermiDefinition d) noexcept;

/// Per-cell labels; cell (i, j[, l]) spans vertices i..i+1 etc. and is
/// indexed x-fastest over GridSpec::cells().
struct FermiClassification {
  GridSpec grid;
  FermiDefinition definition = FermiDefinition::FermiVolume2D;
  std::vector<FermiLabel> labels;

  std::size_t count(FermiLabel l) const;
  std::array<int, 3> cellIndex(std::size_t flat) const;
  Momentum cellCentre(std::size_t flat) const;
};

/// A cell is on the Im E^2 = 0 set when |Im| <= tol*scale at every corner or
/// Im changes sign across it. Such a cell is FERMI when Re E^2 < -tol*scale
/// at all corners and BOUNDARY when Re E^2 changes sign; everything else is
/// GAPPED.
FermiClassification fermiClassify(const Section& s, const GridSpec& g, double tol = 1e-12);
namespace serial {
FermiClassification fermiClassify(const Section& s, const GridSpec& g, double tol = 1e-12);
}  // namespace serial

}  // namespace nhm
