#include <algorithm>

#include "nhmetal/el_extract.hpp"

namespace nhm {

const char* to_string(FermiLabel l) noexcept {
  switch (l) {
    case FermiLabel::Gapped: return "GAPPED";
    case FermiLabel::Fermi: return "FERMI";
    case FermiLabel::Boundary: return "BOUNDARY";
  }
  return "?";
}

const char* to_string(FermiDefinition d) noexcept {
  return d == FermiDefinition::FermiVolume2D ? "FERMI_VOLUME_2D" : "FERMI_SEIFERT_3D";
}

std::size_t FermiClassification::count(FermiLabel l) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

std::array<int, 3> FermiClassification::cellIndex(std::size_t flat) const {
  const auto cx = static_cast<std::size_t>(grid.cells(0));
  const auto cy = static_cast<std::size_t>(grid.cells(1));
  return {static_cast<int>(flat % cx), static_cast<int>((flat / cx) % cy),
          grid.dim == 3 ? static_cast<int>(flat / (cx * cy)) : 0};
}

Momentum FermiClassification::cellCentre(std::size_t flat) const {
  const auto c = cellIndex(flat);
  if (grid.dim == 2)
    return {grid.coord(0, c[0]) + 0.5 * grid.spacing(0), grid.coord(1, c[1]) + 0.5 * grid.spacing(1)};
  return {grid.coord(0, c[0]) + 0.5 * grid.spacing(0), grid.coord(1, c[1]) + 0.5 * grid.spacing(1),
          grid.coord(2, c[2]) + 0.5 * grid.spacing(2)};
}

namespace {

struct Vertices {
  std::vector<double> re, im, scale;
};

Vertices sample(const Section& s, const GridSpec& g) {
  if (s.dimension() != g.dim) throw Error(Errc::DimensionMismatch, "grid and model dimensions differ");
  g.validate();
  Vertices v;
  const std::size_t n = g.size();
  v.re.resize(n);
  v.im.resize(n);
  v.scale.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const EpResidual r = epResidual(s, g.point(u));
    v.re[u] = r.f[0];
    v.im[u] = r.f[1];
    v.scale[u] = r.scale;
  }
  return v;
}

inline FermiLabel labelCell(const GridSpec& g, const Vertices& v, double tol, int i, int j, int l) {
  const int corners = g.dim == 3 ? 8 : 4;
  bool imAllZero = true, imNeg = false, imPos = false;
  bool reAllNeg = true, reNeg = false, rePos = false;
  for (int c = 0; c < corners; ++c) {
    const std::size_t idx = g.flat(g.wrapIndex(0, i + (c & 1)), g.wrapIndex(1, j + ((c >> 1) & 1)),
                                   g.dim == 3 ? g.wrapIndex(2, l + (c >> 2)) : 0);
    const double t = tol * v.scale[idx];
    imAllZero = imAllZero && std::abs(v.im[idx]) <= t;
    (v.im[idx] < 0.0 ? imNeg : imPos) = true;
    reAllNeg = reAllNeg && v.re[idx] < -t;
    (v.re[idx] < 0.0 ? reNeg : rePos) = true;
  }
  const bool onImZero = imAllZero || (imNeg && imPos);
  if (!onImZero) return FermiLabel::Gapped;
  if (reNeg && rePos) return FermiLabel::Boundary;
  return reAllNeg ? FermiLabel::Fermi : FermiLabel::Gapped;
}

FermiClassification prepare(const GridSpec& g) {
  FermiClassification out;
  out.grid = g;
  out.definition = g.dim == 3 ? FermiDefinition::FermiSeifert3D : FermiDefinition::FermiVolume2D;
  out.labels.assign(g.cellCount(), FermiLabel::Gapped);
  return out;
}

}  // namespace

FermiClassification fermiClassify(const Section& s, const GridSpec& g, double tol) {
  const Vertices v = sample(s, g);
  FermiClassification out = prepare(g);
  const int cx = g.cells(0), cy = g.cells(1), cz = g.dim == 3 ? g.cells(2) : 1;
#pragma omp parallel for collapse(2) schedule(static)
  for (int l = 0; l < cz; ++l)
    for (int j = 0; j < cy; ++j)
      for (int i = 0; i < cx; ++i)
        out.labels[static_cast<std::size_t>(i + cx * (j + cy * l))] = labelCell(g, v, tol, i, j, l);
  return out;
}

namespace serial {
FermiClassification fermiClassify(const Section& s, const GridSpec& g, double tol) {
  const Vertices v = sample(s, g);
  FermiClassification out = prepare(g);
  const int cx = g.cells(0), cy = g.cells(1), cz = g.dim == 3 ? g.cells(2) : 1;
  for (int l = 0; l < cz; ++l)
    for (int j = 0; j < cy; ++j)
      for (int i = 0; i < cx; ++i)
        out.labels[static_cast<std::size_t>(i + cx * (j + cy * l))] = labelCell(g, v, tol, i, j, l);
  return out;
}
}  // namespace serial

}  // namespace nhm
