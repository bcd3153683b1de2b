#include "nhmetal/grid.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace nhm {

GridSpec GridSpec::brillouin(int dim, std::array<int, 3> n) {
  GridSpec g;
  g.dim = dim;
  g.n = n;
  if (dim == 2) g.n[2] = 1;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) throw Error(Errc::InvalidConfig, "grid dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 2) throw Error(Errc::InvalidConfig, fmt::format("grid axis {} needs at least 2 samples", a));
    if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a]))
      throw Error(Errc::InvalidConfig, fmt::format("grid axis {} has an empty range", a));
  }
}

double GridSpec::spacing(int axis) const {
  return periodic[axis] ? (hi[axis] - lo[axis]) / n[axis] : (hi[axis] - lo[axis]) / (n[axis] - 1);
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n[a]);
  return s;
}

std::size_t GridSpec::cellCount() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(cells(a));
  return s;
}

std::array<int, 3> GridSpec::unflatten(std::size_t idx) const {
  const auto n0 = static_cast<std::size_t>(n[0]);
  const auto n1 = static_cast<std::size_t>(n[1]);
  return {static_cast<int>(idx % n0), static_cast<int>((idx / n0) % n1), static_cast<int>(idx / (n0 * n1))};
}

Momentum GridSpec::point(int i, int j, int l) const {
  if (dim == 2) return {coord(0, i), coord(1, j)};
  return {coord(0, i), coord(1, j), coord(2, l)};
}

Momentum GridSpec::point(std::size_t idx) const {
  const auto ijk = unflatten(idx);
  return point(ijk[0], ijk[1], ijk[2]);
}

int GridSpec::wrapIndex(int axis, int i) const {
  if (!periodic[axis]) return i;
  const int m = n[axis];
  return ((i % m) + m) % m;
}

const std::array<std::string_view, 6>& FieldGrid::latticeNames() {
  static const std::array<std::string_view, 6> names{"reE2", "imE2", "sqrtAbsReE2", "sqrtAbsImE2", "reGap", "imGap"};
  return names;
}

const std::vector<double>& FieldGrid::lattice(std::string_view name) const {
  if (name == "reE2") return reE2;
  if (name == "imE2") return imE2;
  if (name == "sqrtAbsReE2") return sqrtAbsReE2;
  if (name == "sqrtAbsImE2") return sqrtAbsImE2;
  if (name == "reGap") return reGap;
  if (name == "imGap") return imGap;
  throw Error(Errc::InvalidConfig, fmt::format("unknown lattice '{}'", name));
}

namespace {

FieldGrid allocate(const GridSpec& g) {
  g.validate();
  FieldGrid f;
  f.grid = g;
  const std::size_t n = g.size();
  for (auto* v : {&f.reE2, &f.imE2, &f.sqrtAbsReE2, &f.sqrtAbsImE2, &f.reGap, &f.imGap}) v->assign(n, 0.0);
  return f;
}

inline void fillPoint(const Section& s, FieldGrid& f, std::size_t idx) {
  const cplx e2 = discriminant(s.eval(f.grid.point(idx)));
  const cplx gap = 2.0 * principalSqrt(e2);
  f.reE2[idx] = e2.real();
  f.imE2[idx] = e2.imag();
  f.sqrtAbsReE2[idx] = std::sqrt(std::abs(e2.real()));
  f.sqrtAbsImE2[idx] = std::sqrt(std::abs(e2.imag()));
  f.reGap[idx] = gap.real();
  f.imGap[idx] = gap.imag();
}

}  // namespace

FieldGrid scanFields(const Section& s, const GridSpec& g) {
  if (s.dimension() != g.dim) throw Error(Errc::DimensionMismatch, "grid and model dimensions differ");
  FieldGrid f = allocate(g);
  const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) fillPoint(s, f, static_cast<std::size_t>(idx));
  return f;
}

namespace serial {

FieldGrid scanFields(const Section& s, const GridSpec& g) {
  if (s.dimension() != g.dim) throw Error(Errc::DimensionMismatch, "grid and model dimensions differ");
  FieldGrid f = allocate(g);
  for (std::size_t idx = 0; idx < g.size(); ++idx) fillPoint(s, f, idx);
  return f;
}

}  // namespace serial

double symmetryResidual(const Section& s, const SymmetryOp& q, const GridSpec& g) {
  if (s.dimension() != g.dim) throw Error(Errc::DimensionMismatch, "grid and model dimensions differ");
  g.validate();
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const Mat2c h = hamiltonian(s.eval(g.point(static_cast<std::size_t>(idx))));
    worst = std::max(worst, symmetryDefect(h, q));
  }
  return worst;
}

}  // namespace nhm
