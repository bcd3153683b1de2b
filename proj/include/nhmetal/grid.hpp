#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "nhmetal/models.hpp"

namespace nhm {

/// Regular sample lattice. Periodic axes sample [lo, hi) with n points and
/// wrap; open axes sample [lo, hi] inclusive.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> n{101, 101, 1};
  std::array<double, 3> lo{-kPi, -kPi, -kPi};
  std::array<double, 3> hi{kPi, kPi, kPi};
  std::array<bool, 3> periodic{true, true, true};

  static GridSpec brillouin(int dim, int n) { return brillouin(dim, {n, n, dim == 3 ? n : 1}); }
  static GridSpec brillouin(int dim, std::array<int, 3> n);

  void validate() const;

  double spacing(int axis) const;
  double coord(int axis, int i) const { return lo[axis] + spacing(axis) * i; }
  std::size_t size() const;
  /// Number of cells along an axis (wrapping cells included on periodic axes).
  int cells(int axis) const { return periodic[axis] ? n[axis] : n[axis] - 1; }
  std::size_t cellCount() const;

  std::size_t flat(int i, int j, int l = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) *
                                             (static_cast<std::size_t>(j) + static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(l));
  }
  std::array<int, 3> unflatten(std::size_t idx) const;
  Momentum point(std::size_t idx) const;
  Momentum point(int i, int j, int l = 0) const;
  /// Vertex index along an axis with periodic wrap applied.
  int wrapIndex(int axis, int i) const;
};

struct FieldGrid {
  GridSpec grid;
  std::vector<double> reE2;
  std::vector<double> imE2;
  std::vector<double> sqrtAbsReE2;
  std::vector<double> sqrtAbsImE2;
  std::vector<double> reGap;
  std::vector<double> imGap;

  const std::vector<double>& lattice(std::string_view name) const;
  static const std::array<std::string_view, 6>& latticeNames();
};

/// Pointwise spectral fields over a grid (OpenMP, deterministic output).
FieldGrid scanFields(const Section& s, const GridSpec& g);

namespace serial {
/// Single-threaded reference for scanFields; results are bit-identical.
FieldGrid scanFields(const Section& s, const GridSpec& g);
}  // namespace serial

/// Max over the grid of |H(k) - q H(k)^dagger q^{-1}|_F.
double symmetryResidual(const Section& s, const SymmetryOp& q, const GridSpec& g);

}  // namespace nhm
