#include "nhmetal/contour.hpp"

#include <unordered_map>

namespace nhm {

namespace {

struct Segment {
  int ci, cj;     // cell (lower-left vertex), unwrapped range
  int enter, exit;  // local edge ids: 0 bottom, 1 right, 2 top, 3 left
};

constexpr std::array<std::array<int, 2>, 4> kNeighbour{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

class Marcher {
 public:
  Marcher(const GridSpec& g, std::span<const double> v, double iso) : g_(g), v_(v), iso_(iso) {}

  double value(int i, int j) const {
    return v_[g_.flat(g_.wrapIndex(0, i), g_.wrapIndex(1, j))];
  }
  bool below(int i, int j) const { return value(i, j) < iso_; }

  // Corner (dx, dy) offsets of the CCW edge e of a cell, as start/end pair.
  static std::array<std::array<int, 2>, 2> edgeCorners(int e) {
    switch (e) {
      case 0: return {{{0, 0}, {1, 0}}};
      case 1: return {{{1, 0}, {1, 1}}};
      case 2: return {{{1, 1}, {0, 1}}};
      default: return {{{0, 1}, {0, 0}}};
    }
  }

  // Global id of the undirected lattice edge e of cell (i, j).
  long long edgeId(int i, int j, int e) const {
    int vi = i, vj = j, vertical = 0;
    switch (e) {
      case 0: break;
      case 1: vi = i + 1; vertical = 1; break;
      case 2: vj = j + 1; break;
      default: vertical = 1; break;
    }
    vi = g_.wrapIndex(0, vi);
    vj = g_.wrapIndex(1, vj);
    return 2LL * (static_cast<long long>(vj) * g_.n[0] + vi) + vertical;
  }

  // Interpolated crossing on edge e of the unwrapped cell (i, j). Computed
  // from the edge's lower vertex so both adjacent cells agree bit for bit.
  Momentum crossing(int i, int j, int e) const {
    auto c = edgeCorners(e);
    if (e >= 2) std::swap(c[0], c[1]);
    const int ai = i + c[0][0], aj = j + c[0][1];
    const int bi = i + c[1][0], bj = j + c[1][1];
    const double va = value(ai, aj), vb = value(bi, bj);
    const double t = (iso_ - va) / (vb - va);
    const double x = g_.lo[0] + g_.spacing(0) * (ai + t * (bi - ai));
    const double y = g_.lo[1] + g_.spacing(1) * (aj + t * (bj - aj));
    return {x, y};
  }

  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    for (int j = 0; j < g_.cells(1); ++j) {
      for (int i = 0; i < g_.cells(0); ++i) {
        std::array<int, 4> enter{}, exitE{};
        int ne = 0, nx = 0;
        for (int e = 0; e < 4; ++e) {
          const auto c = edgeCorners(e);
          const bool a = below(i + c[0][0], j + c[0][1]);
          const bool b = below(i + c[1][0], j + c[1][1]);
          if (a && !b) enter[static_cast<std::size_t>(ne++)] = e;
          if (!a && b) exitE[static_cast<std::size_t>(nx++)] = e;
        }
        if (ne == 1) {
          out.push_back({i, j, enter[0], exitE[0]});
        } else if (ne == 2) {
          const double centre = 0.25 * (value(i, j) + value(i + 1, j) + value(i + 1, j + 1) + value(i, j + 1));
          const int turn = centre < iso_ ? 1 : 3;
          for (int s = 0; s < 2; ++s) {
            const int e = enter[static_cast<std::size_t>(s)];
            out.push_back({i, j, e, (e + turn) % 4});
          }
        }
      }
    }
    return out;
  }

 private:
  const GridSpec& g_;
  std::span<const double> v_;
  double iso_;
};

}  // namespace

std::vector<PolyCurve> contour2d(const GridSpec& g, std::span<const double> values, double iso) {
  if (g.dim != 2) throw Error(Errc::DimensionMismatch, "contour2d needs a 2D lattice");
  g.validate();
  if (values.size() != g.size()) throw Error(Errc::DimensionMismatch, "lattice size does not match the grid");

  const Marcher mc(g, values, iso);
  const std::vector<Segment> segs = mc.segments();

  std::unordered_map<long long, std::size_t> byEnter;
  std::unordered_map<long long, bool> isExit;
  byEnter.reserve(segs.size() * 2);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    byEnter.emplace(mc.edgeId(segs[s].ci, segs[s].cj, segs[s].enter), s);
    isExit.emplace(mc.edgeId(segs[s].ci, segs[s].cj, segs[s].exit), true);
  }

  std::vector<char> used(segs.size(), 0);
  std::vector<PolyCurve> curves;

  auto walk = [&](std::size_t start) {
    PolyCurve c;
    int ui = segs[start].ci, uj = segs[start].cj;
    c.points.push_back(mc.crossing(ui, uj, segs[start].enter));
    std::size_t cur = start;
    for (;;) {
      used[cur] = 1;
      const Segment& s = segs[cur];
      c.points.push_back(mc.crossing(ui, uj, s.exit));
      const auto it = byEnter.find(mc.edgeId(ui, uj, s.exit));
      if (it == byEnter.end()) break;  // left an open boundary
      ui += kNeighbour[static_cast<std::size_t>(s.exit)][0];
      uj += kNeighbour[static_cast<std::size_t>(s.exit)][1];
      if (it->second == start) {
        c.closed = true;
        c.winding[0] = (ui - segs[start].ci) / g.cells(0);
        c.winding[1] = (uj - segs[start].cj) / g.cells(1);
        // Re-anchor the closing point exactly on the first one.
        c.points.back() = c.points.front();
        c.points.back()[0] += kTwoPi * c.winding[0];
        c.points.back()[1] += kTwoPi * c.winding[1];
        break;
      }
      if (used[it->second]) break;
      cur = it->second;
    }
    curves.push_back(std::move(c));
  };

  // Open chains first (start where no neighbour feeds the entry edge), then loops.
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s] && !isExit.contains(mc.edgeId(segs[s].ci, segs[s].cj, segs[s].enter))) walk(s);
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) walk(s);
  return curves;
}

}  // namespace nhm
