#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "nhmetal/el_extract.hpp"

namespace nhm {

Vec3 elTangent(const Section& s, const Momentum& k, JacobianSource src) {
  const Eigen::MatrixXd j = epJacobian(s, k, src);
  if (j.cols() != 3) throw Error(Errc::DimensionMismatch, "tangent needs a 3D section");
  const Vec3 gr = j.row(0).transpose();
  const Vec3 gi = j.row(1).transpose();
  const Vec3 t = gr.cross(gi);
  const double n = t.norm();
  if (!(n > 1e-12 * gr.norm() * gi.norm()) || n == 0.0)
    throw Error(Errc::TangentDegenerate, fmt::format("|grad Re x grad Im| = {:.3e}", n));
  return t / n;
}

namespace {

Vec3 minimumImage(const Vec3& d) { return {wrapAngle(d[0]), wrapAngle(d[1]), wrapAngle(d[2])}; }

}  // namespace

PolyCurve traceEl3d(const Section& s, const Momentum& seed, const TraceOptions& opt) {
  if (s.dimension() != 3) throw Error(Errc::DimensionMismatch, "traceEl3d works in 3D");
  Momentum start = seed;
  if (epResidual(s, start).scaledNorm() > opt.corrector.tol) start = refineNewton(s, start, opt.corrector).k;

  PolyCurve curve;
  curve.points.push_back(start);
  const Vec3 t0 = elTangent(s, start);
  Vec3 t = t0;
  Momentum k = start;
  double h = 0.5 * opt.hMax;
  double arc = 0.0;
  const double turn = opt.turnTargetDeg * kPi / 180.0;
  const double cosAccept = std::cos(2.0 * turn);
  const double cosRelax = std::cos(0.5 * turn);

  for (;;) {
    if (curve.points.size() > opt.maxPoints)
      throw Error(Errc::BudgetExceeded, fmt::format("no closure after {} points", opt.maxPoints));

    const Vec3 toStart = minimumImage(start.vec() - k.vec());
    const double dist = toStart.norm();
    if (arc > 4.0 * opt.hMax) {
      const bool heading = dist > 0.0 && t.dot(toStart) > 0.8 * dist && t.dot(t0) > 0.5;
      if (heading && dist <= 1.5 * h) {
        Momentum last = start;
        for (int i = 0; i < 3; ++i) {
          curve.winding[static_cast<std::size_t>(i)] =
              static_cast<int>(std::lround((k[i] + toStart[i] - start[i]) / kTwoPi));
          last[i] += kTwoPi * curve.winding[static_cast<std::size_t>(i)];
        }
        if (torusDistance(last, start) > opt.closureTol)
          throw Error(Errc::NoConvergence, "closure point off the start");
        curve.points.push_back(last);
        curve.closed = true;
        break;
      }
      if (heading && dist < 2.0 * h) h = std::max(opt.hMin, dist);
    }

    Momentum kc;
    Vec3 tc;
    bool ok = false;
    try {
      Momentum kp = k;
      for (int i = 0; i < 3; ++i) kp[i] += h * t[i];
      kc = refineNewton(s, kp, opt.corrector).k;
      tc = elTangent(s, kc);
      const double step = (kc.vec() - k.vec()).norm();
      ok = tc.dot(t) >= cosAccept && step <= 2.0 * h && step >= 0.2 * h;
      if (!ok && h <= opt.hMin) ok = tc.dot(t) > 0.0 && step <= 2.0 * h;
    } catch (const Error& e) {
      if (e.code() == Errc::TangentDegenerate && h <= opt.hMin) throw;
    }
    if (!ok) {
      if (h <= opt.hMin) throw Error(Errc::NoConvergence, "continuation stalled at the minimum step");
      h = std::max(opt.hMin, 0.5 * h);
      continue;
    }
    arc += (kc.vec() - k.vec()).norm();
    if (tc.dot(t) > cosRelax) h = std::min(opt.hMax, 1.5 * h);
    curve.points.push_back(kc);
    k = kc;
    t = tc;
  }

  for (const auto& p : curve.points) curve.residualMax = std::max(curve.residualMax, epResidual(s, p).scaledNorm());
  return curve;
}

namespace {

inline bool cellHasDoubleSignChange(const GridSpec& g, const std::vector<double>& re,
                                    const std::vector<double>& im, int i, int j, int l) {
  bool reNeg = false, rePos = false, imNeg = false, imPos = false;
  for (int c = 0; c < 8; ++c) {
    const std::size_t idx = g.flat(g.wrapIndex(0, i + (c & 1)), g.wrapIndex(1, j + ((c >> 1) & 1)),
                                   g.wrapIndex(2, l + (c >> 2)));
    (re[idx] < 0.0 ? reNeg : rePos) = true;
    (im[idx] < 0.0 ? imNeg : imPos) = true;
  }
  return reNeg && rePos && imNeg && imPos;
}

void checkLattice(const GridSpec& g, const std::vector<double>& re, const std::vector<double>& im) {
  if (g.dim != 3) throw Error(Errc::DimensionMismatch, "cell scan needs a 3D grid");
  if (re.size() != g.size() || im.size() != g.size()) throw Error(Errc::DimensionMismatch, "lattice size mismatch");
}

Momentum cellCentre(const GridSpec& g, int i, int j, int l) {
  return {g.coord(0, i) + 0.5 * g.spacing(0), g.coord(1, j) + 0.5 * g.spacing(1),
          g.coord(2, l) + 0.5 * g.spacing(2)};
}

}  // namespace

std::vector<std::uint8_t> doubleSignChangeCells(const GridSpec& g, const std::vector<double>& re,
                                                const std::vector<double>& im) {
  checkLattice(g, re, im);
  const int cx = g.cells(0), cy = g.cells(1), cz = g.cells(2);
  std::vector<std::uint8_t> flags(g.cellCount(), 0);
#pragma omp parallel for collapse(2) schedule(static)
  for (int l = 0; l < cz; ++l)
    for (int j = 0; j < cy; ++j)
      for (int i = 0; i < cx; ++i)
        flags[static_cast<std::size_t>(i + cx * (j + cy * l))] = cellHasDoubleSignChange(g, re, im, i, j, l);
  return flags;
}

namespace serial {
std::vector<std::uint8_t> doubleSignChangeCells(const GridSpec& g, const std::vector<double>& re,
                                                const std::vector<double>& im) {
  checkLattice(g, re, im);
  const int cx = g.cells(0), cy = g.cells(1), cz = g.cells(2);
  std::vector<std::uint8_t> flags(g.cellCount(), 0);
  for (int l = 0; l < cz; ++l)
    for (int j = 0; j < cy; ++j)
      for (int i = 0; i < cx; ++i)
        flags[static_cast<std::size_t>(i + cx * (j + cy * l))] = cellHasDoubleSignChange(g, re, im, i, j, l);
  return flags;
}
}  // namespace serial

namespace {

struct CellScan {
  std::vector<std::uint8_t> flags;
  std::vector<std::vector<std::size_t>> clusters;
};

CellScan scanCells(const Section& s, const GridSpec& g) {
  if (s.dimension() != 3) throw Error(Errc::DimensionMismatch, "seed search works in 3D");
  const FieldGrid f = scanFields(s, g);
  CellScan out;
  out.flags = doubleSignChangeCells(g, f.reE2, f.imE2);

  const int cx = g.cells(0), cy = g.cells(1), cz = g.cells(2);
  std::vector<char> seen(out.flags.size(), 0);
  for (std::size_t start = 0; start < out.flags.size(); ++start) {
    if (!out.flags[start] || seen[start]) continue;
    std::vector<std::size_t> cluster;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      cluster.push_back(c);
      const int i = static_cast<int>(c % static_cast<std::size_t>(cx));
      const int j = static_cast<int>((c / static_cast<std::size_t>(cx)) % static_cast<std::size_t>(cy));
      const int l = static_cast<int>(c / static_cast<std::size_t>(cx * cy));
      for (int dl = -1; dl <= 1; ++dl)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int ii = i + di, jj = j + dj, ll = l + dl;
            if (g.periodic[0]) ii = (ii + cx) % cx; else if (ii < 0 || ii >= cx) continue;
            if (g.periodic[1]) jj = (jj + cy) % cy; else if (jj < 0 || jj >= cy) continue;
            if (g.periodic[2]) ll = (ll + cz) % cz; else if (ll < 0 || ll >= cz) continue;
            const auto n = static_cast<std::size_t>(ii + cx * (jj + cy * ll));
            if (out.flags[n] && !seen[n]) {
              seen[n] = 1;
              queue.push_back(n);
            }
          }
    }
    std::sort(cluster.begin(), cluster.end());
    out.clusters.push_back(std::move(cluster));
  }
  return out;
}

Momentum cellCentreFlat(const GridSpec& g, std::size_t c) {
  const auto cx = static_cast<std::size_t>(g.cells(0)), cy = static_cast<std::size_t>(g.cells(1));
  return cellCentre(g, static_cast<int>(c % cx), static_cast<int>((c / cx) % cy), static_cast<int>(c / (cx * cy)));
}

}  // namespace

std::vector<Momentum> seedSearch3d(const Section& s, const GridSpec& g, const RefineOptions& opt, double mergeTol) {
  const CellScan scan = scanCells(s, g);
  std::vector<Momentum> seeds;
  for (const auto& cluster : scan.clusters) {
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(cluster.size());
    for (std::size_t c : cluster) ranked.emplace_back(epResidual(s, cellCentreFlat(g, c)).scaledNorm(), c);
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t a = 0; a < std::min<std::size_t>(8, ranked.size()); ++a) {
      try {
        const Momentum k = refineNewton(s, cellCentreFlat(g, ranked[a].second), opt).k.canonical();
        bool dup = false;
        for (const auto& q : seeds) dup = dup || torusDistance(q, k) <= mergeTol;
        if (!dup) seeds.push_back(k);
        break;
      } catch (const Error&) {
      }
    }
  }
  return seeds;
}

ELSet extractEl3d(const Section& s, const GridSpec& g, const TraceOptions& opt) {
  ELSet out;
  auto covered = [&](const Momentum& k, double radius) {
    for (const auto& c : out.curves)
      if (distanceToCurve(k, c) <= radius) return true;
    return false;
  };
  auto traceFrom = [&](const Momentum& seed) {
    if (covered(seed, 2.0 * opt.hMax)) return;
    out.curves.push_back(traceEl3d(s, seed, opt));
  };

  for (const Momentum& seed : seedSearch3d(s, g, opt.corrector)) traceFrom(seed);

  // Coverage pass: every flagged cell should sit next to a traced curve.
  const CellScan scan = scanCells(s, g);
  const double diag = std::sqrt(g.spacing(0) * g.spacing(0) + g.spacing(1) * g.spacing(1) + g.spacing(2) * g.spacing(2));
  for (std::size_t c = 0; c < scan.flags.size(); ++c) {
    if (!scan.flags[c]) continue;
    const Momentum centre = cellCentreFlat(g, c);
    if (covered(centre, 1.5 * diag)) continue;
    try {
      traceFrom(refineNewton(s, centre, opt.corrector).k.canonical());
    } catch (const Error& e) {
      if (e.code() != Errc::NoConvergence) throw;
    }
  }
  return out;
}

}  // namespace nhm
