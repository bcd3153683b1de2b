#include <algorithm>

#include <Eigen/LU>

#include "nhmetal/el_extract.hpp"

namespace nhm {

namespace {

struct ScaledLattice {
  std::vector<double> re, im, scale;
};

ScaledLattice sampleScaled(const Section& s, const GridSpec& g) {
  ScaledLattice l;
  const std::size_t n = g.size();
  l.re.resize(n);
  l.im.resize(n);
  l.scale.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const EpResidual r = epResidual(s, g.point(u));
    l.re[u] = r.f[0];
    l.im[u] = r.f[1];
    l.scale[u] = r.scale;
  }
  return l;
}

Eigen::Vector2d reGradient(const Section& s, const Momentum& k) {
  return epJacobian(s, k).row(0).transpose();
}

// Newton iteration for grad Re E^2 = 0 with a finite-difference Hessian.
std::optional<Momentum> criticalPoint(const Section& s, Momentum k, double maxTravel) {
  const Momentum k0 = k;
  constexpr double h = 1e-5;
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector2d gk = reGradient(s, k);
    Eigen::Matrix2d hess;
    for (int c = 0; c < 2; ++c) {
      Momentum kp = k, km = k;
      kp[c] += h;
      km[c] -= h;
      hess.col(c) = (reGradient(s, kp) - reGradient(s, km)) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::FullPivLU<Eigen::Matrix2d> lu(hess);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Vector2d step = -lu.solve(gk);
    k[0] += step[0];
    k[1] += step[1];
    if (torusDistance(k, k0) > maxTravel) return std::nullopt;
    if (step.norm() < 1e-14) break;
  }
  return k;
}

void addPoint(std::vector<Momentum>& pts, const Momentum& k, double mergeTol) {
  const Momentum c = k.canonical();
  for (const auto& p : pts)
    if (torusDistance(p, c) <= mergeTol) return;
  pts.push_back(c);
}

// Sorts into a deterministic order independent of discovery order.
void sortPoints(std::vector<Momentum>& pts) {
  std::sort(pts.begin(), pts.end(), [](const Momentum& a, const Momentum& b) { return a.c < b.c; });
}

}  // namespace

ELSet findEp2dGeneric(const Section& s, const GridSpec& g, const Ep2dOptions& opt) {
  if (s.dimension() != 2 || g.dim != 2) throw Error(Errc::DimensionMismatch, "findEp2dGeneric works in 2D");
  g.validate();
  const ScaledLattice lat = sampleScaled(s, g);

  double imMax = 0.0;
  for (std::size_t i = 0; i < lat.im.size(); ++i) imMax = std::max(imMax, std::abs(lat.im[i]) / lat.scale[i]);
  const bool symmetric = imMax <= opt.symmetricTol;

  const double cellSize = std::min(g.spacing(0), g.spacing(1));
  ELSet out;
  std::vector<Momentum> roots;  // isolated candidates before classification

  if (symmetric) {
    for (PolyCurve& c : contour2d(g, lat.re, 0.0)) {
      PolyCurve r;
      r.closed = c.closed;
      r.winding = c.winding;
      const std::size_t n = c.closed ? c.points.size() - 1 : c.points.size();
      for (std::size_t i = 0; i < n; ++i) {
        try {
          const RefineResult rr = refineNewton(s, c.points[i], opt.refine);
          r.points.push_back(rr.k);
          r.residualMax = std::max(r.residualMax, rr.residual);
        } catch (const Error&) {
          // Dropped: the post-check guarantees only verified roots survive.
        }
      }
      if (r.points.empty()) continue;
      Vec3 lo = r.points[0].vec(), hi = lo;
      for (const auto& p : r.points) {
        lo = lo.cwiseMin(p.vec());
        hi = hi.cwiseMax(p.vec());
      }
      if (c.closed && (hi - lo).maxCoeff() < 0.5 * cellSize) {
        // A loop that shrinks onto one point under refinement is an isolated zero.
        Momentum centre = Momentum::fromVec(0.5 * (lo + hi), 2);
        roots.push_back(criticalPoint(s, centre, 2.0 * cellSize).value_or(centre));
        continue;
      }
      if (r.closed) {
        Momentum last = r.points.front();
        last[0] += kTwoPi * r.winding[0];
        last[1] += kTwoPi * r.winding[1];
        r.points.push_back(last);
      }
      out.curves.push_back(std::move(r));
    }

    // Touching zeros: local minima of |Re E^2| with no sign change around them.
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const double v = lat.re[g.flat(i, j)];
        bool candidate = true;
        double lo = v, hi = v;
        for (int dj = -1; dj <= 1 && candidate; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di, jj = j + dj;
            if (!g.periodic[0] && (ii < 0 || ii >= g.n[0])) continue;
            if (!g.periodic[1] && (jj < 0 || jj >= g.n[1])) continue;
            const double w = lat.re[g.flat(g.wrapIndex(0, ii), g.wrapIndex(1, jj))];
            if ((w < 0.0) != (v < 0.0) || std::abs(w) < std::abs(v)) {
              candidate = false;
              break;
            }
            lo = std::min(lo, w);
            hi = std::max(hi, w);
          }
        }
        if (!candidate || std::abs(v) > 4.0 * (hi - lo)) continue;
        if (auto k = criticalPoint(s, g.point(i, j), 3.0 * cellSize)) roots.push_back(*k);
      }
    }
  } else {
    for (int j = 0; j < g.cells(1); ++j) {
      for (int i = 0; i < g.cells(0); ++i) {
        bool reNeg = false, rePos = false, imNeg = false, imPos = false;
        for (int c = 0; c < 4; ++c) {
          const std::size_t idx = g.flat(g.wrapIndex(0, i + (c & 1)), g.wrapIndex(1, j + (c >> 1)));
          (lat.re[idx] < 0.0 ? reNeg : rePos) = true;
          (lat.im[idx] < 0.0 ? imNeg : imPos) = true;
        }
        if (!(reNeg && rePos && imNeg && imPos)) continue;
        const Momentum centre(g.coord(0, i) + 0.5 * g.spacing(0), g.coord(1, j) + 0.5 * g.spacing(1));
        try {
          roots.push_back(refineNewton(s, centre, opt.refine).k);
        } catch (const Error&) {
        }
      }
    }
  }

  // Classify and post-check every point root.
  std::vector<Momentum> isolated, degenerate;
  for (const Momentum& k : roots) {
    const EpResidual r = epResidual(s, k);
    if (r.scaledNorm() > opt.refine.tol) continue;
    if (r.d.normSquared() <= opt.refine.tol) {
      addPoint(degenerate, k, opt.mergeTol);
    } else if (isExceptional(r.d, opt.refine.tol)) {
      bool onCurve = false;
      for (const auto& c : out.curves) onCurve = onCurve || distanceToCurve(k, c) <= opt.mergeTol;
      if (!onCurve) addPoint(isolated, k, opt.mergeTol);
    }
  }
  sortPoints(isolated);
  sortPoints(degenerate);
  out.isolatedPoints = std::move(isolated);
  out.degeneracyPoints = std::move(degenerate);
  return out;
}

}  // namespace nhm
