#include "nhmetal/newton.hpp"

#include <Eigen/SVD>

#include <fmt/format.h>

#include "nhmetal/curves.hpp"

namespace nhm {

EpResidual epResidual(const Section& s, const Momentum& k) {
  EpResidual r;
  r.d = s.eval(k);
  const cplx e2 = discriminant(r.d);
  r.f = Eigen::Vector2d(e2.real(), e2.imag());
  r.scale = std::max(1.0, r.d.normSquared());
  return r;
}

Eigen::MatrixXd epJacobian(const Section& s, const Momentum& k, JacobianSource src, double fdStep) {
  const BlochVector d = s.eval(k);
  const BlochJacobian j = src == JacobianSource::Analytic ? s.grad(k) : finiteDifferenceJacobian(s, k, fdStep);
  Eigen::MatrixXd out(2, j.dim);
  for (int c = 0; c < j.dim; ++c) {
    // d(d.d) = 2 (dR + i dI).(ddR + i ddI)
    out(0, c) = 2.0 * (d.dR.dot(j.dR.col(c)) - d.dI.dot(j.dI.col(c)));
    out(1, c) = 2.0 * (d.dR.dot(j.dI.col(c)) + d.dI.dot(j.dR.col(c)));
  }
  return out;
}

RefineResult refineNewton(const Section& s, const Momentum& k0, const RefineOptions& opt) {
  const int dim = s.dimension();
  if (k0.dim != dim) throw Error(Errc::DimensionMismatch, "seed dimension differs from the model");

  RefineResult out;
  out.k = k0;
  EpResidual r = epResidual(s, out.k);
  out.residual = r.scaledNorm();
  if (out.residual <= opt.tol) return out;

  for (int it = 1; it <= opt.maxIter; ++it) {
    const Eigen::MatrixXd jac = epJacobian(s, out.k, opt.jacobian, opt.fdStep);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues().maxCoeff();
    if (!(smax > 0.0)) break;
    svd.setThreshold(1e-9);
    const Eigen::VectorXd step = -svd.solve(r.f);

    // Backtrack on the scaled 2-norm of F.
    const double f0 = r.f.norm() / r.scale;
    bool improved = false;
    double alpha = 1.0;
    for (int half = 0; half < 40; ++half, alpha *= 0.5) {
      Momentum trial = out.k;
      for (int c = 0; c < dim; ++c) trial[c] += alpha * step[c];
      EpResidual rt = epResidual(s, trial);
      if (rt.f.norm() / rt.scale < f0) {
        out.k = trial;
        r = rt;
        improved = true;
        break;
      }
    }
    out.iterations = it;
    out.residual = r.scaledNorm();
    if (out.residual <= opt.tol) return out;
    if (!improved) break;
  }
  throw Error(Errc::NoConvergence,
              fmt::format("residual {:.3e} above tolerance {:.1e} after {} iterations", out.residual, opt.tol,
                          out.iterations));
}

double PolyCurve::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i].vec() - points[i - 1].vec()).norm();
  return len;
}

namespace {

double pointSegmentTorus(const Momentum& k, const Momentum& a, const Momentum& b) {
  // Shift the query to the periodic image nearest to a, then do plain geometry.
  Vec3 p = a.vec();
  Vec3 q = k.vec();
  for (int i = 0; i < k.dim; ++i) q[i] = p[i] + wrapAngle(q[i] - p[i]);
  const Vec3 ab = b.vec() - p;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0.0 ? std::clamp((q - p).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (p + t * ab - q).norm();
}

}  // namespace

double distanceToCurve(const Momentum& k, const PolyCurve& c) {
  double best = std::numeric_limits<double>::infinity();
  if (c.points.size() == 1) return torusDistance(k, c.points[0]);
  for (std::size_t i = 1; i < c.points.size(); ++i)
    best = std::min(best, pointSegmentTorus(k, c.points[i - 1], c.points[i]));
  return best;
}

double hausdorffDistance(const PolyCurve& a, const PolyCurve& b) {
  double h = 0.0;
  for (const auto& p : a.points) h = std::max(h, distanceToCurve(p, b));
  for (const auto& p : b.points) h = std::max(h, distanceToCurve(p, a));
  return h;
}

}  // namespace nhm
