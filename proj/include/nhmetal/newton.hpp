#pragma once

#include <Eigen/Core>

#include "nhmetal/models.hpp"

namespace nhm {

enum class JacobianSource { Analytic, FiniteDifference };

/// F(k) = (Re d.d, Im d.d) together with the scale max(1, |d|^2) used by
/// every relative tolerance in the extraction code.
struct EpResidual {
  Eigen::Vector2d f;
  double scale = 1.0;
  BlochVector d;

  double scaledNorm() const { return f.cwiseAbs().maxCoeff() / scale; }
};

EpResidual epResidual(const Section& s, const Momentum& k);

/// 2 x dim Jacobian of F.
Eigen::MatrixXd epJacobian(const Section& s, const Momentum& k, JacobianSource src = JacobianSource::Analytic,
                           double fdStep = 1e-6);

struct RefineOptions {
  double tol = 1e-10;  // on max|F_i| / max(1, |d|^2)
  int maxIter = 50;
  JacobianSource jacobian = JacobianSource::Analytic;
  double fdStep = 1e-6;
};

struct RefineResult {
  Momentum k;
  int iterations = 0;
  double residual = 0.0;  // scaled
};

/// Damped Gauss-Newton on F with a pseudo-inverse step, so the same routine
/// projects onto the zero set in 2D (rank 1 for symmetric models) and in 3D.
/// Throws Error(NoConvergence); never returns a point with residual > tol.
RefineResult refineNewton(const Section& s, const Momentum& k0, const RefineOptions& opt = {});

}  // namespace nhm
