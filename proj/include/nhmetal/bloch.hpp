#pragma once

#include "nhmetal/common.hpp"

namespace nhm {

/// Complex Bloch vector d = dR + i dI of a traceless two-band Hamiltonian d.sigma.
struct BlochVector {
  Vec3 dR = Vec3::Zero();
  Vec3 dI = Vec3::Zero();

  double normSquared() const { return dR.squaredNorm() + dI.squaredNorm(); }
};

const Mat2c& pauli(int axis);  // 0 -> identity, 1..3 -> sigma_x, sigma_y, sigma_z

/// d.sigma + shift * identity.
Mat2c hamiltonian(const BlochVector& d, cplx shift = 0.0);

/// Pauli decomposition of an arbitrary 2x2 matrix: h = a0 * 1 + d.sigma, with complex d.
struct PauliDecomposition {
  cplx a0;
  std::array<cplx, 3> d;
};
PauliDecomposition decomposePauli(const Mat2c& h);

/// The discriminant d.d = |dR|^2 - |dI|^2 + 2i dR.dI, which equals E_+^2.
cplx discriminant(const BlochVector& d);

/// Principal square root with Re >= 0, and Im >= 0 on the cut Re == 0.
cplx principalSqrt(cplx z);

struct ComplexSpectrum {
  cplx ePlus;
  cplx eMinus;
  cplx eSquared;
  Vec2c psiPlus;
  Vec2c psiMinus;
  double eigenvectorConditionNumber = 1.0;
  bool defective = false;
};

inline constexpr double kDefaultConditionCap = 1e8;

/// Closed-form eigen-decomposition of a 2x2 matrix. eSquared is the
/// discriminant of the traceless part; ePlus takes the principal root.
/// Eigenvectors are unit norm with the first non-negligible component real
/// and positive. The condition number is 1/|det[psiPlus psiMinus]|.
ComplexSpectrum spectrum(const Mat2c& h, double conditionCap = kDefaultConditionCap);

/// EP predicate with tolerance scaled by max(1, |dR|^2 + |dI|^2). Vanishing d
/// is excluded.
bool isExceptional(const BlochVector& d, double tol);

struct SymmetryOp {
  Mat2c q = Mat2c::Identity();

  static SymmetryOp sigmaX() { return {pauli(1)}; }
  double unitarityResidual() const;
};

/// Frobenius norm of h - q h^dagger q^{-1}.
double symmetryDefect(const Mat2c& h, const SymmetryOp& q);

}  // namespace nhm
