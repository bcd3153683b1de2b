#include "nhmetal/bloch.hpp"

namespace nhm {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "DIMENSION_MISMATCH";
    case Errc::WrongFamily: return "WRONG_FAMILY";
    case Errc::Unsupported: return "UNSUPPORTED";
    case Errc::NoConvergence: return "NO_CONVERGENCE";
    case Errc::TangentDegenerate: return "TANGENT_DEGENERATE";
    case Errc::BudgetExceeded: return "BUDGET_EXCEEDED";
    case Errc::NoGenericProjection: return "NO_GENERIC_PROJECTION";
    case Errc::TooManyCrossings: return "TOO_MANY_CROSSINGS";
    case Errc::MethodDisagreement: return "METHOD_DISAGREEMENT";
    case Errc::NotPassive: return "NOT_PASSIVE";
    case Errc::NearEp: return "NEAR_EP";
    case Errc::ZeroDenominator: return "ZERO_DENOMINATOR";
    case Errc::DegenerateCounts: return "DEGENERATE_COUNTS";
    case Errc::Overflow: return "OVERFLOW";
    case Errc::InvalidConfig: return "INVALID_CONFIG";
  }
  return "UNKNOWN";
}

const Mat2c& pauli(int axis) {
  static const std::array<Mat2c, 4> mats = [] {
    const cplx i(0.0, 1.0);
    std::array<Mat2c, 4> m;
    m[0] << 1.0, 0.0, 0.0, 1.0;
    m[1] << 0.0, 1.0, 1.0, 0.0;
    m[2] << 0.0, -i, i, 0.0;
    m[3] << 1.0, 0.0, 0.0, -1.0;
    return m;
  }();
  return mats.at(static_cast<std::size_t>(axis));
}

Mat2c hamiltonian(const BlochVector& d, cplx shift) {
  const cplx dx(d.dR[0], d.dI[0]);
  const cplx dy(d.dR[1], d.dI[1]);
  const cplx dz(d.dR[2], d.dI[2]);
  const cplx i(0.0, 1.0);
  Mat2c h;
  h << shift + dz, dx - i * dy, dx + i * dy, shift - dz;
  return h;
}

PauliDecomposition decomposePauli(const Mat2c& h) {
  const cplx i(0.0, 1.0);
  PauliDecomposition p;
  p.a0 = 0.5 * (h(0, 0) + h(1, 1));
  p.d[0] = 0.5 * (h(0, 1) + h(1, 0));
  p.d[1] = (h(1, 0) - h(0, 1)) / (2.0 * i);
  p.d[2] = 0.5 * (h(0, 0) - h(1, 1));
  return p;
}

cplx discriminant(const BlochVector& d) {
  return {d.dR.squaredNorm() - d.dI.squaredNorm(), 2.0 * d.dR.dot(d.dI)};
}

cplx principalSqrt(cplx z) {
  cplx r = std::sqrt(z);
  // std::sqrt already returns Re >= 0; fix the sign on the branch cut itself.
  if (r.real() == 0.0 && r.imag() < 0.0) r = -r;
  return r;
}

namespace {

// Phase convention: first component with magnitude above 1e-14 made real positive.
Vec2c fixPhase(Vec2c v) {
  const int k = std::abs(v[0]) > 1e-14 * v.norm() ? 0 : 1;
  const double a = std::abs(v[k]);
  if (a > 0.0) {
    v *= std::conj(v[k]) / a;
    v[k] = cplx(a, 0.0);
  }
  return v;
}

// Right eigenvector of (a0 + d.sigma) for eigenvalue a0 + s*E.
Vec2c eigvec(const std::array<cplx, 3>& d, cplx sE) {
  const cplx i(0.0, 1.0);
  Vec2c u(d[0] - i * d[1], sE - d[2]);
  Vec2c w(sE + d[2], d[0] + i * d[1]);
  const double nu = u.norm();
  const double nw = w.norm();
  if (nu == 0.0 && nw == 0.0) return {};
  Vec2c v = nu >= nw ? u : w;
  return v / v.norm();
}

}  // namespace

ComplexSpectrum spectrum(const Mat2c& h, double conditionCap) {
  const PauliDecomposition p = decomposePauli(h);
  ComplexSpectrum s;
  s.eSquared = p.d[0] * p.d[0] + p.d[1] * p.d[1] + p.d[2] * p.d[2];
  const cplx e = principalSqrt(s.eSquared);
  s.ePlus = p.a0 + e;
  s.eMinus = p.a0 - e;

  Vec2c vp = eigvec(p.d, e);
  Vec2c vm = eigvec(p.d, -e);
  if (vp.norm() == 0.0 || vm.norm() == 0.0) {
    // h is a multiple of the identity: every vector is an eigenvector.
    vp = Vec2c(1.0, 0.0);
    vm = Vec2c(0.0, 1.0);
  }
  s.psiPlus = fixPhase(vp);
  s.psiMinus = fixPhase(vm);

  const double det = std::abs(s.psiPlus[0] * s.psiMinus[1] - s.psiPlus[1] * s.psiMinus[0]);
  s.eigenvectorConditionNumber = det > 0.0 ? 1.0 / det : std::numeric_limits<double>::infinity();
  s.defective = s.eigenvectorConditionNumber > conditionCap;
  return s;
}

bool isExceptional(const BlochVector& d, double tol) {
  const double n2 = d.normSquared();
  const double scale = std::max(1.0, n2);
  const cplx disc = discriminant(d);
  return std::abs(disc.real()) <= tol * scale && std::abs(disc.imag()) <= tol * scale &&
         n2 > tol * scale;
}

double SymmetryOp::unitarityResidual() const {
  return (q.adjoint() * q - Mat2c::Identity()).norm();
}

double symmetryDefect(const Mat2c& h, const SymmetryOp& q) {
  return (h - q.q * h.adjoint() * q.q.inverse()).norm();
}

}  // namespace nhm
