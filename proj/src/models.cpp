#include "nhmetal/models.hpp"

#include <fmt/format.h>

namespace nhm {

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::H1: return "H1";
    case Family::H2: return "H2";
    case Family::Knot: return "Knot";
    case Family::Constant: return "Constant";
  }
  return "?";
}

Family familyFromString(const std::string& s) {
  if (s == "H1" || s == "h1") return Family::H1;
  if (s == "H2" || s == "h2") return Family::H2;
  if (s == "Knot" || s == "knot") return Family::Knot;
  if (s == "Constant" || s == "constant") return Family::Constant;
  throw Error(Errc::InvalidConfig, "unknown model family '" + s + "'");
}

int ModelSpec::dimension() const {
  switch (family) {
    case Family::H1:
    case Family::H2: return 2;
    case Family::Knot: return 3;
    case Family::Constant: return constantDim;
  }
  return 2;
}

void ModelSpec::validate() const {
  if (family == Family::Knot) {
    if (p < 1 || qExp < 1) throw Error(Errc::InvalidConfig, "knot exponents must be >= 1");
    if (epsilon == 0.0) throw Error(Errc::InvalidConfig, "knot epsilon must be nonzero");
  }
  if (family == Family::Constant && constantDim != 2 && constantDim != 3)
    throw Error(Errc::InvalidConfig, "constant model dimension must be 2 or 3");
  for (const cplx& c : perturbation)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(Errc::InvalidConfig, "perturbation must be finite");
  if (!std::isfinite(m) || !std::isfinite(epsilon)) throw Error(Errc::InvalidConfig, "parameters must be finite");
}

ModelSpec ModelSpec::h1() { return ModelSpec{}; }

ModelSpec ModelSpec::h2(double m) {
  ModelSpec s;
  s.family = Family::H2;
  s.m = m;
  return s;
}

ModelSpec ModelSpec::knot(int p, int q, double epsilon) {
  ModelSpec s;
  s.family = Family::Knot;
  s.p = p;
  s.qExp = q;
  s.epsilon = epsilon;
  s.validate();
  return s;
}

ModelSpec ModelSpec::constant(int dim, std::array<cplx, 3> d) {
  ModelSpec s;
  s.family = Family::Constant;
  s.constantDim = dim;
  s.perturbation = d;
  s.validate();
  return s;
}

namespace {

void checkDim(const ModelSpec& spec, const Momentum& k) {
  if (k.dim != spec.dimension())
    throw Error(Errc::DimensionMismatch,
                fmt::format("{} model needs a {}D momentum, got {}D", to_string(spec.family),
                            spec.dimension(), k.dim));
}

cplx ipow(cplx z, int n) {
  cplx r(1.0, 0.0);
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

void foldPerturbation(const ModelSpec& spec, BlochVector& d) {
  for (int i = 0; i < 3; ++i) {
    d.dR[i] += spec.perturbation[static_cast<std::size_t>(i)].real();
    d.dI[i] += spec.perturbation[static_cast<std::size_t>(i)].imag();
  }
}

// Z0, Z1 and their k-derivatives (columns x, y, z).
struct KnotZ {
  cplx z0, z1;
  std::array<cplx, 3> dz0{}, dz1{};
};

KnotZ knotZ(const ModelSpec& spec, const Momentum& k) {
  const double sx = std::sin(k[0]), sy = std::sin(k[1]), sz = std::sin(k[2]);
  const double cx = std::cos(k[0]), cy = std::cos(k[1]), cz = std::cos(k[2]);
  const cplx i(0.0, 1.0);
  KnotZ z;
  z.z0 = cplx(sx, sy);
  z.z1 = cplx(2.0 * (cx + cy + cz) - 5.0, sz);
  z.dz0 = {cplx(cx), i * cy, cplx(0.0)};
  z.dz1 = {cplx(-2.0 * sx), cplx(-2.0 * sy), cplx(-2.0 * sz, cz)};
  if (spec.normalizedKnot) {
    const double r = std::sqrt(std::norm(z.z0) + std::norm(z.z1));
    KnotZ n;
    n.z0 = z.z0 / r;
    n.z1 = z.z1 / r;
    for (std::size_t j = 0; j < 3; ++j) {
      const double dr = (std::real(std::conj(z.z0) * z.dz0[j]) + std::real(std::conj(z.z1) * z.dz1[j])) / r;
      n.dz0[j] = z.dz0[j] / r - z.z0 * dr / (r * r);
      n.dz1[j] = z.dz1[j] / r - z.z1 * dr / (r * r);
    }
    return n;
  }
  return z;
}

}  // namespace

KnotIntermediates knotIntermediates(const ModelSpec& spec, const Momentum& k) {
  if (spec.family != Family::Knot) throw Error(Errc::WrongFamily, "knot intermediates need the Knot family");
  checkDim(spec, k);
  const KnotZ z = knotZ(spec, k);
  const cplx f = ipow(z.z0, spec.p) + ipow(z.z1, spec.qExp);
  return {z.z0, z.z1, f.real(), f.imag()};
}

BlochVector evalBloch(const ModelSpec& spec, const Momentum& k) {
  checkDim(spec, k);
  BlochVector d;
  switch (spec.family) {
    case Family::H1:
      d.dR[0] = 2.0 - std::cos(k[0]) - std::cos(k[1]);
      d.dI[2] = 0.25;
      break;
    case Family::H2:
      d.dR[0] = spec.m + 1.0 - std::cos(k[0]) - std::cos(k[1]);
      d.dI[1] = std::sin(k[0]);
      d.dI[2] = std::sin(k[1]);
      break;
    case Family::Knot: {
      const KnotIntermediates f = knotIntermediates(spec, k);
      d.dR = Vec3(f.f1 - spec.epsilon, spec.epsilon, 0.0);
      d.dI = Vec3(0.0, f.f2, std::sqrt(2.0) * spec.epsilon);
      break;
    }
    case Family::Constant: break;
  }
  foldPerturbation(spec, d);
  return d;
}

BlochJacobian gradBloch(const ModelSpec& spec, const Momentum& k) {
  checkDim(spec, k);
  BlochJacobian j;
  j.dim = spec.dimension();
  switch (spec.family) {
    case Family::H1:
      j.dR(0, 0) = std::sin(k[0]);
      j.dR(0, 1) = std::sin(k[1]);
      break;
    case Family::H2:
      j.dR(0, 0) = std::sin(k[0]);
      j.dR(0, 1) = std::sin(k[1]);
      j.dI(1, 0) = std::cos(k[0]);
      j.dI(2, 1) = std::cos(k[1]);
      break;
    case Family::Knot: {
      const KnotZ z = knotZ(spec, k);
      const cplx a = static_cast<double>(spec.p) * ipow(z.z0, spec.p - 1);
      const cplx b = static_cast<double>(spec.qExp) * ipow(z.z1, spec.qExp - 1);
      for (int c = 0; c < 3; ++c) {
        const auto u = static_cast<std::size_t>(c);
        const cplx df = a * z.dz0[u] + b * z.dz1[u];
        j.dR(0, c) = df.real();
        j.dI(1, c) = df.imag();
      }
      break;
    }
    case Family::Constant: break;
  }
  return j;
}

EpLocus analyticEpLocus(const ModelSpec& spec) {
  if (spec.family != Family::H1 && spec.family != Family::H2)
    throw Error(Errc::Unsupported, "closed-form locus exists only for H1 and H2");
  const auto& c = spec.perturbation;
  // sigma_x symmetry keeps real sigma_x and imaginary sigma_y / sigma_z terms.
  if (c[0].imag() != 0.0 || c[1].real() != 0.0 || c[2].real() != 0.0)
    throw Error(Errc::Unsupported, "perturbation breaks the q = sigma_x symmetry");
  const double ax = c[0].real(), by = c[1].imag(), bz = c[2].imag();
  EpLocus loc;
  if (spec.family == Family::H1) {
    const double di2 = by * by + (0.25 + bz) * (0.25 + bz);
    loc.g = [=](const Momentum& k) {
      const double dx = 2.0 - std::cos(k[0]) - std::cos(k[1]) + ax;
      return dx * dx - di2;
    };
    loc.formula = fmt::format("(2 - cos kx - cos ky + {:.17g})^2 - {:.17g}", ax, di2);
    loc.ringDx = std::sqrt(di2) - ax;
  } else {
    const double m = spec.m;
    loc.g = [=](const Momentum& k) {
      const double dx = m + 1.0 - std::cos(k[0]) - std::cos(k[1]) + ax;
      const double sy = std::sin(k[0]) + by, sz = std::sin(k[1]) + bz;
      return dx * dx - sy * sy - sz * sz;
    };
    loc.formula = fmt::format("({:.17g} + 1 - cos kx - cos ky + {:.17g})^2 - (sin kx + {:.17g})^2 - (sin ky + {:.17g})^2",
                              m, ax, by, bz);
  }
  return loc;
}

Momentum Section::lift(const Momentum& k) const {
  if (!plane) return k;
  if (k.dim != 2) throw Error(Errc::DimensionMismatch, "plane sections take 2D momenta");
  const Vec3 v = plane->origin + k[0] * plane->e1 + k[1] * plane->e2;
  return Momentum(v[0], v[1], v[2]);
}

BlochJacobian Section::grad(const Momentum& k) const {
  BlochJacobian g = gradBloch(model, lift(k));
  if (!plane) return g;
  BlochJacobian r;
  r.dim = 2;
  Eigen::Matrix<double, 3, 2> basis;
  basis << plane->e1, plane->e2;
  r.dR.leftCols<2>() = g.dR * basis;
  r.dI.leftCols<2>() = g.dI * basis;
  return r;
}

BlochJacobian finiteDifferenceJacobian(const Section& s, const Momentum& k, double step) {
  BlochJacobian j;
  j.dim = s.dimension();
  for (int c = 0; c < j.dim; ++c) {
    Momentum kp = k, km = k;
    kp[c] += step;
    km[c] -= step;
    const BlochVector dp = s.eval(kp), dm = s.eval(km);
    j.dR.col(c) = (dp.dR - dm.dR) / (2.0 * step);
    j.dI.col(c) = (dp.dI - dm.dI) / (2.0 * step);
  }
  return j;
}

}  // namespace nhm
