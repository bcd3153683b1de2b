#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nhmetal/bloch.hpp"

namespace nhm {

enum class Family { H1, H2, Knot, Constant };

const char* to_string(Family f) noexcept;
Family familyFromString(const std::string& s);

/// One entry of the Hamiltonian catalog plus an additive Pauli perturbation
/// sum_i c_i sigma_i with complex coefficients.
struct ModelSpec {
  Family family = Family::H1;
  double m = 0.4;               // H2 mass parameter
  int p = 3;                    // knot exponent of Z0
  int qExp = 2;                 // knot exponent of Z1
  double epsilon = -20.0;       // knot offset
  bool normalizedKnot = false;  // rescale (Z0, Z1) onto the unit 3-sphere before the powers
  int constantDim = 2;          // Constant family only
  std::array<cplx, 3> perturbation{};

  int dimension() const;
  void validate() const;  // throws Error(InvalidConfig)

  static ModelSpec h1();
  static ModelSpec h2(double m);
  static ModelSpec knot(int p, int q, double epsilon = -20.0);
  /// k-independent d given entirely by the perturbation.
  static ModelSpec constant(int dim, std::array<cplx, 3> d);

  ModelSpec& perturb(std::array<cplx, 3> c) {
    perturbation = c;
    return *this;
  }
};

/// Real perturbation (delta_x, delta_y, delta_z) used for the knot robustness run.
inline constexpr std::array<double, 3> kKnotPerturbationPreset{0.3179, 0.3590, 0.2211};

inline std::array<cplx, 3> realPerturbation(const std::array<double, 3>& d) {
  return {cplx(d[0]), cplx(d[1]), cplx(d[2])};
}

/// Column j holds the derivative with respect to k_j; only the first dim columns are used.
struct BlochJacobian {
  Mat3 dR = Mat3::Zero();
  Mat3 dI = Mat3::Zero();
  int dim = 2;
};

struct KnotIntermediates {
  cplx z0;
  cplx z1;
  double f1 = 0.0;
  double f2 = 0.0;
};

BlochVector evalBloch(const ModelSpec& spec, const Momentum& k);
BlochJacobian gradBloch(const ModelSpec& spec, const Momentum& k);
KnotIntermediates knotIntermediates(const ModelSpec& spec, const Momentum& k);

/// Closed-form scalar whose zero set is the exceptional locus of a
/// sigma_x-symmetric 2D model. Used as a test oracle.
struct EpLocus {
  std::function<double(const Momentum&)> g;
  std::string formula;
  /// H1 only: value of the bare d_x = 2 - cos kx - cos ky on the ring.
  std::optional<double> ringDx;
};
EpLocus analyticEpLocus(const ModelSpec& spec);

/// Affine plane k = origin + u e1 + v e2 through a 3D Brillouin zone.
struct Plane {
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();

  static Plane kzConstant(double kz) { return {Vec3(0, 0, kz), Vec3::UnitX(), Vec3::UnitY()}; }
  /// k_z = sign * k_x, parametrized by (k_x, k_y).
  static Plane kzAlongKx(double sign) { return {Vec3::Zero(), Vec3(1, 0, sign), Vec3::UnitY()}; }
};

/// A model restricted (optionally) to a plane; what the extraction
/// routines consume.
struct Section {
  ModelSpec model;
  std::optional<Plane> plane;

  Section(ModelSpec m) : model(std::move(m)) {}  // NOLINT(google-explicit-constructor)
  Section(ModelSpec m, Plane p) : model(std::move(m)), plane(p) {}

  int dimension() const { return plane ? 2 : model.dimension(); }
  Momentum lift(const Momentum& k) const;
  BlochVector eval(const Momentum& k) const { return evalBloch(model, lift(k)); }
  BlochJacobian grad(const Momentum& k) const;
};

/// Central finite-difference Jacobian of a section (fallback and test oracle).
BlochJacobian finiteDifferenceJacobian(const Section& s, const Momentum& k, double step = 1e-6);

}  // namespace nhm
