#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nhm {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Errc {
  DimensionMismatch,
  WrongFamily,
  Unsupported,
  NoConvergence,
  TangentDegenerate,
  BudgetExceeded,
  NoGenericProjection,
  TooManyCrossings,
  MethodDisagreement,
  NotPassive,
  NearEp,
  ZeroDenominator,
  DegenerateCounts,
  Overflow,
  InvalidConfig,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Maps an angle into [-pi, pi).
inline double wrapAngle(double x) {
  double y = std::fmod(x + kPi, kTwoPi);
  if (y < 0) y += kTwoPi;
  y -= kPi;
  // fmod can round up to exactly +pi for inputs a hair below an odd multiple
  if (y >= kPi) y -= kTwoPi;
  return y;
}

/// A lattice momentum in 2 or 3 dimensions. Coordinates are stored as given
/// (possibly unwrapped); canonical() folds them into the Brillouin zone.
struct Momentum {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int dim = 2;

  Momentum() = default;
  Momentum(double kx, double ky) : c{kx, ky, 0.0}, dim(2) {}
  Momentum(double kx, double ky, double kz) : c{kx, ky, kz}, dim(3) {}

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  Momentum canonical() const {
    Momentum out = *this;
    for (int i = 0; i < dim; ++i) out[i] = wrapAngle(out[i]);
    return out;
  }

  Vec3 vec() const { return {c[0], c[1], c[2]}; }
  static Momentum fromVec(const Vec3& v, int dim) {
    Momentum m;
    m.dim = dim;
    for (int i = 0; i < 3; ++i) m.c[static_cast<std::size_t>(i)] = i < dim ? v[i] : 0.0;
    return m;
  }
};

/// Euclidean distance on the torus (per-axis minimum image).
inline double torusDistance(const Momentum& a, const Momentum& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) {
    const double d = wrapAngle(a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace nhm
