#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nhmetal/grid.hpp"

namespace nhm {

enum class ShiftMode { Global, PerK };
enum class Band { Plus, Minus };
enum class Arm { TPrime, RPrime };

const char* to_string(ShiftMode m) noexcept;
const char* to_string(Band b) noexcept;
const char* to_string(Arm a) noexcept;
ShiftMode shiftModeFromString(const std::string& s);

/// exp(-i h) = exp(logScale) * m with |m| = O(1); safe for large anti-Hermitian parts.
struct ScaledMatrix {
  Mat2c m = Mat2c::Identity();
  double logScale = 0.0;

  Mat2c value() const { return std::exp(logScale) * m; }
};
ScaledMatrix expMinusI(const Mat2c& h);

/// log of the largest eigenvalue of exp(-iH) exp(-iH)^dagger.
double logLambda(const Mat2c& h);

struct ShiftedHamiltonian {
  Mat2c h = Mat2c::Zero();
  Mat2c hPrime = Mat2c::Zero();
  cplx d0 = 0.0;
  double logLambda = 0.0;
  ShiftMode mode = ShiftMode::PerK;

  double lambdaCap() const { return std::exp(logLambda); }
};

/// H' = H + d0 with d0 = i ln sqrt(1/Lambda), Lambda given in log form.
ShiftedHamiltonian shiftBy(const Mat2c& h, double logLambda, ShiftMode mode);

/// Per-k shift: Lambda from this k alone.
ShiftedHamiltonian passivityShift(const ModelSpec& spec, const Momentum& k);
/// Global shift with a precomputed log Lambda.
ShiftedHamiltonian passivityShift(const ModelSpec& spec, const Momentum& k, double globalLogLambda);

/// max_k log Lambda(k) over a covering grid and any extra momenta.
double globalLogLambda(const ModelSpec& spec, const GridSpec& g, std::span<const Momentum> extra = {});
namespace serial {
double globalLogLambda(const ModelSpec& spec, const GridSpec& g, std::span<const Momentum> extra = {});
}  // namespace serial

struct GateDecomposition {
  Mat2c r1 = Mat2c::Identity();
  Mat2c r2 = Mat2c::Identity();
  double l = 1.0;
  double globalAttenuation = 1.0;

  /// |V><H| + l |H><V| in the (H, V) basis.
  static Mat2c lossMatrix(double l);
  Mat2c reconstruct() const { return globalAttenuation * r2 * lossMatrix(l) * r1; }
};

inline constexpr double kPassivityTol = 1e-9;

/// U' = r2 L(l) r1 * attenuation from the singular-value factorization.
GateDecomposition decompose(const Mat2c& uPrime);
/// Same, with the passivity check done in the log domain.
GateDecomposition decompose(const ScaledMatrix& uPrime);

/// Unit right eigenvector of H' for the band; throws NearEp past the condition cap.
Vec2c prepareEigenstate(const ShiftedHamiltonian& sh, Band band, double conditionCap = kDefaultConditionCap);

/// Projection weights onto (H, V, +, R) for one interferometer arm, before
/// scaling by armWeight (|alpha|^2 for T', |beta|^2 for R').
struct BasisWeights {
  std::array<double, 4> p{};
  double armWeight = 0.0;
  Arm arm = Arm::TPrime;
};
BasisWeights idealProbabilities(const Vec2c& psi, cplx ePrime, Arm arm);
/// The arm carrying the larger share of the state.
Arm preferredArm(const Vec2c& psi);

struct CountRecord {
  long long nH = 0, nV = 0, nPlus = 0, nR = 0;
  Arm arm = Arm::TPrime;
  double expectedTotal = 0.0;
};

/// Mean counts per basis: expectedTotal * armWeight * p.
std::array<double, 4> expectedCounts(const BasisWeights& w, double expectedTotal);

CountRecord sampleCounts(const BasisWeights& w, double expectedTotal, std::mt19937_64& rng);

struct Inversion {
  cplx ePrime;
  double stderrRe = 0.0;
  double stderrIm = 0.0;
};

/// Count-to-energy inversion on real-valued rates (principal branch, Re in (-pi, pi]).
/// Standard errors use Poisson variances equal to the rates. With
/// significance > 0, x + iy within that many standard errors of zero is
/// rejected as DEGENERATE_COUNTS.
Inversion invertRates(const std::array<double, 4>& n, Arm arm, double significance = 0.0);
inline constexpr double kDefaultSignificance = 3.0;
Inversion invertCounts(const CountRecord& c, double significance = kDefaultSignificance);

enum MeasureFlag : unsigned {
  kFlagNone = 0,
  kFlagNearEp = 1u << 0,
  kFlagZeroDenominator = 1u << 1,
  kFlagDegenerateCounts = 1u << 2,
  kFlagNotPassive = 1u << 3,
  kFlagNumerical = 1u << 4,
};
std::string flagsToString(unsigned flags);
inline constexpr unsigned kFailureFlags = kFlagZeroDenominator | kFlagDegenerateCounts | kFlagNotPassive | kFlagNumerical;

struct MeasurementResult {
  std::size_t kIndex = 0;
  Momentum k;
  Band band = Band::Plus;
  int trial = 0;
  cplx ePrime;
  int branchIndex = 0;
  cplx eRecovered;
  cplx d0;
  double stderrEstimate = 0.0;  // of Re E
  double stderrImag = 0.0;      // of Im E
  CountRecord counts;
  unsigned flags = kFlagNone;
  std::string message;

  bool ok() const { return (flags & kFailureFlags) == 0; }
};

struct MeasureOptions {
  double expectedTotal = 1e4;
  ShiftMode shiftMode = ShiftMode::PerK;
  bool noiseless = false;
  std::uint64_t seed = 1;
  int trials = 1;
  /// Unwrap Re E' along the momentum list (per band and trial).
  bool unwrapPath = false;
  double conditionCap = kDefaultConditionCap;
  /// Points per axis of the grid covering the BZ for the global Lambda.
  int globalGridPoints = 41;
};

struct MeasurementBatch {
  std::vector<MeasurementResult> results;  // ordered by (k, band, trial)
  double globalLogLambda = 0.0;            // GLOBAL mode only

  std::size_t failures() const;
  std::size_t count(unsigned flag) const;
};

/// Seed for one (k, band, trial) item derived from the master seed.
std::uint64_t itemSeed(std::uint64_t master, std::size_t kIndex, Band band, int trial);

MeasurementBatch measureBandStructure(const ModelSpec& spec, std::span<const Momentum> momenta, const MeasureOptions& opt);
namespace serial {
MeasurementBatch measureBandStructure(const ModelSpec& spec, std::span<const Momentum> momenta, const MeasureOptions& opt);
}  // namespace serial

/// Adjusts Re(ePrime) by 2 pi n for continuity along the list; returns branch indices.
std::vector<int> unwrapBranches(std::span<const cplx> ePrimes);

}  // namespace nhm
