#include "nhmetal/measurement.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace nhm {

const char* to_string(ShiftMode m) noexcept { return m == ShiftMode::Global ? "global" : "per-k"; }
const char* to_string(Band b) noexcept { return b == Band::Plus ? "+" : "-"; }
const char* to_string(Arm a) noexcept { return a == Arm::TPrime ? "T_PRIME" : "R_PRIME"; }

ShiftMode shiftModeFromString(const std::string& s) {
  if (s == "global") return ShiftMode::Global;
  if (s == "per-k") return ShiftMode::PerK;
  throw Error(Errc::InvalidConfig, fmt::format("unknown shift mode '{}' (expected global or per-k)", s));
}

ScaledMatrix expMinusI(const Mat2c& h) {
  const PauliDecomposition pd = decomposePauli(h);
  const cplx e2 = pd.d[0] * pd.d[0] + pd.d[1] * pd.d[1] + pd.d[2] * pd.d[2];
  const cplx e = principalSqrt(e2);
  const double g = std::abs(e.imag());
  const cplx I(0.0, 1.0);
  const cplx up = std::exp(I * e - g), down = std::exp(-I * e - g);
  const cplx c = 0.5 * (up + down);
  cplx sinc;
  if (std::abs(e) < 1e-3) {
    sinc = (1.0 - e2 / 6.0 + e2 * e2 / 120.0 - e2 * e2 * e2 / 5040.0) * std::exp(-g);
  } else {
    sinc = (up - down) / (2.0 * I * e);
  }
  ScaledMatrix out;
  Mat2c dsig = pd.d[0] * pauli(1) + pd.d[1] * pauli(2) + pd.d[2] * pauli(3);
  out.m = c * Mat2c::Identity() - I * sinc * dsig;
  out.m *= std::exp(-I * pd.a0.real());
  out.logScale = g + pd.a0.imag();
  return out;
}

namespace {

double largestSingular(const Mat2c& m) {
  const double f2 = m.squaredNorm();
  const double det = std::abs(m.determinant());
  const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
  return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

}  // namespace

double logLambda(const Mat2c& h) {
  const ScaledMatrix u = expMinusI(h);
  return 2.0 * (u.logScale + std::log(largestSingular(u.m)));
}

ShiftedHamiltonian shiftBy(const Mat2c& h, double logLam, ShiftMode mode) {
  ShiftedHamiltonian sh;
  sh.h = h;
  sh.logLambda = logLam;
  sh.mode = mode;
  sh.d0 = cplx(0.0, -0.5 * logLam);
  sh.hPrime = h + sh.d0 * Mat2c::Identity();
  return sh;
}

ShiftedHamiltonian passivityShift(const ModelSpec& spec, const Momentum& k) {
  const Mat2c h = hamiltonian(evalBloch(spec, k));
  return shiftBy(h, logLambda(h), ShiftMode::PerK);
}

ShiftedHamiltonian passivityShift(const ModelSpec& spec, const Momentum& k, double globalLogLam) {
  return shiftBy(hamiltonian(evalBloch(spec, k)), globalLogLam, ShiftMode::Global);
}

namespace {

void checkCovering(const ModelSpec& spec, const GridSpec& g) {
  g.validate();
  if (g.dim != spec.dimension()) throw Error(Errc::DimensionMismatch, "covering grid dimension differs from model");
}

}  // namespace

double globalLogLambda(const ModelSpec& spec, const GridSpec& g, std::span<const Momentum> extra) {
  checkCovering(spec, g);
  const auto n = static_cast<long long>(g.size());
  double best = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(max : best) schedule(static)
  for (long long i = 0; i < n; ++i)
    best = std::max(best, logLambda(hamiltonian(evalBloch(spec, g.point(static_cast<std::size_t>(i))))));
  for (const auto& k : extra) best = std::max(best, logLambda(hamiltonian(evalBloch(spec, k))));
  return best;
}

double serial::globalLogLambda(const ModelSpec& spec, const GridSpec& g, std::span<const Momentum> extra) {
  checkCovering(spec, g);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) best = std::max(best, logLambda(hamiltonian(evalBloch(spec, g.point(i)))));
  for (const auto& k : extra) best = std::max(best, logLambda(hamiltonian(evalBloch(spec, k))));
  return best;
}

Mat2c GateDecomposition::lossMatrix(double l) {
  Mat2c L = Mat2c::Zero();
  L(0, 1) = l;
  L(1, 0) = 1.0;
  return L;
}

namespace {

GateDecomposition fromSvd(const Mat2c& m, double logScale) {
  Eigen::JacobiSVD<Mat2c> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double logS1 = logScale + std::log(s(0));
  if (logS1 > std::log1p(kPassivityTol))
    throw Error(Errc::NotPassive, fmt::format("largest singular value {:.12g} exceeds 1", std::exp(logS1)));
  if (!(s(0) > 0.0)) throw Error(Errc::Overflow, "evolution operator vanishes");
  Mat2c swap = Mat2c::Zero();
  swap(0, 1) = swap(1, 0) = 1.0;
  GateDecomposition d;
  d.r1 = svd.matrixV().adjoint();
  d.r2 = svd.matrixU() * swap;
  d.l = s(1) / s(0);
  d.globalAttenuation = std::exp(logS1);
  return d;
}

}  // namespace

GateDecomposition decompose(const Mat2c& uPrime) { return fromSvd(uPrime, 0.0); }
GateDecomposition decompose(const ScaledMatrix& uPrime) { return fromSvd(uPrime.m, uPrime.logScale); }

Vec2c prepareEigenstate(const ShiftedHamiltonian& sh, Band band, double conditionCap) {
  const ComplexSpectrum sp = spectrum(sh.hPrime, conditionCap);
  if (sp.defective || sp.eigenvectorConditionNumber > conditionCap)
    throw Error(Errc::NearEp, fmt::format("eigenvector condition number {:.3g}", sp.eigenvectorConditionNumber));
  return band == Band::Plus ? sp.psiPlus : sp.psiMinus;
}

Arm preferredArm(const Vec2c& psi) { return std::abs(psi(0)) >= std::abs(psi(1)) ? Arm::TPrime : Arm::RPrime; }

BasisWeights idealProbabilities(const Vec2c& psi, cplx ePrime, Arm arm) {
  const cplx I(0.0, 1.0);
  const cplx z = std::exp(-I * ePrime);
  BasisWeights w;
  w.arm = arm;
  if (arm == Arm::TPrime) {
    w.p = {0.5, 0.5 * std::norm(z), 0.25 * std::norm(1.0 + z), 0.25 * std::norm(1.0 + I * z)};
    w.armWeight = std::norm(psi(0));
  } else {
    w.p = {0.5 * std::norm(z), 0.5, 0.25 * std::norm(z + 1.0), 0.25 * std::norm(z + I)};
    w.armWeight = std::norm(psi(1));
  }
  return w;
}

std::array<double, 4> expectedCounts(const BasisWeights& w, double expectedTotal) {
  std::array<double, 4> n{};
  for (std::size_t i = 0; i < 4; ++i) n[i] = expectedTotal * w.armWeight * w.p[i];
  return n;
}

CountRecord sampleCounts(const BasisWeights& w, double expectedTotal, std::mt19937_64& rng) {
  if (!(expectedTotal > 0.0)) throw Error(Errc::InvalidConfig, "expected total must be positive");
  const auto mean = expectedCounts(w, expectedTotal);
  long long n[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (mean[i] > 0.0) {
      std::poisson_distribution<long long> pd(mean[i]);
      n[i] = pd(rng);
    } else {
      n[i] = 0;
    }
  }
  CountRecord c;
  c.nH = n[0];
  c.nV = n[1];
  c.nPlus = n[2];
  c.nR = n[3];
  c.arm = w.arm;
  c.expectedTotal = expectedTotal;
  return c;
}

Inversion invertRates(const std::array<double, 4>& n, Arm arm, double significance) {
  const double H = n[0], V = n[1], P = n[2], R = n[3];
  if (H == 0.0 && V == 0.0 && P == 0.0 && R == 0.0) throw Error(Errc::DegenerateCounts, "all counts are zero");
  const double D = arm == Arm::TPrime ? H : V;
  if (D == 0.0) throw Error(Errc::ZeroDenominator, arm == Arm::TPrime ? "N_H is zero" : "N_V is zero");

  double x, y;
  // Partial derivatives of (x, y) with respect to (H, V, P, R).
  std::array<double, 4> dx{}, dy{};
  if (arm == Arm::TPrime) {
    x = (2.0 * P - H - V) / (2.0 * H);
    y = (H + V - 2.0 * R) / (2.0 * H);
    dx = {(V - 2.0 * P) / (2.0 * H * H), -1.0 / (2.0 * H), 1.0 / H, 0.0};
    dy = {(2.0 * R - V) / (2.0 * H * H), 1.0 / (2.0 * H), 0.0, -1.0 / H};
  } else {
    x = (2.0 * P - H - V) / (2.0 * V);
    y = (2.0 * R - H - V) / (2.0 * V);
    dx = {-1.0 / (2.0 * V), (H - 2.0 * P) / (2.0 * V * V), 1.0 / V, 0.0};
    dy = {-1.0 / (2.0 * V), (H - 2.0 * R) / (2.0 * V * V), 0.0, 1.0 / V};
  }
  const double r2 = x * x + y * y;
  // Below this the rates cannot resolve z from zero in double precision.
  const double bound = (2.0 * std::abs(P) + std::abs(H) + std::abs(V) + 2.0 * std::abs(R)) / (2.0 * D);
  if (!(std::sqrt(r2) > 1e-8 * bound)) throw Error(Errc::DegenerateCounts, "interference signal indistinguishable from zero");

  if (significance > 0.0) {
    double varZ = 0.0;
    for (std::size_t i = 0; i < 4; ++i) varZ += (dx[i] * dx[i] + dy[i] * dy[i]) * n[i];
    if (std::sqrt(r2) < significance * std::sqrt(varZ))
      throw Error(Errc::DegenerateCounts, "interference signal within noise of zero");
  }

  Inversion out;
  double re = -std::atan2(y, x);
  if (re <= -kPi) re += kTwoPi;
  out.ePrime = cplx(re, 0.5 * std::log(r2));
  double varRe = 0.0, varIm = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double gRe = (y * dx[i] - x * dy[i]) / r2;
    const double gIm = (x * dx[i] + y * dy[i]) / r2;
    varRe += gRe * gRe * n[i];
    varIm += gIm * gIm * n[i];
  }
  out.stderrRe = std::sqrt(varRe);
  out.stderrIm = std::sqrt(varIm);
  return out;
}

Inversion invertCounts(const CountRecord& c, double significance) {
  return invertRates({static_cast<double>(c.nH), static_cast<double>(c.nV), static_cast<double>(c.nPlus),
                      static_cast<double>(c.nR)},
                     c.arm, significance);
}

std::string flagsToString(unsigned flags) {
  static const std::pair<unsigned, const char*> names[] = {
      {kFlagNearEp, "NEAR_EP"},           {kFlagZeroDenominator, "ZERO_DENOMINATOR"},
      {kFlagDegenerateCounts, "DEGENERATE_COUNTS"}, {kFlagNotPassive, "NOT_PASSIVE"},
      {kFlagNumerical, "NUMERICAL"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

std::size_t MeasurementBatch::failures() const {
  return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.ok(); }));
}

std::size_t MeasurementBatch::count(unsigned flag) const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [flag](const auto& r) { return (r.flags & flag) != 0; }));
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

unsigned flagFor(Errc code) {
  switch (code) {
    case Errc::NearEp: return kFlagNearEp;
    case Errc::ZeroDenominator: return kFlagZeroDenominator;
    case Errc::DegenerateCounts: return kFlagDegenerateCounts;
    case Errc::NotPassive: return kFlagNotPassive;
    default: return kFlagNumerical;
  }
}

// All bands and trials of one momentum; results go to out[0 .. 2*trials).
void measureAt(const ModelSpec& spec, const Momentum& k, std::size_t kIndex, const MeasureOptions& opt,
               double globalLogLam, MeasurementResult* out) {
  const int trials = opt.trials;
  unsigned common = kFlagNone;
  std::string message;
  ShiftedHamiltonian sh;
  ComplexSpectrum sp;
  try {
    sh = opt.shiftMode == ShiftMode::Global ? passivityShift(spec, k, globalLogLam) : passivityShift(spec, k);
    sp = spectrum(sh.hPrime, opt.conditionCap);
    if (sp.defective || sp.eigenvectorConditionNumber > opt.conditionCap) common |= kFlagNearEp;
    decompose(expMinusI(sh.hPrime));
  } catch (const Error& e) {
    common |= flagFor(e.code());
    message = e.what();
  }

  for (int b = 0; b < 2; ++b) {
    const Band band = b == 0 ? Band::Plus : Band::Minus;
    for (int t = 0; t < trials; ++t) {
      MeasurementResult& r = out[static_cast<std::size_t>(b * trials + t)];
      r.kIndex = kIndex;
      r.k = k;
      r.band = band;
      r.trial = t;
      r.d0 = sh.d0;
      r.flags = common;
      r.message = message;
      r.ePrime = cplx(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
      r.eRecovered = r.ePrime;
      if (common & kFailureFlags) continue;
      try {
        const Vec2c psi = band == Band::Plus ? sp.psiPlus : sp.psiMinus;
        const cplx e = band == Band::Plus ? sp.ePlus : sp.eMinus;
        const BasisWeights w = idealProbabilities(psi, e, preferredArm(psi));
        Inversion inv;
        if (opt.noiseless) {
          const auto mean = expectedCounts(w, opt.expectedTotal);
          r.counts = {std::llround(mean[0]), std::llround(mean[1]), std::llround(mean[2]), std::llround(mean[3]),
                      w.arm, opt.expectedTotal};
          inv = invertRates(mean, w.arm);
        } else {
          std::mt19937_64 rng(itemSeed(opt.seed, kIndex, band, t));
          r.counts = sampleCounts(w, opt.expectedTotal, rng);
          inv = invertCounts(r.counts);
        }
        r.ePrime = inv.ePrime;
        r.eRecovered = inv.ePrime - sh.d0;
        r.stderrEstimate = inv.stderrRe;
        r.stderrImag = inv.stderrIm;
      } catch (const Error& e) {
        r.flags |= flagFor(e.code());
        r.message = e.what();
      }
    }
  }
}

void validateOptions(const ModelSpec& spec, std::span<const Momentum> momenta, const MeasureOptions& opt) {
  spec.validate();
  if (opt.trials < 1) throw Error(Errc::InvalidConfig, "trials must be at least 1");
  if (!(opt.expectedTotal > 0.0)) throw Error(Errc::InvalidConfig, "expected total must be positive");
  for (const auto& k : momenta)
    if (k.dim != spec.dimension()) throw Error(Errc::DimensionMismatch, "momentum dimension differs from model");
}

double coveringLogLambda(const ModelSpec& spec, std::span<const Momentum> momenta, const MeasureOptions& opt,
                         bool parallel) {
  const GridSpec g = GridSpec::brillouin(spec.dimension(), opt.globalGridPoints);
  return parallel ? globalLogLambda(spec, g, momenta) : serial::globalLogLambda(spec, g, momenta);
}

void finishUnwrap(MeasurementBatch& batch, std::size_t nk, int trials) {
  for (int b = 0; b < 2; ++b) {
    for (int t = 0; t < trials; ++t) {
      std::vector<std::size_t> idx;
      std::vector<cplx> e;
      for (std::size_t k = 0; k < nk; ++k) {
        const std::size_t i = (k * 2 + static_cast<std::size_t>(b)) * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t);
        if (!batch.results[i].ok()) continue;
        idx.push_back(i);
        e.push_back(batch.results[i].ePrime);
      }
      const auto n = unwrapBranches(e);
      for (std::size_t j = 0; j < idx.size(); ++j) {
        auto& r = batch.results[idx[j]];
        r.branchIndex = n[j];
        r.ePrime += kTwoPi * n[j];
        r.eRecovered = r.ePrime - r.d0;
      }
    }
  }
}

}  // namespace

std::uint64_t itemSeed(std::uint64_t master, std::size_t kIndex, Band band, int trial) {
  std::uint64_t s = splitmix(master);
  s = splitmix(s ^ static_cast<std::uint64_t>(kIndex));
  s = splitmix(s ^ (band == Band::Plus ? 0u : 1u));
  return splitmix(s ^ static_cast<std::uint64_t>(trial));
}

MeasurementBatch measureBandStructure(const ModelSpec& spec, std::span<const Momentum> momenta, const MeasureOptions& opt) {
  validateOptions(spec, momenta, opt);
  MeasurementBatch batch;
  if (opt.shiftMode == ShiftMode::Global) batch.globalLogLambda = coveringLogLambda(spec, momenta, opt, true);
  const auto per = static_cast<std::size_t>(2 * opt.trials);
  batch.results.resize(momenta.size() * per);
  const auto nk = static_cast<long long>(momenta.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < nk; ++i) {
    const auto k = static_cast<std::size_t>(i);
    measureAt(spec, momenta[k], k, opt, batch.globalLogLambda, batch.results.data() + k * per);
  }
  if (opt.unwrapPath) finishUnwrap(batch, momenta.size(), opt.trials);
  return batch;
}

MeasurementBatch serial::measureBandStructure(const ModelSpec& spec, std::span<const Momentum> momenta,
                                              const MeasureOptions& opt) {
  validateOptions(spec, momenta, opt);
  MeasurementBatch batch;
  if (opt.shiftMode == ShiftMode::Global) batch.globalLogLambda = coveringLogLambda(spec, momenta, opt, false);
  const auto per = static_cast<std::size_t>(2 * opt.trials);
  batch.results.resize(momenta.size() * per);
  for (std::size_t k = 0; k < momenta.size(); ++k)
    measureAt(spec, momenta[k], k, opt, batch.globalLogLambda, batch.results.data() + k * per);
  if (opt.unwrapPath) finishUnwrap(batch, momenta.size(), opt.trials);
  return batch;
}

std::vector<int> unwrapBranches(std::span<const cplx> ePrimes) {
  std::vector<int> n(ePrimes.size(), 0);
  for (std::size_t i = 1; i < ePrimes.size(); ++i) {
    const double prev = ePrimes[i - 1].real() + kTwoPi * n[i - 1];
    n[i] = static_cast<int>(std::lround((prev - ePrimes[i].real()) / kTwoPi));
  }
  return n;
}

}  // namespace nhm
