#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "nhmetal/measurement.hpp"

using namespace nhm;

namespace {

const cplx I(0.0, 1.0);

Mat2c denseExpMinusI(const Mat2c& h) {
  const Mat2c a = -I * h;
  return a.exp();
}

bool isUnitary(const Mat2c& u, double tol = 1e-12) { return (u.adjoint() * u - Mat2c::Identity()).norm() < tol; }

// Real part compared modulo 2 pi.
double branchDistance(cplx a, cplx b) {
  return std::hypot(wrapAngle(a.real() - b.real()), a.imag() - b.imag());
}

Momentum h1AtDx(double dx) {
  const double k = std::acos(1.0 - dx / 2.0);
  return {k, k};
}

}  // namespace

TEST_CASE("matrix exponential against dense oracle") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    BlochVector d;
    for (int i = 0; i < 3; ++i) {
      d.dR[i] = n(rng);
      d.dI[i] = n(rng) * (t % 2 ? 1.0 : 0.2);
    }
    const cplx shift(n(rng), n(rng));
    const Mat2c h = hamiltonian(d, shift);
    const Mat2c ref = denseExpMinusI(h);
    CHECK((expMinusI(h).value() - ref).norm() <= 1e-12 * ref.norm());
  }
  // Tiny |E| takes the series path.
  BlochVector d;
  d.dR = Vec3(1e-5, 0, 0);
  d.dI = Vec3(0, 2e-5, 0);
  const Mat2c h = hamiltonian(d);
  CHECK((expMinusI(h).value() - denseExpMinusI(h)).norm() < 1e-15);
  // At an EP the exponential is 1 - i H exactly.
  BlochVector ep;
  ep.dR = Vec3(0.25, 0, 0);
  ep.dI = Vec3(0, 0, 0.25);
  const Mat2c hep = hamiltonian(ep);
  CHECK((expMinusI(hep).value() - (Mat2c::Identity() - I * hep)).norm() < 1e-15);
}

TEST_CASE("log-domain exponential survives large anti-hermitian parts") {
  BlochVector d;
  d.dR = Vec3(0.3, 0.2, 0.0);
  d.dI = Vec3(0.0, 0.0, 800.0);
  const ScaledMatrix u = expMinusI(hamiltonian(d));
  CHECK(std::isfinite(u.logScale));
  CHECK(u.m.allFinite());
  // Dense oracle on the damped copy H - 800i, then undo the damping.
  const Mat2c damped = hamiltonian(d) - cplx(0, 800) * Mat2c::Identity();
  Eigen::JacobiSVD<Mat2c> svd(denseExpMinusI(damped));
  const double ref = 2 * std::log(svd.singularValues()(0)) + 1600;
  CHECK(logLambda(hamiltonian(d)) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("passivity shift examples") {
  BlochVector herm;
  herm.dR = Vec3(0.4, -0.3, 0.7);
  const ShiftedHamiltonian sh = shiftBy(hamiltonian(herm), logLambda(hamiltonian(herm)), ShiftMode::PerK);
  CHECK(std::abs(sh.d0) < 1e-14);
  CHECK(sh.lambdaCap() == doctest::Approx(1.0));

  const ShiftedHamiltonian h1 = passivityShift(ModelSpec::h1(), Momentum(0, 0));
  CHECK(h1.lambdaCap() == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(std::abs(h1.d0 - cplx(0, -0.25)) < 1e-15);
  CHECK((h1.hPrime - (h1.h + h1.d0 * Mat2c::Identity())).norm() == 0.0);

  // Shared eigenvectors, eigenvalues offset by d0.
  const ShiftedHamiltonian s2 = passivityShift(ModelSpec::h2(0.4), Momentum(0.3, -0.8));
  const ComplexSpectrum a = spectrum(s2.h), b = spectrum(s2.hPrime);
  CHECK(std::abs(b.ePlus - a.ePlus - s2.d0) < 1e-14);
  CHECK(std::abs(b.eMinus - a.eMinus - s2.d0) < 1e-14);
  CHECK((a.psiPlus - b.psiPlus).norm() < 1e-14);
}

TEST_CASE("shifted evolution is passive") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (const ModelSpec& m : {ModelSpec::h1(), ModelSpec::h2(0.4), ModelSpec::h2(1.42)}) {
    for (int t = 0; t < 50; ++t) {
      const Momentum k(u(rng), u(rng));
      const ShiftedHamiltonian sh = passivityShift(m, k);
      Eigen::JacobiSVD<Mat2c> svd(denseExpMinusI(sh.hPrime));
      CHECK(svd.singularValues()(0) <= 1 + 1e-9);
      CHECK(svd.singularValues()(0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("global shift covers every momentum") {
  const ModelSpec m = ModelSpec::h2(0.4);
  const GridSpec g = GridSpec::brillouin(2, 41);
  const std::vector<Momentum> extra{Momentum(0.123, 2.71)};
  const double glob = globalLogLambda(m, g, extra);
  CHECK(glob == serial::globalLogLambda(m, g, extra));
  for (std::size_t i = 0; i < g.size(); i += 13) {
    const ShiftedHamiltonian sh = passivityShift(m, g.point(i), glob);
    CHECK(logLambda(sh.hPrime) <= 1e-9);
  }
  CHECK(logLambda(passivityShift(m, extra[0], glob).hPrime) <= 1e-9);
}

TEST_CASE("gate decomposition examples") {
  SUBCASE("identity") {
    const GateDecomposition d = decompose(Mat2c(Mat2c::Identity()));
    CHECK(d.l == doctest::Approx(1.0));
    CHECK(d.globalAttenuation == doctest::Approx(1.0));
    CHECK((d.reconstruct() - Mat2c::Identity()).norm() < 1e-14);
  }
  SUBCASE("diagonal") {
    Mat2c u = Mat2c::Zero();
    u(0, 0) = 1.0;
    u(1, 1) = 0.5;
    const GateDecomposition d = decompose(u);
    CHECK(d.l == doctest::Approx(0.5));
    CHECK((d.reconstruct() - u).norm() < 1e-14);
  }
  SUBCASE("H1 at the origin") {
    const ShiftedHamiltonian sh = passivityShift(ModelSpec::h1(), Momentum(0, 0));
    const Mat2c u = denseExpMinusI(sh.hPrime);
    const GateDecomposition d = decompose(u);
    CHECK(d.l == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK((d.reconstruct() - u).norm() < 1e-12);
  }
  SUBCASE("random passive gates") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int t = 0; t < 100; ++t) {
      const ShiftedHamiltonian sh = passivityShift(ModelSpec::h2(0.4), Momentum(u(rng), u(rng)));
      const ScaledMatrix up = expMinusI(sh.hPrime);
      const GateDecomposition d = decompose(up);
      CHECK(isUnitary(d.r1));
      CHECK(isUnitary(d.r2));
      CHECK(d.l >= 0.0);
      CHECK(d.l <= 1.0);
      CHECK(d.globalAttenuation <= 1.0 + 1e-9);
      CHECK((d.reconstruct() - up.value()).norm() < 1e-10);
    }
  }
  SUBCASE("gain is rejected") {
    try {
      decompose(Mat2c(2.0 * Mat2c::Identity()));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotPassive);
    }
  }
}

TEST_CASE("eigenstate preparation") {
  ShiftedHamiltonian diag;
  diag.hPrime << 0.3, 0.0, 0.0, -0.2;
  CHECK((prepareEigenstate(diag, Band::Plus) - Vec2c(1, 0)).norm() < 1e-15);
  CHECK((prepareEigenstate(diag, Band::Minus) - Vec2c(0, 1)).norm() < 1e-15);

  const ShiftedHamiltonian sh = passivityShift(ModelSpec::h1(), h1AtDx(0.5));
  const Vec2c psi = prepareEigenstate(sh, Band::Plus);
  Eigen::ComplexEigenSolver<Mat2c> es(sh.hPrime);
  const ComplexSpectrum sp = spectrum(sh.hPrime);
  int match = 0;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(es.eigenvalues()[i] - sp.ePlus) > 1e-10) continue;
    const Vec2c v = es.eigenvectors().col(i).normalized();
    CHECK(std::abs(std::abs(v.dot(psi)) - 1.0) < 1e-12);
    ++match;
  }
  CHECK(match == 1);

  const ShiftedHamiltonian ep = passivityShift(ModelSpec::h1(), h1AtDx(0.25));
  try {
    prepareEigenstate(ep, Band::Plus);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NearEp);
  }
}

TEST_CASE("ideal probability examples") {
  const Vec2c up(1, 0);
  const BasisWeights w0 = idealProbabilities(up, 0.0, Arm::TPrime);
  CHECK(w0.armWeight == 1.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(w0.p[i] / w0.p[0] == doctest::Approx(std::array{1.0, 1.0, 2.0, 1.0}[i]));

  const BasisWeights w1 = idealProbabilities(up, cplx(0, -std::log(2.0)), Arm::TPrime);
  const std::array<double, 4> expect{1.0, 0.25, 9.0 / 8, 5.0 / 8};
  for (std::size_t i = 0; i < 4; ++i) CHECK(w1.p[i] / w1.p[0] == doctest::Approx(expect[i]).epsilon(1e-14));

  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 100; ++t) {
    const cplx e(u(rng), 0.3 * u(rng));
    const cplx z = std::exp(-I * e);
    const auto& p = idealProbabilities(up, e, Arm::TPrime).p;
    CHECK((2 * p[2] - p[0] - p[1]) / (2 * p[0]) == doctest::Approx(z.real()).epsilon(1e-12));
    CHECK((p[0] + p[1] - 2 * p[3]) / (2 * p[0]) == doctest::Approx(z.imag()).epsilon(1e-12));
  }
}

TEST_CASE("inversion examples") {
  CountRecord c{100, 100, 200, 100, Arm::TPrime, 500};
  CHECK(std::abs(invertCounts(c).ePrime) < 1e-15);
  CountRecord zero{0, 0, 0, 0, Arm::TPrime, 1};
  try {
    invertCounts(zero);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateCounts);
  }
  CountRecord noH{0, 10, 5, 5, Arm::TPrime, 1};
  try {
    invertCounts(noH);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroDenominator);
  }
  // z = 0 exactly: 2P = H + V and H + V = 2R.
  try {
    invertRates({1.0, 1.0, 1.0, 1.0}, Arm::TPrime);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateCounts);
  }
}

TEST_CASE("noiseless round trip over random energies and states") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const cplx e(kPi * u(rng), -1.5 + u(rng));
    const Vec2c psi = Vec2c(cplx(u(rng), u(rng)), cplx(u(rng), u(rng))).normalized();
    const Arm arm = preferredArm(psi);
    const BasisWeights w = idealProbabilities(psi, e, arm);
    if (w.armWeight == 0.0) continue;
    const Inversion inv = invertRates(expectedCounts(w, 1e4), arm);
    CHECK(branchDistance(inv.ePrime, e) < 1e-12);
    CHECK(inv.ePrime.real() > -kPi);
    CHECK(inv.ePrime.real() <= kPi);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("counts follow the law of large numbers") {
  const BasisWeights w = idealProbabilities(Vec2c(0.6, 0.8), cplx(0.7, -0.2), Arm::RPrime);
  std::mt19937_64 rng(59);
  const CountRecord c = sampleCounts(w, 1e6, rng);
  const auto mean = expectedCounts(w, 1e6);
  const std::array<long long, 4> n{c.nH, c.nV, c.nPlus, c.nR};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(n[i] - mean[i]) < 0.01 * mean[i]);
  CHECK(c.arm == Arm::RPrime);

  std::mt19937_64 a(5), b(5);
  const CountRecord ca = sampleCounts(w, 1e4, a), cb = sampleCounts(w, 1e4, b);
  CHECK(ca.nH == cb.nH);
  CHECK(ca.nV == cb.nV);
  CHECK(ca.nPlus == cb.nPlus);
  CHECK(ca.nR == cb.nR);

  // Tiny exposure eventually yields an all-zero record that inversion rejects.
  std::mt19937_64 r(61);
  bool sawZero = false;
  for (int t = 0; t < 100 && !sawZero; ++t) {
    const CountRecord z = sampleCounts(w, 1e-4, r);
    if (z.nH + z.nV + z.nPlus + z.nR == 0) {
      sawZero = true;
      CHECK_THROWS_AS(invertCounts(z), Error);
    }
  }
  CHECK(sawZero);
}

TEST_CASE("noiseless pipeline reproduces the spectrum") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const std::vector<ModelSpec> models{ModelSpec::h1(), ModelSpec::h2(0.4), ModelSpec::h2(1.42),
                                      ModelSpec::h1().perturb({0, cplx(0, kPi / 20), 0})};
  MeasureOptions opt;
  opt.noiseless = true;
  for (const ModelSpec& m : models) {
    std::vector<Momentum> ks;
    for (int t = 0; t < 25; ++t) ks.emplace_back(u(rng), u(rng));
    const MeasurementBatch b = measureBandStructure(m, ks, opt);
    REQUIRE(b.results.size() == 50);
    for (const auto& r : b.results) {
      const ComplexSpectrum sp = spectrum(hamiltonian(evalBloch(m, r.k)));
      if (r.flags & kFlagNearEp) continue;
      REQUIRE(r.ok());
      CHECK(branchDistance(r.eRecovered, r.band == Band::Plus ? sp.ePlus : sp.eMinus) < 1e-10);
      CHECK(r.eRecovered == r.ePrime - r.d0);
    }
  }
}

TEST_CASE("H1 gap on the diagonal is real above the ring and imaginary below") {
  std::vector<Momentum> ks;
  for (int i = 0; i <= 10; ++i) ks.push_back(h1AtDx(0.05 * i));
  MeasureOptions opt;
  opt.noiseless = true;
  const MeasurementBatch b = measureBandStructure(ModelSpec::h1(), ks, opt);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dx = 0.05 * static_cast<double>(i);
    const auto& plus = b.results[i * 2];
    const auto& minus = b.results[i * 2 + 1];
    if (std::abs(dx - 0.25) < 1e-9) {
      CHECK((plus.flags & kFlagNearEp) != 0);
      continue;
    }
    const cplx gap = plus.eRecovered - minus.eRecovered;
    if (dx > 0.25) {
      CHECK(gap.real() == doctest::Approx(2 * std::sqrt(dx * dx - 1.0 / 16)).epsilon(1e-9));
      CHECK(std::abs(gap.imag()) < 1e-9);
    } else {
      CHECK(std::abs(gap.real()) < 1e-9);
      CHECK(std::abs(gap.imag()) == doctest::Approx(2 * std::sqrt(1.0 / 16 - dx * dx)).epsilon(1e-9));
    }
  }
}

TEST_CASE("poisson statistics at d_x = 0.5") {
  MeasureOptions opt;
  opt.trials = 500;
  opt.seed = 2024;
  const std::vector<Momentum> ks{h1AtDx(0.5)};
  const MeasurementBatch b = measureBandStructure(ModelSpec::h1(), ks, opt);
  REQUIRE(b.failures() == 0);
  std::vector<double> gaps, errs;
  for (int t = 0; t < 500; ++t) {
    const auto& p = b.results[static_cast<std::size_t>(t)];
    const auto& m = b.results[static_cast<std::size_t>(500 + t)];
    gaps.push_back((p.eRecovered - m.eRecovered).real());
    errs.push_back(std::hypot(p.stderrEstimate, m.stderrEstimate));
  }
  double mean = 0, var = 0, err2 = 0;
  for (double g : gaps) mean += g / 500;
  for (double g : gaps) var += (g - mean) * (g - mean) / 499;
  for (double e : errs) err2 += e * e / 500;
  const double expected = 2 * std::sqrt(0.25 - 0.0625);
  CHECK(std::abs(mean - expected) < 3 * std::sqrt(var / 500));
  CHECK(std::sqrt(var) < 1.5 * std::sqrt(err2));
  CHECK(std::sqrt(var) > std::sqrt(err2) / 1.5);
}

TEST_CASE("batch determinism and ordering") {
  MeasureOptions opt;
  opt.trials = 3;
  opt.seed = 99;
  const std::vector<Momentum> ks{Momentum(0.2, 0.4), Momentum(1.0, -0.3), Momentum(-2.0, 2.5)};
  const MeasurementBatch a = measureBandStructure(ModelSpec::h2(0.4), ks, opt);
  const MeasurementBatch b = serial::measureBandStructure(ModelSpec::h2(0.4), ks, opt);
  REQUIRE(a.results.size() == 18);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    const auto& r = a.results[i];
    CHECK(r.kIndex == i / 6);
    CHECK(r.band == ((i / 3) % 2 == 0 ? Band::Plus : Band::Minus));
    CHECK(r.trial == static_cast<int>(i % 3));
    CHECK(r.counts.nH == b.results[i].counts.nH);
    CHECK(r.counts.nR == b.results[i].counts.nR);
    CHECK(r.ePrime == b.results[i].ePrime);
  }
  CHECK(itemSeed(1, 0, Band::Plus, 0) != itemSeed(1, 0, Band::Minus, 0));
  CHECK(itemSeed(1, 0, Band::Plus, 0) != itemSeed(2, 0, Band::Plus, 0));
}

TEST_CASE("global and per-k modes agree without noise") {
  MeasureOptions opt;
  opt.noiseless = true;
  const std::vector<Momentum> ks{Momentum(0.2, 0.4), Momentum(1.0, -0.3), Momentum(2.9, 0.1)};
  const MeasurementBatch perK = measureBandStructure(ModelSpec::h1(), ks, opt);
  opt.shiftMode = ShiftMode::Global;
  const MeasurementBatch glob = measureBandStructure(ModelSpec::h1(), ks, opt);
  CHECK(glob.globalLogLambda == doctest::Approx(0.5));
  for (std::size_t i = 0; i < perK.results.size(); ++i) {
    REQUIRE(glob.results[i].ok());
    CHECK(branchDistance(perK.results[i].eRecovered, glob.results[i].eRecovered) < 1e-10);
  }
}

TEST_CASE("global shift starves the knot model") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<Momentum> ks;
  for (int t = 0; t < 40; ++t) ks.emplace_back(u(rng), u(rng), u(rng));
  MeasureOptions opt;
  opt.shiftMode = ShiftMode::Global;
  const MeasurementBatch glob = measureBandStructure(ModelSpec::knot(3, 2), ks, opt);
  CHECK(glob.count(kFlagDegenerateCounts) > glob.results.size() / 2);
  opt.shiftMode = ShiftMode::PerK;
  const MeasurementBatch perK = measureBandStructure(ModelSpec::knot(3, 2), ks, opt);
  // The less damped band always resolves; the other may sink into the noise.
  std::size_t leadingOk = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const ComplexSpectrum sp = spectrum(hamiltonian(evalBloch(ModelSpec::knot(3, 2), ks[i])));
    leadingOk += perK.results[2 * i + (sp.ePlus.imag() >= sp.eMinus.imag() ? 0 : 1)].ok();
  }
  CHECK(leadingOk == ks.size());
  CHECK(perK.failures() < glob.failures());
}

TEST_CASE("branch unwrapping") {
  const std::vector<cplx> e{cplx(3.0, 0), cplx(-3.1, 0), cplx(-2.9, 0), cplx(3.0, 0)};
  const auto n = unwrapBranches(e);
  CHECK(n == std::vector<int>{0, 1, 1, 0});
}

TEST_CASE("options and flag names") {
  MeasureOptions opt;
  opt.trials = 0;
  const std::vector<Momentum> ks{Momentum(0, 0)};
  CHECK_THROWS_AS(measureBandStructure(ModelSpec::h1(), ks, opt), Error);
  opt.trials = 1;
  const std::vector<Momentum> k3{Momentum(0, 0, 0)};
  CHECK_THROWS_AS(measureBandStructure(ModelSpec::h1(), k3, opt), Error);
  CHECK(flagsToString(kFlagNearEp | kFlagDegenerateCounts) == "NEAR_EP|DEGENERATE_COUNTS");
  CHECK(shiftModeFromString("global") == ShiftMode::Global);
  CHECK_THROWS_AS(shiftModeFromString("both"), Error);
}
