// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "nhmetal/el_extract.hpp"
#include "nhmetal/knot.hpp"
#include "nhmetal/measurement.hpp"
#include "oracles.hpp"

using namespace nhm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double h1Dx(const Momentum& k) { return 2 - std::cos(k[0]) - std::cos(k[1]); }

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

struct Checks {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string note) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + note);
    } else {
      notes.push_back(std::move(note));
    }
  }
  Outcome done() const { return {pass, join(notes)}; }
};

Outcome c1() {
  Checks c;
  const ELSet s = findEp2dGeneric(Section(ModelSpec::h1()), GridSpec::brillouin(2, 201));
  double dev = 0.0;
  std::size_t pts = 0;
  for (const auto& curve : s.curves)
    for (const auto& p : curve.points) {
      dev = std::max(dev, std::abs(h1Dx(p) - 0.25));
      ++pts;
    }
  c.require(s.curves.size() == 1 && s.curves[0].closed, fmt::format("{} closed curve(s)", s.curves.size()));
  c.require(pts > 0 && dev < 1e-8, fmt::format("max |d_x - 0.25| = {:.2e} over {} points", dev, pts));
  return c.done();
}

Outcome c2() {
  Checks c;
  const ModelSpec m = ModelSpec::h1().perturb({0, cplx(0, kPi / 20), 0});
  const ELSet s = findEp2dGeneric(Section(m), GridSpec::brillouin(2, 201));
  const double derived = std::sqrt(1.0 / 16 + kPi * kPi / 400);
  double lo = 1e9, hi = -1e9;
  for (const auto& curve : s.curves)
    for (const auto& p : curve.points) {
      lo = std::min(lo, h1Dx(p));
      hi = std::max(hi, h1Dx(p));
    }
  c.require(s.curves.size() == 1, fmt::format("{} curve(s)", s.curves.size()));
  c.require(std::max(std::abs(lo - derived), std::abs(hi - derived)) < 1e-8,
            fmt::format("ring d_x in [{:.12f}, {:.12f}], closed form {:.12f}", lo, hi, derived));
  c.require(std::abs(hi - 0.295) < 1e-3 && std::abs(lo - 0.295) < 1e-3, "within 1e-3 of 0.295");
  return c.done();
}

Outcome c3() {
  Checks c;
  const double delta = kPi / 20;
  const ModelSpec m = ModelSpec::h1().perturb({cplx(0, delta), 0, 0});
  const ELSet s = findEp2dGeneric(Section(m), GridSpec::brillouin(2, 401));
  c.require(s.empty(), fmt::format("{} curves, {} points", s.curves.size(), s.isolatedPoints.size()));

  // m(k) = max(|Re E^2|, |Im E^2|) with E^2 = d_x^2 - delta^2 - 1/16 + 2 i delta d_x
  // depends on k only through d_x. Inside a cell d_x stays within the corner
  // range widened by the bilinear interpolation error h^2/4 (|d_x''| <= 1), so
  // bounding |Re| and |Im| over that interval bounds m over the whole cell.
  const GridSpec g = GridSpec::brillouin(2, 401);
  const double h = g.spacing(0);
  const double c0 = delta * delta + 1.0 / 16;
  const double root = std::sqrt(c0);
  double gridMin = 1e9, certified = 1e9;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      double lo = 1e9, hi = -1e9;
      for (int q = 0; q < 4; ++q) {
        const double dx = h1Dx(g.point(g.wrapIndex(0, i + (q & 1)), g.wrapIndex(1, j + (q >> 1))));
        gridMin = std::min(gridMin, std::max(std::abs(dx * dx - c0), 2 * delta * std::abs(dx)));
        lo = std::min(lo, dx);
        hi = std::max(hi, dx);
      }
      lo -= h * h / 4;
      hi += h * h / 4;
      const double reMin = (lo <= root && root <= hi) || (lo <= -root && -root <= hi)
                               ? 0.0
                               : std::min(std::abs(lo * lo - c0), std::abs(hi * hi - c0));
      const double imMin = lo <= 0.0 && hi >= 0.0 ? 0.0 : 2 * delta * std::min(std::abs(lo), std::abs(hi));
      certified = std::min(certified, std::max(reMin, imMin));
    }
  c.require(certified >= 0.05, fmt::format("grid min {:.5f}, certified lower bound {:.5f}", gridMin, certified));
  return c.done();
}

Outcome c4() {
  Checks c;
  const GridSpec g = GridSpec::brillouin(2, 201);
  const ELSet a = findEp2dGeneric(Section(ModelSpec::h2(0.4)), g);
  bool closedA = true;
  for (const auto& cv : a.curves) closedA = closedA && cv.closed;
  c.require(a.curves.size() == 2 && closedA, fmt::format("m=0.4: {} closed ELs", a.curves.size()));

  const ELSet b = findEp2dGeneric(Section(ModelSpec::h2(1.0)), g);
  const bool collapsed = b.degeneracyPoints.size() == 1 && torusDistance(b.degeneracyPoints[0], Momentum(0, 0)) < 1e-6;
  bool innerGone = true;
  for (const auto& cv : b.curves) innerGone = innerGone && distanceToCurve(Momentum(0, 0), cv) > 0.5;
  c.require(collapsed && innerGone,
            fmt::format("m=1: {} curve(s), {} vanishing-d point(s)", b.curves.size(), b.degeneracyPoints.size()));

  const ELSet d = findEp2dGeneric(Section(ModelSpec::h2(1.42)), g);
  bool closedD = true;
  for (const auto& cv : d.curves) closedD = closedD && cv.closed;
  c.require(d.curves.size() == 4 && closedD, fmt::format("m=1.42: {} closed ELs", d.curves.size()));

  const ELSet e = findEp2dGeneric(Section(ModelSpec::h2(std::sqrt(6.0) - 1)), g);
  double worst = 0.0;
  std::array<int, 4> quadrants{};
  for (const auto& p : e.isolatedPoints) {
    worst = std::max({worst, std::abs(std::abs(p[0]) / kPi - 0.1959), std::abs(std::abs(p[1]) / kPi - 0.1959)});
    ++quadrants[static_cast<std::size_t>((p[0] > 0) + 2 * (p[1] > 0))];
  }
  c.require(e.curves.empty() && e.isolatedPoints.size() == 4 && quadrants == std::array<int, 4>{1, 1, 1, 1} && worst < 1e-4,
            fmt::format("m=sqrt6-1: {} EPs, max |k/pi - 0.1959| = {:.2e}", e.isolatedPoints.size(), worst));
  return c.done();
}

const GridSpec kSeedGrid = GridSpec::brillouin(3, 61);

ModelSpec knotModel(int p, int q, bool normalized) {
  ModelSpec m = ModelSpec::knot(p, q);
  m.normalizedKnot = normalized;
  return m;
}

const char* variantName(bool normalized) { return normalized ? "normalized" : "verbatim"; }

Outcome c5() {
  Checks c;
  for (bool normalized : {false, true}) {
    const std::string v = variantName(normalized);
    const ELSet s = extractEl3d(Section(knotModel(3, 2, normalized)), kSeedGrid);
    c.require(s.curves.size() == 1 && s.curves[0].closed, fmt::format("{}: {} closed component(s)", v, s.curves.size()));
    knot::ClassifyOptions opt;
    opt.projections = 3;
    const knot::KnotReport r = knot::classify(s.curves, opt);
    const auto [re, im] = r.jones.evaluateAtSqrtMinusOne();
    c.require(r.identifiedAs == knot::KnotType::Trefoil, v + ": identified " + r.label() + ", Jones " + r.jones.toString());
    c.require(r.determinant == 3 && std::llround(std::hypot(re, im)) == 3, fmt::format("determinant {}", r.determinant));
    c.require(r.gaussCodes.size() >= 3, fmt::format("{} agreeing projections", r.gaussCodes.size()));
  }
  return c.done();
}

Outcome c6() {
  Checks c;
  for (bool normalized : {false, true}) {
    const std::string v = variantName(normalized);
    const ELSet s = extractEl3d(Section(knotModel(2, 2, normalized)), kSeedGrid);
    bool closed = true;
    for (const auto& cv : s.curves) closed = closed && cv.closed;
    c.require(s.curves.size() == 2 && closed, fmt::format("{}: {} closed component(s)", v, s.curves.size()));
    const knot::KnotReport r = knot::classify(s.curves);
    const int lk = r.pairwiseLinking.size() == 2 ? r.pairwiseLinking[0][1] : 0;
    c.require(std::abs(lk) == 1, fmt::format("linking number {}", lk));
    c.require(r.determinant == 2, fmt::format("determinant {}", r.determinant));
    c.require(r.identifiedAs == knot::KnotType::HopfLink, "identified " + r.label());
  }
  return c.done();
}

struct Robustness {
  int stable = 0;
  double minShift = 1e9;
  std::vector<std::string> changed;
};

Robustness robustness(bool normalized, const std::vector<std::array<double, 3>>& deltas) {
  Robustness out;
  ModelSpec base = ModelSpec::knot(3, 2);
  base.normalizedKnot = normalized;
  const ELSet ref = extractEl3d(Section(base), kSeedGrid);
  if (ref.curves.size() != 1) {
    out.changed.push_back("reference trefoil not extracted");
    return out;
  }
  const LaurentPoly refJones = knot::classify(ref.curves).jones;
  for (const auto& d : deltas) {
    ModelSpec m = base;
    m.perturb(realPerturbation(d));
    const ELSet s = extractEl3d(Section(m), kSeedGrid);
    bool ok = s.curves.size() == 1;
    if (ok) {
      const knot::KnotReport r = knot::classify(s.curves);
      ok = r.identifiedAs == knot::KnotType::Trefoil && r.determinant == 3 &&
           (r.jones == refJones || r.jones == refJones.mirrored());
      out.minShift = std::min(out.minShift, hausdorffDistance(s.curves[0], ref.curves[0]));
    }
    if (ok)
      ++out.stable;
    else
      out.changed.push_back(fmt::format("({:.4f}, {:.4f}, {:.4f})", d[0], d[1], d[2]));
  }
  return out;
}

// The normalized construction is the variant held to the robustness claim; the
// verbatim one reconnects into a two-component link once delta_z nears 0.39 and
// is reported alongside.
Outcome c7() {
  Checks c;
  std::vector<std::array<double, 3>> deltas{kKnotPerturbationPreset};
  std::mt19937_64 rng(20200601);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  for (int i = 0; i < 20; ++i) deltas.push_back({u(rng), u(rng), u(rng)});

  const Robustness n = robustness(true, deltas);
  const Robustness v = robustness(false, deltas);
  c.require(n.stable == static_cast<int>(deltas.size()),
            fmt::format("normalized: {}/{} perturbations keep a single trefoil{}", n.stable, deltas.size(),
                        n.changed.empty() ? "" : ", changed at " + join(n.changed)));
  c.require(n.minShift > 1e-3, fmt::format("normalized: smallest Hausdorff displacement {:.4f}", n.minShift));
  c.notes.push_back(fmt::format("verbatim: {}/{} keep a trefoil{}", v.stable, deltas.size(),
                                v.changed.empty() ? "" : ", changed at " + join(v.changed)));
  return c.done();
}

Outcome c8() {
  Checks c;
  const GridSpec g2 = GridSpec::brillouin(2, 201);
  const FermiClassification f = fermiClassify(Section(ModelSpec::h1()), g2);
  std::size_t mismatch = 0;
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    const auto ij = f.cellIndex(i);
    int below = 0;
    for (int q = 0; q < 4; ++q)
      below += h1Dx(g2.point(g2.wrapIndex(0, ij[0] + (q & 1)), g2.wrapIndex(1, ij[1] + (q >> 1)))) < 0.25;
    const FermiLabel want = below == 4 ? FermiLabel::Fermi : below == 0 ? FermiLabel::Gapped : FermiLabel::Boundary;
    mismatch += f.labels[i] != want;
  }
  c.require(mismatch == 0, fmt::format("H1: {} of {} cells differ from d_x < 1/4", mismatch, f.labels.size()));

  const Section s(ModelSpec::knot(3, 2));
  const FermiClassification f3 = fermiClassify(s, kSeedGrid);
  const ELSet el = extractEl3d(s, kSeedGrid);
  if (el.curves.size() != 1) return {false, "trefoil not extracted"};
  const double cell = std::sqrt(3.0) * kSeedGrid.spacing(0);
  std::vector<Momentum> centres;
  double far = 0.0;
  for (std::size_t i = 0; i < f3.labels.size(); ++i) {
    if (f3.labels[i] != FermiLabel::Boundary) continue;
    centres.push_back(f3.cellCentre(i));
    far = std::max(far, distanceToCurve(centres.back(), el.curves[0]));
  }
  double uncovered = 0.0;
  for (const auto& p : el.curves[0].points) {
    double best = 1e9;
    for (const auto& q : centres) best = std::min(best, torusDistance(p, q));
    uncovered = std::max(uncovered, best);
  }
  c.require(!centres.empty() && far <= cell && uncovered <= cell,
            fmt::format("3D: {} boundary cells, farthest {:.4f} from the line, line-to-cell {:.4f}, cell {:.4f}",
                        centres.size(), far, uncovered, cell));
  return c.done();
}

Outcome c9() {
  Checks c;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const std::vector<ModelSpec> models{ModelSpec::h1(), ModelSpec::h2(0.4), ModelSpec::h2(1.0), ModelSpec::h2(1.42),
                                      ModelSpec::h1().perturb({0, cplx(0, kPi / 20), 0})};
  MeasureOptions opt;
  opt.noiseless = true;
  double worst = 0.0;
  int pairs = 0, skipped = 0;
  for (int i = 0; i < 100; ++i) {
    const ModelSpec& m = models[static_cast<std::size_t>(i) % models.size()];
    const std::vector<Momentum> k{Momentum(u(rng), u(rng))};
    const MeasurementBatch b = measureBandStructure(m, k, opt);
    const ComplexSpectrum sp = spectrum(hamiltonian(evalBloch(m, k[0])));
    if (b.results[0].flags & kFlagNearEp) {
      ++skipped;
      continue;
    }
    for (const auto& r : b.results) {
      if (!r.ok()) {
        worst = 1e9;
        continue;
      }
      const cplx e = r.band == Band::Plus ? sp.ePlus : sp.eMinus;
      worst = std::max(worst, std::hypot(wrapAngle(r.eRecovered.real() - e.real()), r.eRecovered.imag() - e.imag()));
    }
    ++pairs;
  }
  c.require(worst < 1e-10 && pairs >= 95, fmt::format("noiseless: {} pairs ({} near EP), max error {:.2e}", pairs, skipped, worst));

  const double k = std::acos(1 - 0.25);
  MeasureOptions noisy;
  noisy.trials = 500;
  noisy.expectedTotal = 1e4;
  noisy.seed = 20200601;
  const std::vector<Momentum> ks{Momentum(k, k)};
  const MeasurementBatch b = measureBandStructure(ModelSpec::h1(), ks, noisy);
  if (b.failures() != 0) return {false, fmt::format("{} failed trials", b.failures())};
  double mean = 0, var = 0, prop = 0;
  std::vector<double> gaps;
  for (int t = 0; t < 500; ++t) {
    const auto& p = b.results[static_cast<std::size_t>(t)];
    const auto& mi = b.results[static_cast<std::size_t>(500 + t)];
    gaps.push_back((p.eRecovered - mi.eRecovered).real());
    prop += (p.stderrEstimate * p.stderrEstimate + mi.stderrEstimate * mi.stderrEstimate) / 500;
  }
  for (double g : gaps) mean += g / 500;
  for (double g : gaps) var += (g - mean) * (g - mean) / 499;
  const double expected = 2 * std::sqrt(0.25 - 1.0 / 16);
  const double se = std::sqrt(var / 500);
  const double ratio = std::sqrt(var) / std::sqrt(prop);
  c.require(std::abs(mean - expected) < 3 * se,
            fmt::format("mean gap {:.6f} vs {:.6f} ({:.2f} standard errors)", mean, expected, std::abs(mean - expected) / se));
  c.require(ratio <= 1.5 && ratio >= 1 / 1.5, fmt::format("scatter / propagated stderr = {:.3f}", ratio));
  return c.done();
}

Outcome c10() {
  Checks c;
  const GridSpec g = GridSpec::brillouin(2, 101);
  const SymmetryOp q = SymmetryOp::sigmaX();
  double symWorst = 0.0;
  for (const ModelSpec& m : {ModelSpec::h1(), ModelSpec::h2(0.4), ModelSpec::h2(std::sqrt(6.0) - 1),
                             ModelSpec::h1().perturb({0, cplx(0, kPi / 20), 0})})
    symWorst = std::max(symWorst, symmetryResidual(Section(m), q, g));
  const double broken = symmetryResidual(Section(ModelSpec::h1().perturb({cplx(0, kPi / 20), 0, 0})), q, g);
  c.require(symWorst <= 1e-12 && broken >= kPi / 10 - 1e-9,
            fmt::format("symmetry residual {:.1e} (symmetric), {:.4f} (broken)", symWorst, broken));

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  double jac = 0.0, disc = 0.0;
  std::vector<ModelSpec> specs{ModelSpec::h1(), ModelSpec::h2(0.4), ModelSpec::knot(3, 2), ModelSpec::knot(2, 2)};
  specs.push_back(ModelSpec::knot(3, 2).perturb(realPerturbation(kKnotPerturbationPreset)));
  for (const ModelSpec& m : specs) {
    for (int t = 0; t < 200; ++t) {
      const Momentum k = m.dimension() == 3 ? Momentum(u(rng), u(rng), u(rng)) : Momentum(u(rng), u(rng));
      const Section s(m);
      const BlochJacobian a = s.grad(k), f = finiteDifferenceJacobian(s, k);
      const double scale = std::max({1.0, a.dR.cwiseAbs().maxCoeff(), a.dI.cwiseAbs().maxCoeff()});
      jac = std::max(jac, std::max((a.dR - f.dR).cwiseAbs().maxCoeff(), (a.dI - f.dI).cwiseAbs().maxCoeff()) / scale);

      // Symmetric functions of the eigenvalues stay well conditioned at coalescence.
      const BlochVector d = evalBloch(m, k);
      Eigen::ComplexEigenSolver<Mat2c> es(hamiltonian(d), false);
      const cplx l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
      const double n2 = d.normSquared();
      disc = std::max({disc, std::abs(discriminant(d) + l0 * l1) / n2, std::abs(l0 + l1) / std::sqrt(n2)});
    }
  }
  c.require(jac <= 1e-6, fmt::format("jacobian vs finite differences {:.1e}", jac));
  c.require(disc <= 1e-12, fmt::format("discriminant vs eigensolver {:.1e}", disc));

  int bracketCases = 0, bracketBad = 0;
  for (const auto& [strands, word] : std::vector<std::pair<int, std::vector<int>>>{
           {2, {1, 1, 1}}, {2, {1, 1}}, {3, {1, -2, 1, -2}}, {2, {1, 1, 1, 1, 1}}, {3, {1, 2, 1, 2}},
           {3, {1, 2, 1, 2, 1, 2, 1, 2, 1, 2}}, {4, {1, 2, 3, -1, 2, -3, 1, 2, 3, 1, -2}}}) {
    const knot::KnotDiagram dgm = knot::braidClosure(strands, word);
    oracle::Poly mine;
    for (auto [key, coef] : knot::kauffmanBracket(dgm).terms()) mine[key / 2] = coef;
    bracketBad += mine != oracle::bracketOracle(dgm);
    ++bracketCases;
  }
  const ELSet tref = extractEl3d(Section(ModelSpec::knot(3, 2)), GridSpec::brillouin(3, 41));
  for (const auto& cv : tref.curves) {
    const knot::KnotDiagram dgm = [&] {
      std::mt19937_64 r(3);
      return knot::project(std::span<const PolyCurve>(&cv, 1), Vec3(0.3, 0.5, 0.8), r);
    }();
    oracle::Poly mine;
    for (auto [key, coef] : knot::kauffmanBracket(dgm).terms()) mine[key / 2] = coef;
    bracketBad += mine != oracle::bracketOracle(dgm);
    ++bracketCases;
  }
  c.require(bracketBad == 0, fmt::format("state sum vs smoothing enumerator: {} of {} differ", bracketBad, bracketCases));

  const ELSet hopf = extractEl3d(Section(ModelSpec::knot(2, 2)), GridSpec::brillouin(3, 41));
  bool linkOk = hopf.curves.size() == 2;
  double integral = 0.0;
  int crossings = 0;
  if (linkOk) {
    std::mt19937_64 r(4);
    crossings = knot::linkingNumber(hopf.curves[0], hopf.curves[1], r);
    integral = knot::gaussLinkingIntegral(hopf.curves[0], hopf.curves[1]);
    linkOk = std::lround(integral) == crossings;
  }
  c.require(linkOk, fmt::format("linking: crossings {}, Gauss integral {:.9f}", crossings, integral));
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"H1 exceptional ring", c1},        {"symmetry-preserving perturbation", c2},
      {"symmetry-breaking perturbation", c3}, {"H2 phenomenology", c4},
      {"trefoil", c5},                    {"Hopf link", c6},
      {"robustness", c7},                 {"Fermi sets", c8},
      {"measurement round trip", c9},     {"invariant suites", c10},
  };
  const std::array<double, 10> budget{5, 5, 10, 30, 120, 120, 600, 60, 60, 60};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget[i]) {
      o.pass = false;
      o.detail += fmt::format("; FAILED runtime budget {:.0f} s", budget[i]);
    }
    failed += !o.pass;
    fmt::print("{} criterion {} ({}) [{:.2f} s]: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
