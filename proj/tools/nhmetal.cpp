// nhmetal: command-line driver for scanning, tracing, knot identification,
// measurement simulation and Fermi-set classification.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <fmt/format.h>
#include <omp.h>

#include "CLI11.hpp"
#include "nhmetal/io.hpp"
#include "nhmetal/manifest.hpp"
#include "nhmetal/svg.hpp"

using namespace nhm;

namespace {

using json = io::json;

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kExpectation = 3 };

struct ExpectationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
  bool noiseless = false;
  std::string shiftMode;

  std::string model;
  double m = 0.4, epsilon = -20.0;
  int p = 3, q = 2;
  bool normalized = false;
  std::vector<double> perturbRe, perturbIm;
  bool perturbPreset = false;
  std::string grid, slice;

  bool expectNonempty = false;
  int expectCurves = -1;

  std::string curvesFile;
  int projections = 3;
  std::string expectKnot;

  double counts = 1e4;
  int trials = 1, samples = 11;
  std::vector<double> dxRange;
  std::string line;
  bool unwrap = false;
  bool expectOk = false;

  double fermiTol = 1e-12;
};

Momentum parseMomentum(const std::string& t) {
  std::vector<double> v;
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      v.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, fmt::format("--line: '{}' is not a number", part));
    }
  }
  if (v.size() == 2) return {v[0], v[1]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw Error(Errc::InvalidConfig, "--line: endpoints need 2 or 3 coordinates");
}

io::RunConfig buildConfig(const CLI::App& app, const Flags& f) {
  io::RunConfig c;
  if (!f.config.empty()) c = io::configFromJson(io::parseJsonText(io::readText(f.config), f.config));
  auto given = [&](const char* name) {
    if (const auto* o = app.get_option_no_throw(name); o && o->count() > 0) return true;
    for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
      if (const auto* o = sub->get_option_no_throw(name); o && o->count() > 0) return true;
    return false;
  };
  if (given("--model")) c.model.family = familyFromString(f.model);
  if (given("--m")) c.model.m = f.m;
  if (given("--p")) c.model.p = f.p;
  if (given("--q")) c.model.qExp = f.q;
  if (given("--epsilon")) c.model.epsilon = f.epsilon;
  if (given("--normalized")) c.model.normalizedKnot = f.normalized;
  if (given("--perturb-preset")) c.model.perturbation = realPerturbation(kKnotPerturbationPreset);
  if (given("--perturb-re") || given("--perturb-im")) {
    for (std::size_t i = 0; i < 3; ++i)
      c.model.perturbation[i] = cplx(f.perturbRe.size() == 3 ? f.perturbRe[i] : 0.0, f.perturbIm.size() == 3 ? f.perturbIm[i] : 0.0);
  }
  c.model.validate();
  if (given("--grid")) c.grid = io::parseGrid(f.grid);
  if (given("--slice")) {
    io::parseSlice(f.slice);
    c.slice = f.slice;
  }
  if (given("--seed")) c.seed = f.seed;
  if (given("--noiseless")) c.noiseless = true;
  if (given("--shift-mode")) c.shiftMode = shiftModeFromString(f.shiftMode);
  if (given("--projections")) c.projections = f.projections;
  if (given("--counts")) c.measure.expectedTotal = f.counts;
  if (given("--trials")) c.measure.trials = f.trials;
  if (given("--samples")) c.measure.samples = f.samples;
  if (given("--unwrap")) c.measure.unwrap = true;
  if (given("--dx-range")) c.measure.dxRange = std::array<double, 2>{f.dxRange[0], f.dxRange[1]};
  if (given("--line")) {
    const auto sep = f.line.find(':');
    if (sep == std::string::npos) throw Error(Errc::InvalidConfig, "--line: expected FROM:TO");
    c.measure.line = std::array<Momentum, 2>{parseMomentum(f.line.substr(0, sep)), parseMomentum(f.line.substr(sep + 1))};
  }
  if (!(c.measure.expectedTotal > 0.0)) throw Error(Errc::InvalidConfig, "--counts must be positive");
  if (c.measure.trials < 1 || c.measure.samples < 1) throw Error(Errc::InvalidConfig, "--trials and --samples must be >= 1");
  if (c.projections < 1) throw Error(Errc::InvalidConfig, "--projections must be >= 1");
  return c;
}

std::filesystem::path outputDir(const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("NHMETAL_OUT"); env && *env) return env;
  return "nhmetal-out";
}

std::string sliceNote(const io::RunConfig& c) { return c.slice ? fmt::format(" [{}]", *c.slice) : std::string(); }

void runScan(const io::RunConfig& c, io::OutputDir& out) {
  const Section s = c.section();
  const GridSpec g = c.gridOr(s.dimension() == 2 ? 201 : 41);
  const FieldGrid f = scanFields(s, g);
  out.write("fields.csv", io::fieldGridCsv(f));
  json j = io::toJson(f);
  j["model"] = io::toJson(c.model);
  if (c.slice) j["slice"] = *c.slice;
  out.write("fields.json", io::dump(j));
  if (g.dim == 2) {
    struct Map {
      const char* lattice;
      const char* file;
      const char* title;
      const char* ramp;
    };
    static const Map maps[] = {{"sqrtAbsReE2", "sqrt_abs_re_e2.svg", "sqrt|Re E^2|", "viridis"},
                               {"sqrtAbsImE2", "sqrt_abs_im_e2.svg", "sqrt|Im E^2|", "viridis"},
                               {"reGap", "re_gap.svg", "Re dE", "diverging"},
                               {"imGap", "im_gap.svg", "Im dE", "diverging"}};
    for (const auto& mp : maps) {
      svg::PlotSpec ps;
      ps.title = fmt::format("{} {}{}", to_string(c.model.family), mp.title, sliceNote(c));
      ps.ramp = mp.ramp;
      if (s.plane) {
        ps.xLabel = "u (along e1)";
        ps.yLabel = "v (along e2)";
      }
      out.write(mp.file, svg::heatmap(ps, g, f.lattice(mp.lattice)));
    }
  }
  std::cout << fmt::format("scan: {} points on a {}D grid\n", g.size(), g.dim);
}

ELSet runExtraction(const Section& s, const GridSpec& g) {
  return s.dimension() == 2 ? findEp2dGeneric(s, g) : extractEl3d(s, g);
}

void runTrace(const io::RunConfig& c, const Flags& f, io::OutputDir& out) {
  const Section s = c.section();
  const GridSpec g = c.gridOr(s.dimension() == 2 ? 201 : 61);
  const ELSet el = runExtraction(s, g);
  json j = io::toJson(el);
  j["model"] = io::toJson(c.model);
  j["grid"] = io::toJson(g);
  if (c.slice) j["slice"] = *c.slice;
  out.write("elset.json", io::dump(j));
  for (std::size_t i = 0; i < el.curves.size(); ++i) out.write(fmt::format("curve_{:03d}.csv", i), io::curveCsv(el.curves[i]));
  svg::PlotSpec ps;
  ps.title = fmt::format("{} exceptional set{}", to_string(c.model.family), sliceNote(c));
  std::vector<Momentum> pts = el.isolatedPoints;
  pts.insert(pts.end(), el.degeneracyPoints.begin(), el.degeneracyPoints.end());
  if (s.dimension() == 2) {
    ps.ramp = "diverging";
    const FieldGrid fg = scanFields(s, g);
    out.write("overlay.svg", svg::heatmap(ps, g, fg.reE2, el.curves, pts));
  } else {
    out.write("curves_3d.svg", svg::curves3d(ps, el.curves, Vec3(1.0, 0.8, 0.6), pts));
  }
  std::cout << fmt::format("trace: {} curves, {} isolated EPs, {} degeneracy points\n", el.curves.size(),
                           el.isolatedPoints.size(), el.degeneracyPoints.size());
  for (std::size_t i = 0; i < el.curves.size(); ++i)
    std::cout << fmt::format("  curve {}: {} points, closed {}, length {:.6f}, residual {:.2e}\n", i,
                             el.curves[i].points.size(), el.curves[i].closed, el.curves[i].length(), el.curves[i].residualMax);
  if (f.expectNonempty && el.empty()) throw ExpectationFailed("expected a nonempty exceptional set");
  if (f.expectCurves >= 0 && static_cast<int>(el.curves.size()) != f.expectCurves)
    throw ExpectationFailed(fmt::format("expected {} curves, found {}", f.expectCurves, el.curves.size()));
}

void runKnotId(const io::RunConfig& c, const Flags& f, io::OutputDir& out) {
  std::filesystem::path in = f.curvesFile;
  if (std::filesystem::is_directory(in)) in /= "elset.json";
  const ELSet el = io::elsetFromJson(io::parseJsonText(io::readText(in), in.string()), in.string());
  knot::ClassifyOptions opt;
  opt.projections = c.projections;
  opt.seed = c.seed;
  const knot::KnotReport r = knot::classify(el.curves, opt);
  json j = io::toJson(r);
  j["input"] = in.string();
  out.write("knot_report.json", io::dump(j));
  std::cout << fmt::format("knot-id: {} ({} components, determinant {}, Jones {})\n", r.label(), r.componentCount,
                           r.determinant, r.jones.toString());
  for (std::size_t a = 0; a < r.pairwiseLinking.size(); ++a)
    for (std::size_t b = a + 1; b < r.pairwiseLinking.size(); ++b)
      std::cout << fmt::format("  lk({}, {}) = {}\n", a, b, r.pairwiseLinking[a][b]);
  if (!f.expectKnot.empty() && r.label() != f.expectKnot)
    throw ExpectationFailed(fmt::format("expected {}, identified {}", f.expectKnot, r.label()));
}

void runMeasure(const io::RunConfig& c, const Flags& f, io::OutputDir& out) {
  const io::MeasurePath path = io::measurePath(c);
  MeasureOptions opt;
  opt.expectedTotal = c.measure.expectedTotal;
  opt.shiftMode = c.shiftMode;
  opt.noiseless = c.noiseless;
  opt.seed = c.seed;
  opt.trials = c.measure.trials;
  opt.unwrapPath = c.measure.unwrap;
  const MeasurementBatch b = measureBandStructure(c.model, path.momenta, opt);
  out.write("measure.csv", io::measurementCsv(b));
  json j = io::toJson(b, c);
  j["parameter_name"] = path.parameterName;
  j["parameter"] = path.parameter;
  out.write("measure.json", io::dump(j));

  // Gap per k averaged over trials.
  const std::size_t nk = path.momenta.size();
  const auto T = static_cast<std::size_t>(opt.trials);
  svg::Series reM{"measured", {}, {}, {}, "#1f77b4"}, imM{"measured", {}, {}, {}, "#1f77b4"};
  svg::Series reX{"exact", {}, {}, {}, "#d62728"}, imX{"exact", {}, {}, {}, "#d62728"};
  for (std::size_t k = 0; k < nk; ++k) {
    double sr = 0, si = 0, er = 0, ei = 0;
    int n = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& p = b.results[(k * 2) * T + t];
      const auto& m = b.results[(k * 2 + 1) * T + t];
      if (!p.ok() || !m.ok()) continue;
      const cplx gap = p.eRecovered - m.eRecovered;
      sr += gap.real();
      si += gap.imag();
      er += std::hypot(p.stderrEstimate, m.stderrEstimate);
      ei += std::hypot(p.stderrImag, m.stderrImag);
      ++n;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double x = path.parameter[k];
    reM.x.push_back(x);
    imM.x.push_back(x);
    reM.y.push_back(n ? sr / n : nan);
    imM.y.push_back(n ? si / n : nan);
    reM.err.push_back(n ? er / n / std::sqrt(static_cast<double>(n)) : nan);
    imM.err.push_back(n ? ei / n / std::sqrt(static_cast<double>(n)) : nan);
    const ComplexSpectrum sp = spectrum(hamiltonian(evalBloch(c.model, path.momenta[k])));
    reX.x.push_back(x);
    imX.x.push_back(x);
    reX.y.push_back((sp.ePlus - sp.eMinus).real());
    imX.y.push_back((sp.ePlus - sp.eMinus).imag());
  }
  svg::PlotSpec ps;
  ps.kind = svg::PlotKind::Section1D;
  ps.xLabel = path.parameterName;
  ps.yLabel = "Re dE";
  ps.title = fmt::format("{} measured Re dE ({} shift)", to_string(c.model.family), to_string(c.shiftMode));
  out.write("gap_re.svg", svg::section1d(ps, {reX, reM}));
  ps.yLabel = "Im dE";
  ps.title = fmt::format("{} measured Im dE ({} shift)", to_string(c.model.family), to_string(c.shiftMode));
  out.write("gap_im.svg", svg::section1d(ps, {imX, imM}));

  std::cout << fmt::format("measure: {} records, {} failed ({} degenerate counts), {} near EP\n", b.results.size(),
                           b.failures(), b.count(kFlagDegenerateCounts), b.count(kFlagNearEp));
  if (f.expectOk && b.failures() > 0)
    throw ExpectationFailed(fmt::format("{} measurement records failed", b.failures()));
}

void runFermi(const io::RunConfig& c, const Flags& f, io::OutputDir& out) {
  const Section s = c.section();
  const GridSpec g = c.gridOr(s.dimension() == 2 ? 201 : 61);
  const FermiClassification fc = fermiClassify(s, g, f.fermiTol);
  out.write("fermi.csv", io::fermiCsv(fc));
  json j = io::toJson(fc);
  j["model"] = io::toJson(c.model);
  if (c.slice) j["slice"] = *c.slice;
  out.write("fermi.json", io::dump(j));
  svg::PlotSpec ps;
  ps.title = fmt::format("{} Fermi sets{}", to_string(c.model.family), sliceNote(c));
  if (g.dim == 2) {
    // Cells drawn on the vertex lattice: label of the cell whose lower corner is the vertex.
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t cell = 0; cell < fc.labels.size(); ++cell) {
      const auto ij = fc.cellIndex(cell);
      v[g.flat(ij[0], ij[1])] = static_cast<double>(fc.labels[cell]);
    }
    out.write("fermi.svg", svg::heatmap(ps, g, v));
  } else {
    std::vector<Momentum> boundary;
    for (std::size_t cell = 0; cell < fc.labels.size(); ++cell)
      if (fc.labels[cell] == FermiLabel::Boundary) boundary.push_back(fc.cellCentre(cell));
    out.write("fermi_boundary_3d.svg", svg::curves3d(ps, {}, Vec3(1.0, 0.8, 0.6), boundary));
  }
  std::cout << fmt::format("fermi: {} cells: {} FERMI, {} BOUNDARY, {} GAPPED\n", fc.labels.size(),
                           fc.count(FermiLabel::Fermi), fc.count(FermiLabel::Boundary), fc.count(FermiLabel::Gapped));
}

int exitFor(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::DimensionMismatch:
    case Errc::WrongFamily:
    case Errc::Unsupported: return kConfig;
    default: return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Hermitian two-band band-structure toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("--config", f.config, "JSON config file (or a manifest.json from an earlier run)")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--out", f.out, "Output directory (default: $NHMETAL_OUT or ./nhmetal-out)");
  app.add_option("--threads", f.threads, "OpenMP thread count")->check(CLI::PositiveNumber);
  app.add_flag("--noiseless", f.noiseless, "Use exact expected counts instead of Poisson samples");
  app.add_option("--shift-mode", f.shiftMode, "Passivity shift scope")->check(CLI::IsMember({"global", "per-k"}));

  app.add_option("--model", f.model, "Model family")->check(CLI::IsMember({"h1", "h2", "knot", "constant", "H1", "H2", "Knot", "Constant"}));
  app.add_option("--m", f.m, "H2 mass parameter");
  app.add_option("--p", f.p, "Knot exponent of Z0");
  app.add_option("--q", f.q, "Knot exponent of Z1");
  app.add_option("--epsilon", f.epsilon, "Knot offset");
  app.add_flag("--normalized", f.normalized, "Normalize (Z0, Z1) onto the unit 3-sphere");
  app.add_option("--perturb-re", f.perturbRe, "Real parts of the Pauli perturbation (x,y,z)")->expected(3)->delimiter(',');
  app.add_option("--perturb-im", f.perturbIm, "Imaginary parts of the Pauli perturbation (x,y,z)")->expected(3)->delimiter(',');
  app.add_flag("--perturb-preset", f.perturbPreset, "Knot robustness perturbation (0.3179, 0.3590, 0.2211)");
  app.add_option("--grid", f.grid, "Grid as NxN or NxNxN over the Brillouin zone");
  app.add_option("--slice", f.slice, "Plane through a 3D model: kz=<value>, kz=kx or kz=-kx");

  auto* scan = app.add_subcommand("scan", "Spectral fields over a grid");
  auto* trace = app.add_subcommand("trace", "Extract exceptional points and lines");
  trace->add_flag("--expect-nonempty", f.expectNonempty, "Exit 3 if nothing is found");
  trace->add_option("--expect-curves", f.expectCurves, "Exit 3 unless exactly this many curves are found");
  auto* knotId = app.add_subcommand("knot-id", "Identify the knot or link formed by traced curves");
  knotId->add_option("curves", f.curvesFile, "elset.json from trace, or its output directory")->required();
  knotId->add_option("--projections", f.projections, "Number of random projections to compare");
  knotId->add_option("--expect", f.expectKnot, "Exit 3 unless identified as this label (e.g. TREFOIL)");
  auto* measure = app.add_subcommand("measure", "Simulate interferometric energy measurement");
  measure->add_option("--counts", f.counts, "Expected photon number per record");
  measure->add_option("--trials", f.trials, "Repetitions per momentum");
  measure->add_option("--samples", f.samples, "Points along the path");
  measure->add_option("--dx-range", f.dxRange, "H1 only: d_x range lo,hi along kx = ky")->expected(2)->delimiter(',');
  measure->add_option("--line", f.line, "Straight path FROM:TO, e.g. -3.1,0:3.1,0");
  measure->add_flag("--unwrap", f.unwrap, "Unwrap Re E' along the path");
  measure->add_flag("--expect-ok", f.expectOk, "Exit 3 if any record fails");
  auto* fermi = app.add_subcommand("fermi", "Classify cells into Fermi, boundary and gapped sets");
  fermi->add_option("--tol", f.fermiTol, "Relative zero tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  std::string commandLine;
  for (int i = 0; i < argc; ++i) commandLine += (i ? " " : "") + std::string(argv[i]);

  try {
    if (f.threads > 0) omp_set_num_threads(f.threads);
    const io::RunConfig c = buildConfig(app, f);
    io::OutputDir out(outputDir(f));
    std::string name;
    std::optional<ExpectationFailed> failed;
    try {
      if (scan->parsed()) {
        name = "scan";
        runScan(c, out);
      } else if (trace->parsed()) {
        name = "trace";
        runTrace(c, f, out);
      } else if (knotId->parsed()) {
        name = "knot-id";
        runKnotId(c, f, out);
      } else if (measure->parsed()) {
        name = "measure";
        runMeasure(c, f, out);
      } else if (fermi->parsed()) {
        name = "fermi";
        runFermi(c, f, out);
      }
    } catch (const ExpectationFailed& e) {
      failed = e;
    }
    out.finish(commandLine, name, io::toJson(c));
    std::cout << fmt::format("wrote {} files to {}\n", out.entries().size() + 1, out.root().string());
    if (failed) {
      std::cerr << "expectation failed: " << failed->what() << '\n';
      return kExpectation;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exitFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
