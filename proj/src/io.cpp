#include "nhmetal/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace nhm::io {

std::string formatDouble(double x) { return fmt::format("{:.17g}", x); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string readText(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::InvalidConfig, fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parseJsonText(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, fmt::format("{}: {}", source, e.what()));
  }
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Errc::InvalidConfig, fmt::format("{}: {}", where, what));
}

double number(const json& j, const std::string& where) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) bad(where, "expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& where, std::size_t minSize, std::size_t maxSize) {
  if (!j.is_array()) bad(where, "expected an array");
  if (j.size() < minSize || j.size() > maxSize)
    bad(where, minSize == maxSize ? fmt::format("expected {} entries", minSize)
                                  : fmt::format("expected {} to {} entries", minSize, maxSize));
  return j;
}

void object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) bad(where + "." + key, "unknown field");
  }
}

json labelCounts(const FermiClassification& f) {
  json c = json::object();
  for (auto l : {FermiLabel::Gapped, FermiLabel::Fermi, FermiLabel::Boundary}) c[to_string(l)] = f.count(l);
  return c;
}

}  // namespace

json toJson(cplx z) { return json::array({z.real(), z.imag()}); }

json toJson(const Momentum& k) {
  json a = json::array();
  for (int i = 0; i < k.dim; ++i) a.push_back(k[i]);
  return a;
}

json toJson(const ModelSpec& m) {
  json j;
  j["family"] = to_string(m.family);
  j["m"] = m.m;
  j["p"] = m.p;
  j["q"] = m.qExp;
  j["epsilon"] = m.epsilon;
  j["normalized"] = m.normalizedKnot;
  j["constant_dim"] = m.constantDim;
  j["perturbation"] = json::array({toJson(m.perturbation[0]), toJson(m.perturbation[1]), toJson(m.perturbation[2])});
  return j;
}

json toJson(const GridSpec& g) {
  json j;
  j["dim"] = g.dim;
  json n = json::array(), lo = json::array(), hi = json::array(), per = json::array();
  for (int i = 0; i < g.dim; ++i) {
    n.push_back(g.n[static_cast<std::size_t>(i)]);
    lo.push_back(g.lo[static_cast<std::size_t>(i)]);
    hi.push_back(g.hi[static_cast<std::size_t>(i)]);
    per.push_back(g.periodic[static_cast<std::size_t>(i)]);
  }
  j["n"] = n;
  j["lo"] = lo;
  j["hi"] = hi;
  j["periodic"] = per;
  return j;
}

json toJson(const PolyCurve& c) {
  json j;
  j["closed"] = c.closed;
  j["winding"] = c.winding;
  j["residual_max"] = c.residualMax;
  j["length"] = c.length();
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(toJson(p));
  j["points"] = pts;
  return j;
}

json toJson(const ELSet& s) {
  json j;
  j["curves"] = json::array();
  for (const auto& c : s.curves) j["curves"].push_back(toJson(c));
  j["isolated_points"] = json::array();
  for (const auto& k : s.isolatedPoints) j["isolated_points"].push_back(toJson(k));
  j["degeneracy_points"] = json::array();
  for (const auto& k : s.degeneracyPoints) j["degeneracy_points"].push_back(toJson(k));
  return j;
}

json toJson(const FieldGrid& f) {
  json j;
  j["grid"] = toJson(f.grid);
  json lat;
  for (auto name : FieldGrid::latticeNames()) lat[std::string(name)] = f.lattice(name);
  j["lattices"] = lat;
  return j;
}

json toJson(const FermiClassification& f) {
  json j;
  j["grid"] = toJson(f.grid);
  j["definition"] = to_string(f.definition);
  j["legend"] = json::array({"GAPPED", "FERMI", "BOUNDARY"});
  j["counts"] = labelCounts(f);
  std::vector<int> labels;
  labels.reserve(f.labels.size());
  for (auto l : f.labels) labels.push_back(static_cast<int>(l));
  j["labels"] = labels;
  return j;
}

json toJson(const LaurentPoly& p) {
  json terms = json::array();
  for (const auto& [k, c] : p.terms()) terms.push_back(json::array({k, c}));
  return {{"variable", "t"}, {"twice_exponent_coefficient", terms}, {"text", p.toString("t")}};
}

json toJson(const knot::KnotReport& r) {
  json j;
  j["component_count"] = r.componentCount;
  j["pairwise_linking"] = r.pairwiseLinking;
  j["jones"] = toJson(r.jones);
  j["determinant"] = r.determinant;
  j["identified_as"] = r.label();
  j["chirality"] = knot::to_string(r.chirality);
  j["gauss_codes"] = r.gaussCodes;
  json dirs = json::array();
  for (const auto& d : r.directions) dirs.push_back(json::array({d[0], d[1], d[2]}));
  j["projection_directions"] = dirs;
  return j;
}

cplx complexFromJson(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  const json& a = array(j, where, 2, 2);
  return {number(a[0], where + "[0]"), number(a[1], where + "[1]")};
}

Momentum momentumFromJson(const json& j, const std::string& where) {
  const json& a = array(j, where, 2, 3);
  Momentum k;
  k.dim = static_cast<int>(a.size());
  for (int i = 0; i < k.dim; ++i) k[i] = number(a[static_cast<std::size_t>(i)], fmt::format("{}[{}]", where, i));
  return k;
}

ModelSpec modelFromJson(const json& j, const std::string& where) {
  object(j, where, {"family", "m", "p", "q", "epsilon", "normalized", "constant_dim", "perturbation"});
  ModelSpec m;
  if (j.contains("family")) {
    try {
      m.family = familyFromString(text(j["family"], where + ".family"));
    } catch (const Error& e) {
      bad(where + ".family", e.what());
    }
  }
  if (j.contains("m")) m.m = number(j["m"], where + ".m");
  if (j.contains("p")) m.p = integer(j["p"], where + ".p");
  if (j.contains("q")) m.qExp = integer(j["q"], where + ".q");
  if (j.contains("epsilon")) m.epsilon = number(j["epsilon"], where + ".epsilon");
  if (j.contains("normalized")) m.normalizedKnot = boolean(j["normalized"], where + ".normalized");
  if (j.contains("constant_dim")) m.constantDim = integer(j["constant_dim"], where + ".constant_dim");
  if (j.contains("perturbation")) {
    const json& a = array(j["perturbation"], where + ".perturbation", 3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      m.perturbation[i] = complexFromJson(a[i], fmt::format("{}.perturbation[{}]", where, i));
  }
  try {
    m.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return m;
}

GridSpec gridFromJson(const json& j, const std::string& where) {
  object(j, where, {"dim", "n", "lo", "hi", "periodic"});
  GridSpec g;
  if (!j.contains("dim")) bad(where + ".dim", "required");
  g.dim = integer(j["dim"], where + ".dim");
  if (g.dim != 2 && g.dim != 3) bad(where + ".dim", "must be 2 or 3");
  g = GridSpec::brillouin(g.dim, 2);
  const auto d = static_cast<std::size_t>(g.dim);
  if (!j.contains("n")) bad(where + ".n", "required");
  const json& n = array(j["n"], where + ".n", d, d);
  for (std::size_t i = 0; i < d; ++i) g.n[i] = integer(n[i], fmt::format("{}.n[{}]", where, i));
  if (j.contains("lo")) {
    const json& a = array(j["lo"], where + ".lo", d, d);
    for (std::size_t i = 0; i < d; ++i) g.lo[i] = number(a[i], fmt::format("{}.lo[{}]", where, i));
  }
  if (j.contains("hi")) {
    const json& a = array(j["hi"], where + ".hi", d, d);
    for (std::size_t i = 0; i < d; ++i) g.hi[i] = number(a[i], fmt::format("{}.hi[{}]", where, i));
  }
  if (j.contains("periodic")) {
    const json& a = array(j["periodic"], where + ".periodic", d, d);
    for (std::size_t i = 0; i < d; ++i) g.periodic[i] = boolean(a[i], fmt::format("{}.periodic[{}]", where, i));
  }
  try {
    g.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return g;
}

PolyCurve curveFromJson(const json& j, const std::string& where) {
  object(j, where, {"closed", "winding", "residual_max", "length", "points"});
  PolyCurve c;
  if (j.contains("closed")) c.closed = boolean(j["closed"], where + ".closed");
  if (j.contains("winding")) {
    const json& w = array(j["winding"], where + ".winding", 3, 3);
    for (std::size_t i = 0; i < 3; ++i) c.winding[i] = integer(w[i], fmt::format("{}.winding[{}]", where, i));
  }
  if (j.contains("residual_max")) c.residualMax = number(j["residual_max"], where + ".residual_max");
  if (!j.contains("points")) bad(where + ".points", "required");
  const json& pts = array(j["points"], where + ".points", 0, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < pts.size(); ++i)
    c.points.push_back(momentumFromJson(pts[i], fmt::format("{}.points[{}]", where, i)));
  return c;
}

ELSet elsetFromJson(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  const json& root = j.contains("elset") ? j["elset"] : j;
  ELSet s;
  if (!root.contains("curves")) bad(where + ".curves", "required");
  const json& cs = root["curves"];
  if (!cs.is_array()) bad(where + ".curves", "expected an array");
  for (std::size_t i = 0; i < cs.size(); ++i) s.curves.push_back(curveFromJson(cs[i], fmt::format("{}.curves[{}]", where, i)));
  auto points = [&](const char* key, std::vector<Momentum>& out) {
    if (!root.contains(key)) return;
    const json& a = root[key];
    if (!a.is_array()) bad(where + "." + key, "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(momentumFromJson(a[i], fmt::format("{}.{}[{}]", where, key, i)));
  };
  points("isolated_points", s.isolatedPoints);
  points("degeneracy_points", s.degeneracyPoints);
  return s;
}

Plane parseSlice(const std::string& t) {
  std::string s;
  for (char c : t)
    if (c != ' ') s += c;
  if (s == "kz=kx" || s == "kz=+kx") return Plane::kzAlongKx(1.0);
  if (s == "kz=-kx") return Plane::kzAlongKx(-1.0);
  if (s.rfind("kz=", 0) == 0) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s.substr(3), &used);
      if (used == s.size() - 3 && std::isfinite(v)) return Plane::kzConstant(v);
    } catch (const std::exception&) {
    }
  }
  throw Error(Errc::InvalidConfig, fmt::format("slice '{}': expected kz=<value>, kz=kx or kz=-kx", t));
}

GridSpec parseGrid(const std::string& t) {
  std::array<int, 3> n{1, 1, 1};
  int dim = 0;
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (dim == 3) throw Error(Errc::InvalidConfig, fmt::format("grid '{}': at most three axes", t));
    try {
      std::size_t used = 0;
      n[static_cast<std::size_t>(dim)] = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, fmt::format("grid '{}': '{}' is not an integer", t, part));
    }
    ++dim;
  }
  if (dim < 2) throw Error(Errc::InvalidConfig, fmt::format("grid '{}': expected NxN or NxNxN", t));
  GridSpec g = GridSpec::brillouin(dim, n);
  g.validate();
  return g;
}

Section RunConfig::section() const {
  if (!slice) return Section(model);
  if (model.dimension() != 3) throw Error(Errc::InvalidConfig, "slice: only 3D models can be sliced");
  return Section(model, parseSlice(*slice));
}

GridSpec RunConfig::gridOr(int defaultPoints) const {
  const int dim = section().dimension();
  if (grid) {
    if (grid->dim != dim)
      throw Error(Errc::InvalidConfig, fmt::format("grid: {}D grid for a {}D section", grid->dim, dim));
    return *grid;
  }
  return GridSpec::brillouin(dim, defaultPoints);
}

json toJson(const MeasureConfig& m) {
  json j;
  j["expected_total"] = m.expectedTotal;
  j["trials"] = m.trials;
  j["unwrap"] = m.unwrap;
  j["samples"] = m.samples;
  if (m.dxRange) j["dx_range"] = *m.dxRange;
  if (m.line) j["line"] = json::array({toJson((*m.line)[0]), toJson((*m.line)[1])});
  return j;
}

json toJson(const RunConfig& c) {
  json j;
  j["model"] = toJson(c.model);
  if (c.grid) j["grid"] = toJson(*c.grid);
  if (c.slice) j["slice"] = *c.slice;
  j["seed"] = c.seed;
  j["shift_mode"] = to_string(c.shiftMode);
  j["noiseless"] = c.noiseless;
  j["projections"] = c.projections;
  j["measure"] = toJson(c.measure);
  return j;
}

RunConfig configFromJson(const json& top) {
  const json& j = top.is_object() && top.contains("config") && top.contains("outputs") ? top["config"] : top;
  object(j, "config", {"model", "grid", "slice", "seed", "shift_mode", "noiseless", "projections", "measure"});
  RunConfig c;
  if (j.contains("model")) c.model = modelFromJson(j["model"], "config.model");
  if (j.contains("grid")) c.grid = gridFromJson(j["grid"], "config.grid");
  if (j.contains("slice")) {
    c.slice = text(j["slice"], "config.slice");
    try {
      parseSlice(*c.slice);
    } catch (const Error& e) {
      bad("config.slice", e.what());
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("config.seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("shift_mode")) {
    try {
      c.shiftMode = shiftModeFromString(text(j["shift_mode"], "config.shift_mode"));
    } catch (const Error& e) {
      bad("config.shift_mode", e.what());
    }
  }
  if (j.contains("noiseless")) c.noiseless = boolean(j["noiseless"], "config.noiseless");
  if (j.contains("projections")) {
    c.projections = integer(j["projections"], "config.projections");
    if (c.projections < 1) bad("config.projections", "must be at least 1");
  }
  if (j.contains("measure")) {
    const json& m = j["measure"];
    object(m, "config.measure", {"expected_total", "trials", "unwrap", "samples", "dx_range", "line"});
    if (m.contains("expected_total")) {
      c.measure.expectedTotal = number(m["expected_total"], "config.measure.expected_total");
      if (!(c.measure.expectedTotal > 0.0)) bad("config.measure.expected_total", "must be positive");
    }
    if (m.contains("trials")) {
      c.measure.trials = integer(m["trials"], "config.measure.trials");
      if (c.measure.trials < 1) bad("config.measure.trials", "must be at least 1");
    }
    if (m.contains("unwrap")) c.measure.unwrap = boolean(m["unwrap"], "config.measure.unwrap");
    if (m.contains("samples")) {
      c.measure.samples = integer(m["samples"], "config.measure.samples");
      if (c.measure.samples < 1) bad("config.measure.samples", "must be at least 1");
    }
    if (m.contains("dx_range")) {
      const json& a = array(m["dx_range"], "config.measure.dx_range", 2, 2);
      c.measure.dxRange = std::array<double, 2>{number(a[0], "config.measure.dx_range[0]"),
                                                number(a[1], "config.measure.dx_range[1]")};
    }
    if (m.contains("line")) {
      const json& a = array(m["line"], "config.measure.line", 2, 2);
      c.measure.line = std::array<Momentum, 2>{momentumFromJson(a[0], "config.measure.line[0]"),
                                               momentumFromJson(a[1], "config.measure.line[1]")};
    }
  }
  return c;
}

json toJson(const MeasurementBatch& b, const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["model"] = toJson(c.model);
  j["shift_mode"] = to_string(c.shiftMode);
  j["noiseless"] = c.noiseless;
  j["expected_total"] = c.measure.expectedTotal;
  j["trials"] = c.measure.trials;
  j["global_log_lambda"] = b.globalLogLambda;
  j["results"] = json::array();
  for (const auto& r : b.results) {
    json e;
    e["k_index"] = r.kIndex;
    e["k"] = toJson(r.k);
    e["band"] = to_string(r.band);
    e["trial"] = r.trial;
    e["e_prime"] = toJson(r.ePrime);
    e["branch_index"] = r.branchIndex;
    e["e_recovered"] = toJson(r.eRecovered);
    e["d0"] = toJson(r.d0);
    e["stderr"] = r.stderrEstimate;
    e["stderr_imag"] = r.stderrImag;
    e["counts"] = {{"arm", to_string(r.counts.arm)}, {"n_h", r.counts.nH},     {"n_v", r.counts.nV},
                   {"n_plus", r.counts.nPlus},       {"n_r", r.counts.nR},     {"expected_total", r.counts.expectedTotal}};
    e["flags"] = flagsToString(r.flags);
    e["ok"] = r.ok();
    if (!r.message.empty()) e["message"] = r.message;
    j["results"].push_back(e);
  }
  return j;
}

MeasurePath measurePath(const RunConfig& c) {
  const MeasureConfig& m = c.measure;
  const int dim = c.model.dimension();
  MeasurePath p;
  const int n = m.samples;
  auto frac = [n](int i) { return n == 1 ? 0.0 : static_cast<double>(i) / (n - 1); };
  if (m.dxRange || (!m.line && c.model.family == Family::H1)) {
    if (c.model.family != Family::H1) throw Error(Errc::InvalidConfig, "measure.dx_range: only defined for the H1 model");
    const auto [lo, hi] = m.dxRange.value_or(std::array<double, 2>{0.0, 0.5});
    if (lo < 0.0 || hi > 4.0) throw Error(Errc::InvalidConfig, "measure.dx_range: d_x must lie in [0, 4]");
    p.parameterName = "d_x";
    for (int i = 0; i < n; ++i) {
      const double dx = lo + (hi - lo) * frac(i);
      const double k = std::acos(std::clamp(1.0 - 0.5 * dx, -1.0, 1.0));
      p.momenta.emplace_back(k, k);
      p.parameter.push_back(dx);
    }
    return p;
  }
  Momentum a, b;
  if (m.line) {
    a = (*m.line)[0];
    b = (*m.line)[1];
    if (a.dim != dim || b.dim != dim) throw Error(Errc::InvalidConfig, "measure.line: endpoint dimension differs from model");
  } else {
    a = Momentum::fromVec(Vec3(-kPi, 0, 0), dim);
    b = Momentum::fromVec(Vec3(kPi, 0, 0), dim);
  }
  p.parameterName = "s";
  for (int i = 0; i < n; ++i) {
    const double s = frac(i);
    p.momenta.push_back(Momentum::fromVec((1.0 - s) * a.vec() + s * b.vec(), dim));
    p.parameter.push_back(s);
  }
  return p;
}

std::string fieldGridCsv(const FieldGrid& f) {
  const GridSpec& g = f.grid;
  std::string out = g.dim == 3 ? "i,j,l,kx,ky,kz" : "i,j,kx,ky";
  for (auto name : FieldGrid::latticeNames()) out += fmt::format(",{}", name);
  out += '\n';
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.unflatten(idx);
    const Momentum k = g.point(idx);
    if (g.dim == 3)
      out += fmt::format("{},{},{},{},{},{}", ijk[0], ijk[1], ijk[2], formatDouble(k[0]), formatDouble(k[1]), formatDouble(k[2]));
    else
      out += fmt::format("{},{},{},{}", ijk[0], ijk[1], formatDouble(k[0]), formatDouble(k[1]));
    for (auto name : FieldGrid::latticeNames()) out += "," + formatDouble(f.lattice(name)[idx]);
    out += '\n';
  }
  return out;
}

std::string curveCsv(const PolyCurve& c) {
  const int dim = c.points.empty() ? 2 : c.points.front().dim;
  std::string out = dim == 3 ? "index,kx,ky,kz\n" : "index,kx,ky\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    out += fmt::format("{}", i);
    for (int a = 0; a < dim; ++a) out += "," + formatDouble(c.points[i][a]);
    out += '\n';
  }
  return out;
}

std::string fermiCsv(const FermiClassification& f) {
  const int dim = f.grid.dim;
  std::string out = dim == 3 ? "i,j,l,kx,ky,kz,label\n" : "i,j,kx,ky,label\n";
  for (std::size_t c = 0; c < f.labels.size(); ++c) {
    const auto ijk = f.cellIndex(c);
    const Momentum k = f.cellCentre(c);
    for (int a = 0; a < dim; ++a) out += fmt::format("{},", ijk[static_cast<std::size_t>(a)]);
    for (int a = 0; a < dim; ++a) out += formatDouble(k[a]) + ",";
    out += to_string(f.labels[c]);
    out += '\n';
  }
  return out;
}

std::string measurementCsv(const MeasurementBatch& b) {
  std::string out = "k_index,kx,ky,kz,band,trial,re_e,im_e,stderr,stderr_imag,branch,n_h,n_v,n_plus,n_r,arm,flags\n";
  for (const auto& r : b.results) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.kIndex, formatDouble(r.k[0]),
                       formatDouble(r.k[1]), formatDouble(r.k.dim == 3 ? r.k[2] : 0.0), to_string(r.band), r.trial,
                       formatDouble(r.eRecovered.real()), formatDouble(r.eRecovered.imag()), formatDouble(r.stderrEstimate),
                       formatDouble(r.stderrImag), r.branchIndex, r.counts.nH, r.counts.nV, r.counts.nPlus, r.counts.nR,
                       to_string(r.counts.arm), flagsToString(r.flags));
  }
  return out;
}

}  // namespace nhm::io
