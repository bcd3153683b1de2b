#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <omp.h>

#include "nhmetal/knot.hpp"

namespace nhm::knot {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {}
  void reset() { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  // Returns true when two separate classes were merged.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

// counts[(nA - nB + n) * stride + loops]
struct StateHistogram {
  int n = 0, stride = 0;
  std::vector<long long> counts;
  StateHistogram(int crossings, int maxLoops)
      : n(crossings), stride(maxLoops + 1), counts(static_cast<std::size_t>((2 * crossings + 1) * (maxLoops + 1)), 0) {}
  void add(int balance, int loops) { ++counts[static_cast<std::size_t>((balance + n) * stride + loops)]; }
};

int stateLoops(const KnotDiagram& d, std::uint64_t state, UnionFind& uf) {
  uf.reset();
  int classes = d.edgeCount;
  for (std::size_t x = 0; x < d.crossings.size(); ++x) {
    const auto& p = d.crossings[x].pd;
    if ((state >> x) & 1u) {  // B smoothing
      classes -= uf.unite(p[0], p[3]);
      classes -= uf.unite(p[1], p[2]);
    } else {
      classes -= uf.unite(p[0], p[1]);
      classes -= uf.unite(p[2], p[3]);
    }
  }
  return classes + d.freeLoops;
}

LaurentPoly delta() { return LaurentPoly::monomial(-1, 4) + LaurentPoly::monomial(-1, -4); }

LaurentPoly fromHistogram(const StateHistogram& h) {
  std::vector<LaurentPoly> deltaPow{LaurentPoly::constant(1)};
  LaurentPoly out;
  for (int b = -h.n; b <= h.n; ++b) {
    for (int loops = 1; loops < h.stride; ++loops) {
      const long long c = h.counts[static_cast<std::size_t>((b + h.n) * h.stride + loops)];
      if (c == 0) continue;
      while (static_cast<int>(deltaPow.size()) < loops) deltaPow.push_back(deltaPow.back() * delta());
      out += deltaPow[static_cast<std::size_t>(loops - 1)].shifted(2 * b) * c;
    }
  }
  return out;
}

void checkBudget(const KnotDiagram& d) {
  if (d.crossings.size() > static_cast<std::size_t>(kMaxStateSumCrossings))
    throw Error(Errc::TooManyCrossings,
                fmt::format("{} crossings exceed the state-sum budget of {}", d.crossings.size(), kMaxStateSumCrossings));
}

}  // namespace

LaurentPoly serial::kauffmanBracket(const KnotDiagram& d) {
  checkBudget(d);
  const int n = static_cast<int>(d.crossings.size());
  StateHistogram h(n, d.edgeCount + d.freeLoops);
  UnionFind uf(std::max(d.edgeCount, 1));
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t s = 0; s < states; ++s) {
    const int nb = std::popcount(s);
    h.add(n - 2 * nb, stateLoops(d, s, uf));
  }
  return fromHistogram(h);
}

LaurentPoly kauffmanBracket(const KnotDiagram& d) {
  checkBudget(d);
  const int n = static_cast<int>(d.crossings.size());
  if (n < 12) return serial::kauffmanBracket(d);
  StateHistogram total(n, d.edgeCount + d.freeLoops);
  const auto states = static_cast<long long>(std::uint64_t{1} << n);
#pragma omp parallel
  {
    StateHistogram local(n, d.edgeCount + d.freeLoops);
    UnionFind uf(d.edgeCount);
#pragma omp for schedule(static)
    for (long long s = 0; s < states; ++s) {
      const auto u = static_cast<std::uint64_t>(s);
      local.add(n - 2 * std::popcount(u), stateLoops(d, u, uf));
    }
#pragma omp critical
    for (std::size_t i = 0; i < total.counts.size(); ++i) total.counts[i] += local.counts[i];
  }
  return fromHistogram(total);
}

LaurentPoly jones(const KnotDiagram& d) {
  const int w = d.writhe();
  // (-A^3)^(-w)
  LaurentPoly norm = LaurentPoly::monomial(w % 2 == 0 ? 1 : -1, -6 * w);
  const LaurentPoly inA = norm * kauffmanBracket(d);
  LaurentPoly out;
  for (const auto& [key, c] : inA.terms()) {
    // A^e with e = key/2 maps to t^{-e/4}, doubled key -e/2.
    if (key % 4 != 0) throw Error(Errc::Unsupported, "bracket exponents incompatible with t = A^-4");
    out += LaurentPoly::monomial(c, -key / 4);
  }
  return out;
}

long long determinant(const LaurentPoly& jonesPoly) {
  const auto [re, im] = jonesPoly.evaluateAtSqrtMinusOne();
  return std::llround(std::hypot(static_cast<double>(re), static_cast<double>(im)));
}

std::vector<std::vector<int>> diagramLinking(const KnotDiagram& d) {
  const auto n = static_cast<std::size_t>(d.components);
  std::vector<std::vector<int>> twice(n, std::vector<int>(n, 0));
  for (const auto& c : d.crossings) {
    if (c.overStrand == c.underStrand) continue;
    twice[static_cast<std::size_t>(c.overStrand)][static_cast<std::size_t>(c.underStrand)] += c.sign;
    twice[static_cast<std::size_t>(c.underStrand)][static_cast<std::size_t>(c.overStrand)] += c.sign;
  }
  for (auto& row : twice)
    for (int& v : row) v /= 2;
  return twice;
}

namespace {

std::vector<Vec3> unwrappedPoints(const PolyCurve& c) {
  std::vector<Vec3> pts;
  pts.reserve(c.points.size());
  for (const auto& p : c.points) pts.push_back(p.vec());
  return pts;
}

// Moves b into the periodic image nearest to a.
void alignImage(const std::vector<Vec3>& a, std::vector<Vec3>& b) {
  Vec3 shift;
  for (int i = 0; i < 3; ++i) shift[i] = kTwoPi * std::round((a[0][i] - b[0][i]) / kTwoPi);
  for (auto& p : b) p += shift;
}

}  // namespace

double gaussLinkingIntegral(const PolyCurve& a, const PolyCurve& b) {
  const std::vector<Vec3> pa = unwrappedPoints(a);
  std::vector<Vec3> pb = unwrappedPoints(b);
  alignImage(pa, pb);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pa.size(); ++i) {
    for (std::size_t j = 0; j + 1 < pb.size(); ++j) {
      const Vec3 &p1 = pa[i], &p2 = pa[i + 1], &p3 = pb[j], &p4 = pb[j + 1];
      const Vec3 r12 = p2 - p1, r34 = p4 - p3, r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;
      Vec3 n[4] = {r13.cross(r14), r14.cross(r24), r24.cross(r23), r23.cross(r13)};
      bool degenerate = false;
      for (auto& v : n) {
        const double l = v.norm();
        if (l < 1e-300) {
          degenerate = true;
          break;
        }
        v /= l;
      }
      if (degenerate) continue;
      double omega = 0.0;
      for (int k = 0; k < 4; ++k) omega += std::asin(std::clamp(n[k].dot(n[(k + 1) % 4]), -1.0, 1.0));
      const double s = r34.cross(r12).dot(r13);
      total += s > 0 ? omega : (s < 0 ? -omega : 0.0);
    }
  }
  return total / (4.0 * kPi);
}

int linkingNumber(const PolyCurve& a, const PolyCurve& b, std::mt19937_64& rng, const ProjectionOptions& opt) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 u = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
  const PolyCurve pair[2] = {a, b};
  const KnotDiagram d = project(pair, u, rng, opt);
  const int lk = diagramLinking(d)[0][1];
  const double g = gaussLinkingIntegral(a, b);
  if (std::abs(g - lk) > 0.25)
    throw Error(Errc::MethodDisagreement, fmt::format("crossing count gives {}, Gauss integral {:.6f}", lk, g));
  return lk;
}

const char* to_string(KnotType t) noexcept {
  switch (t) {
    case KnotType::Unknot: return "UNKNOT";
    case KnotType::Trefoil: return "TREFOIL";
    case KnotType::HopfLink: return "HOPF_LINK";
    case KnotType::Torus: return "TORUS";
    case KnotType::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

const char* to_string(Chirality c) noexcept {
  switch (c) {
    case Chirality::Left: return "LEFT";
    case Chirality::Right: return "RIGHT";
    case Chirality::NotApplicable: return "N/A";
  }
  return "N/A";
}

const std::vector<TorusEntry>& torusTable() {
  static const std::vector<TorusEntry> table = [] {
    std::vector<TorusEntry> t;
    auto add = [&](int p, int q, int strands, std::vector<int> word) {
      TorusEntry e;
      e.p = p;
      e.q = q;
      e.type = (p == 3 && q == 2) ? KnotType::Trefoil : (p == 2 && q == 2) ? KnotType::HopfLink : KnotType::Torus;
      e.jones = jones(braidClosure(strands, word));
      t.push_back(std::move(e));
    };
    for (int n = 2; n <= 7; ++n) {
      // T(2,3) is reported as (3,2) to match the trefoil model exponents.
      add(n == 3 ? 3 : 2, n == 3 ? 2 : n, 2, std::vector<int>(static_cast<std::size_t>(n), 1));
    }
    for (int q : {4, 5}) {
      std::vector<int> w;
      for (int i = 0; i < q; ++i) w.insert(w.end(), {1, 2});
      add(3, q, 3, w);
    }
    return t;
  }();
  return table;
}

std::string KnotReport::label() const {
  if (identifiedAs == KnotType::Torus) return fmt::format("TORUS({},{})", torusP, torusQ);
  return to_string(identifiedAs);
}

KnotReport classify(std::span<const PolyCurve> curves, const ClassifyOptions& opt) {
  if (curves.empty()) throw Error(Errc::InvalidConfig, "no curves to classify");
  if (opt.projections < 1) throw Error(Errc::InvalidConfig, "at least one projection is required");
  KnotReport r;
  r.componentCount = static_cast<int>(curves.size());
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  KnotDiagram first;
  for (int i = 0; i < opt.projections; ++i) {
    const Vec3 u = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    Vec3 used;
    KnotDiagram d = project(curves, u, rng, opt.projection, &used);
    LaurentPoly v = jones(d);
    if (i == 0) {
      r.jones = v;
      first = d;
    } else if (!(v == r.jones)) {
      throw Error(Errc::MethodDisagreement,
                  fmt::format("Jones differs between projections: {} vs {}", r.jones.toString(), v.toString()));
    }
    r.gaussCodes.push_back(d.gaussNotation());
    r.directions.push_back(used);
  }
  r.determinant = determinant(r.jones);

  r.pairwiseLinking = diagramLinking(first);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const double g = gaussLinkingIntegral(curves[i], curves[j]);
      if (std::abs(g - r.pairwiseLinking[i][j]) > 0.25)
        throw Error(Errc::MethodDisagreement,
                    fmt::format("components {} and {}: crossing count gives {}, Gauss integral {:.6f}", i, j,
                                r.pairwiseLinking[i][j], g));
    }
  }

  if (r.componentCount == 1 && r.jones == LaurentPoly::constant(1)) {
    r.identifiedAs = KnotType::Unknot;
    return r;
  }
  for (const auto& e : torusTable()) {
    const bool direct = r.jones == e.jones;
    if (!direct && !(r.jones == e.jones.mirrored())) continue;
    r.identifiedAs = e.type;
    r.torusP = e.p;
    r.torusQ = e.q;
    // Positive braid closures are right-handed.
    r.chirality = direct ? Chirality::Right : Chirality::Left;
    break;
  }
  return r;
}

}  // namespace nhm::knot
