#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "nhmetal/knot.hpp"

namespace nhm::knot {

int KnotDiagram::writhe() const {
  int w = 0;
  for (const auto& c : crossings) w += c.sign;
  return w;
}

std::string KnotDiagram::gaussNotation() const {
  std::string out;
  for (std::size_t k = 0; k < gaussCode.size(); ++k) {
    if (k) out += " | ";
    for (std::size_t i = 0; i < gaussCode[k].size(); ++i) out += fmt::format("{}{}", i ? " " : "", gaussCode[k][i]);
  }
  out += " ; signs";
  for (const auto& c : crossings) out += c.sign > 0 ? " +" : " -";
  return out;
}

KnotDiagram fromPd(std::vector<Crossing> crossings, int freeLoops) {
  std::vector<int> labels;
  for (const auto& c : crossings) labels.insert(labels.end(), c.pd.begin(), c.pd.end());
  std::vector<int> uniq = labels;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  auto dense = [&](int e) { return static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), e) - uniq.begin()); };
  for (auto& c : crossings)
    for (int& e : c.pd) e = dense(e);
  const int edges = static_cast<int>(uniq.size());

  // head[e]: crossing where edge e ends, and whether it arrives on the over strand.
  std::vector<int> headX(static_cast<std::size_t>(edges), -1), headOver(static_cast<std::size_t>(edges), 0);
  std::vector<int> uses(static_cast<std::size_t>(edges), 0);
  for (std::size_t x = 0; x < crossings.size(); ++x) {
    const auto& c = crossings[x];
    for (int e : c.pd) ++uses[static_cast<std::size_t>(e)];
    headX[static_cast<std::size_t>(c.pd[0])] = static_cast<int>(x);
    headOver[static_cast<std::size_t>(c.pd[0])] = 0;
    headX[static_cast<std::size_t>(c.overIn())] = static_cast<int>(x);
    headOver[static_cast<std::size_t>(c.overIn())] = 1;
  }
  for (int e = 0; e < edges; ++e)
    if (uses[static_cast<std::size_t>(e)] != 2 || headX[static_cast<std::size_t>(e)] < 0)
      throw Error(Errc::InvalidConfig, fmt::format("PD edge {} is not used exactly twice", e));

  KnotDiagram d;
  d.crossings = std::move(crossings);
  d.edgeCount = edges;
  std::vector<char> seen(static_cast<std::size_t>(edges), 0);
  for (int start = 0; start < edges; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    const int comp = static_cast<int>(d.gaussCode.size());
    std::vector<int> code;
    int e = start;
    do {
      seen[static_cast<std::size_t>(e)] = 1;
      const int x = headX[static_cast<std::size_t>(e)];
      auto& c = d.crossings[static_cast<std::size_t>(x)];
      if (headOver[static_cast<std::size_t>(e)]) {
        code.push_back(x + 1);
        c.overStrand = comp;
        e = c.overOut();
      } else {
        code.push_back(-(x + 1));
        c.underStrand = comp;
        e = c.pd[2];
      }
    } while (e != start);
    d.gaussCode.push_back(std::move(code));
  }
  d.freeLoops = freeLoops;
  for (int i = 0; i < freeLoops; ++i) d.gaussCode.emplace_back();
  d.components = static_cast<int>(d.gaussCode.size());
  return d;
}

KnotDiagram braidClosure(int strands, std::span<const int> word) {
  std::vector<int> initial(static_cast<std::size_t>(strands));
  std::iota(initial.begin(), initial.end(), 0);
  std::vector<int> pos = initial;
  int next = strands;
  std::vector<Crossing> xs;
  for (int g : word) {
    const int i = std::abs(g) - 1;
    if (g == 0 || i + 1 >= strands) throw Error(Errc::InvalidConfig, "braid generator out of range");
    const int left = pos[static_cast<std::size_t>(i)], right = pos[static_cast<std::size_t>(i + 1)];
    const int outL = next++, outR = next++;
    Crossing c;
    if (g > 0) {
      // left strand over: SE (under in), NE (over out), NW (under out), SW (over in)
      c.pd = {right, outR, outL, left};
      c.sign = 1;
    } else {
      // right strand over: SW (under in), SE (over in), NE (under out), NW (over out)
      c.pd = {left, right, outR, outL};
      c.sign = -1;
    }
    pos[static_cast<std::size_t>(i)] = outL;
    pos[static_cast<std::size_t>(i + 1)] = outR;
    xs.push_back(c);
  }
  // Closing arcs identify the top of each position with its bottom.
  std::vector<int> alias(static_cast<std::size_t>(next));
  std::iota(alias.begin(), alias.end(), 0);
  int free = 0;
  for (int p = 0; p < strands; ++p) {
    const auto u = static_cast<std::size_t>(p);
    if (pos[u] == initial[u]) {
      ++free;
    } else {
      alias[static_cast<std::size_t>(pos[u])] = initial[u];
    }
  }
  for (auto& c : xs)
    for (int& e : c.pd) e = alias[static_cast<std::size_t>(e)];
  return fromPd(std::move(xs), free);
}

KnotDiagram mirrorDiagram(const KnotDiagram& d) {
  std::vector<Crossing> xs = d.crossings;
  for (auto& c : xs) {
    const auto [a, b, cc, dd] = c.pd;
    c.pd = c.sign > 0 ? std::array<int, 4>{dd, a, b, cc} : std::array<int, 4>{b, cc, dd, a};
    c.sign = -c.sign;
  }
  return fromPd(std::move(xs), d.freeLoops);
}

namespace {

double pointSegmentDistance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

void douglasPeucker(const std::vector<Vec3>& pts, std::size_t lo, std::size_t hi, double tol,
                    std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t at = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = pointSegmentDistance(pts[i], pts[lo], pts[hi]);
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst > tol) {
    keep[at] = 1;
    douglasPeucker(pts, lo, at, tol, keep);
    douglasPeucker(pts, at, hi, tol, keep);
  }
}

}  // namespace

std::vector<Vec3> simplifyClosed(const std::vector<Vec3>& pts, double tol) {
  if (pts.size() < 5 || tol <= 0.0) return pts;
  const std::size_t last = pts.size() - 1;
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < last; ++i) {
    const double d = (pts[i] - pts[0]).norm();
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<char> keep(pts.size(), 0);
  keep[0] = keep[far] = keep[last] = 1;
  douglasPeucker(pts, 0, far, tol, keep);
  douglasPeucker(pts, far, last, tol, keep);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(pts[i]);
  // Keep at least a triangle so the loop stays a loop.
  if (out.size() < 4) return pts;
  return out;
}

namespace {

struct Passage {
  int seg;
  double param;
  int crossing;
  bool over;
};

struct RawCrossing {
  int compA, segA, compB, segB;
  double sA, sB;
  Eigen::Vector2d where;
};

class NotGeneric : public std::exception {};

// One projection attempt; throws NotGeneric when the view is degenerate.
KnotDiagram projectOnce(const std::vector<std::vector<Vec3>>& comps, const Vec3& u, const ProjectionOptions& opt) {
  Vec3 e1 = std::abs(u[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (e1 - e1.dot(u) * u).normalized();
  const Vec3 e2 = u.cross(e1);  // e1 x e2 = u points at the viewer

  struct Seg {
    int comp, index;
    Eigen::Vector2d p, r;
    double z0, dz;
    Eigen::Vector2d lo, hi;
  };
  std::vector<Seg> segs;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& pts = comps[c];
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Seg s;
      s.comp = static_cast<int>(c);
      s.index = static_cast<int>(i);
      const Eigen::Vector2d a(pts[i].dot(e1), pts[i].dot(e2));
      const Eigen::Vector2d b(pts[i + 1].dot(e1), pts[i + 1].dot(e2));
      s.p = a;
      s.r = b - a;
      s.z0 = pts[i].dot(u);
      s.dz = pts[i + 1].dot(u) - s.z0;
      s.lo = a.cwiseMin(b);
      s.hi = a.cwiseMax(b);
      segs.push_back(s);
    }
  }

  std::vector<RawCrossing> raw;
  std::vector<std::vector<Passage>> passages(comps.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Seg& A = segs[i];
      const Seg& B = segs[j];
      if (A.comp == B.comp) {
        const int n = static_cast<int>(comps[static_cast<std::size_t>(A.comp)].size()) - 1;
        const int gap = std::abs(A.index - B.index);
        if (gap <= 1 || gap == n - 1) continue;  // neighbours share a vertex
      }
      if ((A.lo.array() > B.hi.array()).any() || (B.lo.array() > A.hi.array()).any()) continue;
      const double den = A.r.x() * B.r.y() - A.r.y() * B.r.x();
      const double scale = A.r.norm() * B.r.norm();
      const Eigen::Vector2d w = B.p - A.p;
      if (std::abs(den) <= opt.minSinAngle * scale) {
        // Parallel in projection: only a problem when they overlap.
        const double off = std::abs(w.x() * A.r.y() - w.y() * A.r.x()) / std::max(A.r.norm(), 1e-300);
        if (off < opt.minDepthGap + 1e-9) throw NotGeneric();
        continue;
      }
      const double s = (w.x() * B.r.y() - w.y() * B.r.x()) / den;
      const double t = (w.x() * A.r.y() - w.y() * A.r.x()) / den;
      const double e = opt.paramTol;
      if (s < -e || s > 1.0 + e || t < -e || t > 1.0 + e) continue;
      if (s < e || s > 1.0 - e || t < e || t > 1.0 - e) throw NotGeneric();  // vertex grazing
      const double za = A.z0 + s * A.dz, zb = B.z0 + t * B.dz;
      if (std::abs(za - zb) < opt.minDepthGap) throw NotGeneric();
      const int id = static_cast<int>(raw.size());
      raw.push_back({A.comp, A.index, B.comp, B.index, s, t, A.p + s * A.r});
      const bool aOver = za > zb;
      passages[static_cast<std::size_t>(A.comp)].push_back({A.index, s, id, aOver});
      passages[static_cast<std::size_t>(B.comp)].push_back({B.index, t, id, !aOver});
    }
  }
  for (std::size_t a = 0; a < raw.size(); ++a)
    for (std::size_t b = a + 1; b < raw.size(); ++b)
      if ((raw[a].where - raw[b].where).norm() < opt.minDepthGap) throw NotGeneric();  // triple point

  // Label edges between consecutive passages along each component.
  struct Ends {
    int underIn = -1, underOut = -1, overIn = -1, overOut = -1;
  };
  std::vector<Ends> ends(raw.size());
  int offset = 0, free = 0;
  for (auto& ps : passages) {
    if (ps.empty()) {
      ++free;
      continue;
    }
    std::sort(ps.begin(), ps.end(), [](const Passage& x, const Passage& y) {
      return x.seg != y.seg ? x.seg < y.seg : x.param < y.param;
    });
    const int m = static_cast<int>(ps.size());
    for (int k = 0; k < m; ++k) {
      const Passage& p = ps[static_cast<std::size_t>(k)];
      const int in = offset + (k + m - 1) % m, out = offset + k;
      auto& en = ends[static_cast<std::size_t>(p.crossing)];
      (p.over ? en.overIn : en.underIn) = in;
      (p.over ? en.overOut : en.underOut) = out;
    }
    offset += m;
  }

  std::vector<Crossing> xs;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const RawCrossing& rc = raw[i];
    const auto& en = ends[i];
    // Recover the 2D directions of the over and under strands.
    auto dir = [&](int comp, int seg) {
      for (const auto& s : segs)
        if (s.comp == comp && s.index == seg) return s.r;
      return Eigen::Vector2d(0, 0);
    };
    const Eigen::Vector2d ra = dir(rc.compA, rc.segA), rb = dir(rc.compB, rc.segB);
    const bool aOver = [&] {
      for (const auto& p : passages[static_cast<std::size_t>(rc.compA)])
        if (p.crossing == static_cast<int>(i) && p.seg == rc.segA) return p.over;
      return false;
    }();
    const Eigen::Vector2d over = aOver ? ra : rb, under = aOver ? rb : ra;
    Crossing c;
    c.sign = (over.x() * under.y() - over.y() * under.x()) > 0.0 ? 1 : -1;
    c.pd = c.sign > 0 ? std::array<int, 4>{en.underIn, en.overOut, en.underOut, en.overIn}
                      : std::array<int, 4>{en.underIn, en.overIn, en.underOut, en.overOut};
    xs.push_back(c);
  }
  return fromPd(std::move(xs), free);
}

}  // namespace

KnotDiagram project(std::span<const PolyCurve> curves, const Vec3& direction, std::mt19937_64& rng,
                    const ProjectionOptions& opt, Vec3* usedDirection) {
  std::vector<std::vector<Vec3>> comps;
  for (const auto& c : curves) {
    if (!c.closed || c.points.size() < 4) throw Error(Errc::InvalidConfig, "projection needs closed curves");
    if (!c.contractible()) throw Error(Errc::Unsupported, "curve winds around the Brillouin torus");
    std::vector<Vec3> pts;
    pts.reserve(c.points.size());
    for (const auto& p : c.points) pts.push_back(p.vec());
    comps.push_back(simplifyClosed(pts, opt.simplifyTol));
  }
  // Place all components in one periodic image so their relative geometry is kept.
  for (std::size_t c = 1; c < comps.size(); ++c) {
    Vec3 shift;
    for (int i = 0; i < 3; ++i) shift[i] = kTwoPi * std::round((comps[0][0][i] - comps[c][0][i]) / kTwoPi);
    for (auto& p : comps[c]) p += shift;
  }

  Vec3 u = direction.normalized();
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt <= opt.maxRetries; ++attempt) {
    try {
      KnotDiagram d = projectOnce(comps, u, opt);
      if (usedDirection) *usedDirection = u;
      return d;
    } catch (const NotGeneric&) {
      u = (u + 0.05 * Vec3(gauss(rng), gauss(rng), gauss(rng))).normalized();
    }
  }
  throw Error(Errc::NoGenericProjection, fmt::format("no generic view after {} retries", opt.maxRetries));
}

}  // namespace nhm::knot
