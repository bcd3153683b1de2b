#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "nhmetal/el_extract.hpp"
#include "nhmetal/knot.hpp"
#include "oracles.hpp"

using namespace nhm;
using namespace nhm::knot;
using namespace oracle;

namespace {

Poly toOraclePoly(const LaurentPoly& p) {
  Poly r;
  for (auto [k, c] : p.terms()) {
    REQUIRE(k % 2 == 0);
    r[k / 2] = c;
  }
  return r;
}

LaurentPoly poly(std::initializer_list<std::pair<int, long long>> twiceExpCoeff) {
  LaurentPoly p;
  for (auto [k, c] : twiceExpCoeff) p += LaurentPoly::monomial(c, k);
  return p;
}

PolyCurve sampledCurve(const std::function<Vec3(double)>& f, int n = 400) {
  PolyCurve c;
  c.closed = true;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = f(kTwoPi * i / n);
    c.points.emplace_back(v[0], v[1], v[2]);
  }
  c.points.push_back(c.points.front());
  return c;
}

PolyCurve torusCurve(int p, int q, double scale, double phase = 0.0, bool mirror = false) {
  return sampledCurve([=](double t) {
    const double r = 2 + std::cos(q * t + phase);
    return Vec3(scale * r * std::cos(p * t), scale * r * std::sin(p * t), (mirror ? -1 : 1) * scale * std::sin(q * t + phase));
  });
}

const LaurentPoly kTrefoilRight = poly({{2, 1}, {6, 1}, {8, -1}});  // t + t^3 - t^4
const LaurentPoly kHopfPositive = poly({{1, -1}, {5, -1}});         // -t^(1/2) - t^(5/2)
const LaurentPoly kFigureEight = poly({{-4, 1}, {-2, -1}, {0, 1}, {2, -1}, {4, 1}});

}  // namespace

TEST_CASE("laurent polynomial arithmetic") {
  const LaurentPoly a = poly({{2, 1}, {-2, -1}});
  CHECK((a * a) == poly({{4, 1}, {0, -2}, {-4, 1}}));
  CHECK(a.pow(3) == a * a * a);
  CHECK(a.mirrored() == a * -1);
  CHECK((a - a).isZero());
  CHECK(a.shifted(4) == poly({{6, 1}, {2, -1}}));
  CHECK(kTrefoilRight.toString() == "-t^4 + t^3 + t");
  CHECK(kHopfPositive.toString() == "-t^(5/2) - t^(1/2)");
  auto [re, im] = kFigureEight.evaluateAtSqrtMinusOne();
  CHECK(re == 5);
  CHECK(im == 0);
}

TEST_CASE("planar diagram walk") {
  // Standard PD of a trefoil with every crossing positive.
  std::vector<Crossing> xs(3);
  xs[0].pd = {1, 5, 2, 4};
  xs[1].pd = {3, 1, 4, 6};
  xs[2].pd = {5, 3, 6, 2};
  const KnotDiagram d = fromPd(xs);
  CHECK(d.components == 1);
  CHECK(d.writhe() == 3);
  CHECK(d.edgeCount == 6);
  REQUIRE(d.gaussCode.size() == 1);
  CHECK(d.gaussCode[0].size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK((d.gaussCode[0][i] > 0) != (d.gaussCode[0][(i + 1) % 6] > 0));
  CHECK(jones(d) == kTrefoilRight);
  CHECK(toOraclePoly(kauffmanBracket(d)) == bracketOracle(d));

  std::vector<Crossing> broken(1);
  broken[0].pd = {1, 2, 3, 4};
  CHECK_THROWS_AS(fromPd(broken), Error);
}

TEST_CASE("bracket agrees with independent smoothing enumerator") {
  const std::vector<std::pair<int, std::vector<int>>> braids{
      {2, {1}},          {2, {1, -1}},       {2, {1, 1}},         {2, {1, 1, 1}},  {2, {-1, -1, -1}},
      {3, {1, -2, 1, -2}}, {2, {1, 1, 1, 1, 1}}, {3, {1, 2, 1, 2}}, {3, {1, 1, 2, -1, 2}}, {3, {1, 2}},
      {4, {1, 2, 3, 1, 2, 3, 1, 2, 3}}, {3, {}},
  };
  for (const auto& [strands, word] : braids) {
    const KnotDiagram d = braidClosure(strands, word);
    CAPTURE(d.gaussNotation());
    CHECK(toOraclePoly(kauffmanBracket(d)) == bracketOracle(d));
    CHECK(kauffmanBracket(d) == knot::serial::kauffmanBracket(d));
  }
}

TEST_CASE("curls change writhe but not the Jones polynomial") {
  const KnotDiagram curl = braidClosure(2, std::vector<int>{1});
  CHECK(curl.components == 1);
  CHECK(curl.writhe() == 1);
  CHECK(kauffmanBracket(curl) == LaurentPoly::monomial(-1, 6));
  CHECK(jones(curl) == LaurentPoly::constant(1));
  const KnotDiagram neg = braidClosure(2, std::vector<int>{-1});
  CHECK(neg.writhe() == -1);
  CHECK(jones(neg) == LaurentPoly::constant(1));
  const KnotDiagram r2 = braidClosure(2, std::vector<int>{1, -1});
  CHECK(r2.writhe() == 0);
  CHECK(r2.components == 2);
  CHECK(kauffmanBracket(r2) == poly({{4, -1}, {-4, -1}}));

  const KnotDiagram tref = braidClosure(2, std::vector<int>{1, 1, 1});
  const KnotDiagram trefCurl = braidClosure(3, std::vector<int>{1, 1, 1, 2});
  CHECK(trefCurl.writhe() == tref.writhe() + 1);
  CHECK(jones(trefCurl) == jones(tref));
}

TEST_CASE("known Jones polynomials and determinants") {
  const KnotDiagram tref = braidClosure(2, std::vector<int>{1, 1, 1});
  CHECK(jones(tref) == kTrefoilRight);
  CHECK(determinant(jones(tref)) == 3);
  const KnotDiagram hopf = braidClosure(2, std::vector<int>{1, 1});
  CHECK(hopf.components == 2);
  CHECK(jones(hopf) == kHopfPositive);
  CHECK(determinant(jones(hopf)) == 2);
  const KnotDiagram fig8 = braidClosure(3, std::vector<int>{1, -2, 1, -2});
  CHECK(jones(fig8) == kFigureEight);
  CHECK(determinant(jones(fig8)) == 5);
  const KnotDiagram unlink = braidClosure(2, std::vector<int>{});
  CHECK(unlink.components == 2);
  CHECK(unlink.freeLoops == 2);
  CHECK(jones(unlink) == poly({{1, -1}, {-1, -1}}));
  CHECK(determinant(jones(unlink)) == 0);
}

TEST_CASE("mirror image inverts t") {
  for (const auto& word : {std::vector<int>{1, 1, 1}, std::vector<int>{1, 1}, std::vector<int>{1, 1, 1, 1, 1},
                           std::vector<int>{1, -2, 1, -2}, std::vector<int>{1, 2, 1, 2}}) {
    const KnotDiagram d = braidClosure(word.size() == 4 ? 3 : 2, word);
    const KnotDiagram m = mirrorDiagram(d);
    CHECK(m.writhe() == -d.writhe());
    CHECK(jones(m) == jones(d).mirrored());
  }
}

TEST_CASE("diagram linking numbers") {
  const auto lk = diagramLinking(braidClosure(2, std::vector<int>{1, 1}));
  CHECK(lk[0][1] == 1);
  CHECK(lk[1][0] == 1);
  const auto lk2 = diagramLinking(braidClosure(2, std::vector<int>{-1, -1, -1, -1}));
  CHECK(lk2[0][1] == -2);
}

TEST_CASE("state-sum budget") {
  const KnotDiagram big = braidClosure(2, std::vector<int>(25, 1));
  try {
    kauffmanBracket(big);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooManyCrossings);
  }
}

TEST_CASE("parallel state sum matches serial on a large diagram") {
  const KnotDiagram d = braidClosure(3, std::vector<int>{1, 2, 1, 2, -1, 2, 1, 2, 1, -2, 1, 2, 1, 2});
  REQUIRE(d.crossings.size() >= 12);
  CHECK(kauffmanBracket(d) == knot::serial::kauffmanBracket(d));
  CHECK(toOraclePoly(kauffmanBracket(d)) == bracketOracle(d));
}

TEST_CASE("torus table") {
  const auto& table = torusTable();
  bool trefoil = false, hopf = false;
  for (const auto& e : table) {
    if (e.type == KnotType::Trefoil) {
      trefoil = true;
      CHECK(e.jones == kTrefoilRight);
    }
    if (e.type == KnotType::HopfLink) {
      hopf = true;
      CHECK(e.jones == kHopfPositive);
    }
  }
  CHECK(trefoil);
  CHECK(hopf);
}

TEST_CASE("Gauss linking integral on the Hopf fixture") {
  const PolyCurve a = sampledCurve([](double t) { return Vec3(std::cos(t), std::sin(t), 0); });
  const PolyCurve b = sampledCurve([](double t) { return Vec3(1 + std::cos(t), 0, std::sin(t)); });
  CHECK(gaussLinkingIntegral(a, b) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(gaussLinkingIntegral(b, a) == doctest::Approx(-1.0).epsilon(1e-9));
  std::mt19937_64 rng(1);
  CHECK(linkingNumber(a, b, rng) == -1);

  const PolyCurve far = sampledCurve([](double t) { return Vec3(0.5 * std::cos(t), 0, 2.5 + 0.5 * std::sin(t)); });
  CHECK(std::abs(gaussLinkingIntegral(a, far)) < 1e-9);
  CHECK(linkingNumber(a, far, rng) == 0);
}

TEST_CASE("planar circle is the unknot") {
  const PolyCurve c = sampledCurve([](double t) { return Vec3(std::cos(t), std::sin(t), 0.1 * std::sin(2 * t)); });
  const KnotReport r = classify(std::span<const PolyCurve>(&c, 1));
  CHECK(r.identifiedAs == KnotType::Unknot);
  CHECK(r.determinant == 1);
  CHECK(r.label() == "UNKNOT");
}

TEST_CASE("parametric torus knots classify, mirror flips chirality") {
  const PolyCurve t = torusCurve(2, 3, 0.5);
  const KnotReport r = classify(std::span<const PolyCurve>(&t, 1));
  CHECK(r.identifiedAs == KnotType::Trefoil);
  CHECK(r.determinant == 3);
  CHECK(r.gaussCodes.size() == 3);
  const PolyCurve m = torusCurve(2, 3, 0.5, 0.0, true);
  const KnotReport rm = classify(std::span<const PolyCurve>(&m, 1));
  CHECK(rm.identifiedAs == KnotType::Trefoil);
  CHECK(rm.jones == r.jones.mirrored());
  CHECK(rm.chirality != r.chirality);

  const PolyCurve c5 = torusCurve(2, 5, 0.5);
  const KnotReport r5 = classify(std::span<const PolyCurve>(&c5, 1));
  CHECK(r5.identifiedAs == KnotType::Torus);
  CHECK(r5.determinant == 5);
}

TEST_CASE("classification of traced model lines") {
  const GridSpec g = GridSpec::brillouin(3, 61);
  const ELSet tref = extractEl3d(Section(ModelSpec::knot(3, 2)), g);
  const KnotReport rt = classify(tref.curves);
  CHECK(rt.label() == "TREFOIL");
  CHECK(rt.determinant == 3);
  const ELSet hopf = extractEl3d(Section(ModelSpec::knot(2, 2)), g);
  const KnotReport rh = classify(hopf.curves);
  CHECK(rh.label() == "HOPF_LINK");
  CHECK(rh.componentCount == 2);
  CHECK(std::abs(rh.pairwiseLinking[0][1]) == 1);
  CHECK(rh.determinant == 2);
}

TEST_CASE("projection preconditions") {
  PolyCurve open;
  open.points = {Momentum(0, 0, 0), Momentum(1, 0, 0), Momentum(1, 1, 0)};
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(project(std::span<const PolyCurve>(&open, 1), Vec3(0, 0, 1), rng), Error);
  const auto pts = simplifyClosed({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1e-6, 0), Vec3(2, 2, 0), Vec3(0, 0, 0)}, 1e-3);
  CHECK(pts.size() == 4);
}
