#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nhmetal/curves.hpp"
#include "nhmetal/laurent.hpp"

namespace nhm::knot {

/// Planar-diagram crossing. a/c are the incoming/outgoing under edges and
/// (a, b, c, d) run counterclockwise; the over strand runs d -> b when
/// sign = +1 and b -> d when sign = -1.
struct Crossing {
  std::array<int, 4> pd{};
  int sign = 1;
  int overStrand = 0;   // component index
  int underStrand = 0;  // component index

  int overIn() const { return sign > 0 ? pd[3] : pd[1]; }
  int overOut() const { return sign > 0 ? pd[1] : pd[3]; }
};

struct KnotDiagram {
  std::vector<Crossing> crossings;
  /// Per component: +(i+1) when passing over crossing i, -(i+1) when under.
  std::vector<std::vector<int>> gaussCode;
  int components = 0;
  int freeLoops = 0;  // components without any crossing
  int edgeCount = 0;

  int writhe() const;
  /// Gauss code as "1 -2 3 -1 2 -3 | ..." with crossing signs appended.
  std::string gaussNotation() const;
};

/// Builds a diagram from PD crossings with edges labeled 0..E-1, deriving
/// components and Gauss codes by walking the strands.
KnotDiagram fromPd(std::vector<Crossing> crossings, int freeLoops = 0);

/// Closure of a braid word; generator +i (-i) is sigma_i (its inverse), 1-based.
KnotDiagram braidClosure(int strands, std::span<const int> word);

/// Flips every crossing (mirror image).
KnotDiagram mirrorDiagram(const KnotDiagram& d);

struct ProjectionOptions {
  double simplifyTol = 1e-3;  // Douglas-Peucker tolerance in k units
  int maxRetries = 20;
  double paramTol = 1e-9;     // vertex-grazing guard on segment parameters
  double minSinAngle = 1e-6;  // near-tangential crossing guard
  double minDepthGap = 1e-9;  // strands must be separated along the view axis
};

/// Orthographic projection of closed curves along `direction`. Non-generic
/// views are retried with a seeded perturbed direction.
KnotDiagram project(std::span<const PolyCurve> curves, const Vec3& direction, std::mt19937_64& rng,
                    const ProjectionOptions& opt = {}, Vec3* usedDirection = nullptr);

/// Douglas-Peucker on a closed polyline (last point == first point).
std::vector<Vec3> simplifyClosed(const std::vector<Vec3>& pts, double tol);

/// Kauffman bracket <D> in A, normalized to <O> = 1. Budget: 24 crossings.
LaurentPoly kauffmanBracket(const KnotDiagram& d);
namespace serial {
LaurentPoly kauffmanBracket(const KnotDiagram& d);
}  // namespace serial

inline constexpr int kMaxStateSumCrossings = 24;

/// Jones polynomial in t (half-integer exponents for even component counts).
LaurentPoly jones(const KnotDiagram& d);

/// |V(-1)| with t^{1/2} = i.
long long determinant(const LaurentPoly& jonesPoly);

/// Pairwise linking numbers from inter-component crossing signs.
std::vector<std::vector<int>> diagramLinking(const KnotDiagram& d);

/// Gauss double integral over two closed polylines (exact per segment pair).
double gaussLinkingIntegral(const PolyCurve& a, const PolyCurve& b);

/// Crossing-count linking number, cross-checked against the Gauss integral.
int linkingNumber(const PolyCurve& a, const PolyCurve& b, std::mt19937_64& rng, const ProjectionOptions& opt = {});

enum class KnotType { Unknot, Trefoil, HopfLink, Torus, Unknown };
enum class Chirality { Left, Right, NotApplicable };

const char* to_string(KnotType t) noexcept;
const char* to_string(Chirality c) noexcept;

struct TorusEntry {
  int p = 0, q = 0;
  KnotType type = KnotType::Torus;
  LaurentPoly jones;  // of the positive braid closure
};

/// Torus knots and links with small crossing number, computed from braid closures.
const std::vector<TorusEntry>& torusTable();

struct KnotReport {
  int componentCount = 0;
  std::vector<std::vector<int>> pairwiseLinking;
  LaurentPoly jones;
  long long determinant = 0;
  KnotType identifiedAs = KnotType::Unknown;
  int torusP = 0, torusQ = 0;
  Chirality chirality = Chirality::NotApplicable;
  std::vector<std::string> gaussCodes;  // one per projection used
  std::vector<Vec3> directions;

  std::string label() const;
};

struct ClassifyOptions {
  int projections = 3;
  std::uint64_t seed = 20200601;
  ProjectionOptions projection{};
};

/// Component count, linking matrix, Jones polynomial (checked identical over
/// several projections) and identification against torusTable() up to mirror.
KnotReport classify(std::span<const PolyCurve> curves, const ClassifyOptions& opt = {});

}  // namespace nhm::knot
