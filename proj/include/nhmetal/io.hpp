#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "nhmetal/el_extract.hpp"
#include "nhmetal/knot.hpp"
#include "nhmetal/measurement.hpp"

namespace nhm::io {

using json = nlohmann::json;

/// Decimal text that parses back to the identical double.
std::string formatDouble(double x);

json toJson(cplx z);
json toJson(const Momentum& k);
json toJson(const ModelSpec& m);
json toJson(const GridSpec& g);
json toJson(const PolyCurve& c);
json toJson(const ELSet& s);
json toJson(const FieldGrid& f);
json toJson(const FermiClassification& f);
json toJson(const knot::KnotReport& r);
json toJson(const LaurentPoly& p);

cplx complexFromJson(const json& j, const std::string& where);
Momentum momentumFromJson(const json& j, const std::string& where);
/// Missing keys keep their defaults; bad types or values throw InvalidConfig naming the field.
ModelSpec modelFromJson(const json& j, const std::string& where = "model");
GridSpec gridFromJson(const json& j, const std::string& where = "grid");
PolyCurve curveFromJson(const json& j, const std::string& where = "curve");
ELSet elsetFromJson(const json& j, const std::string& where = "elset");

/// "kz=0.65", "kz=kx" or "kz=-kx".
Plane parseSlice(const std::string& text);
/// "201x201" or "61x61x61": Brillouin-zone grid.
GridSpec parseGrid(const std::string& text);

struct MeasureConfig {
  double expectedTotal = 1e4;
  int trials = 1;
  bool unwrap = false;
  /// H1 only: d_x values lo..hi on the diagonal kx = ky.
  std::optional<std::array<double, 2>> dxRange;
  /// Straight momentum path from -> to.
  std::optional<std::array<Momentum, 2>> line;
  int samples = 11;
};

struct RunConfig {
  ModelSpec model;
  std::optional<GridSpec> grid;
  std::optional<std::string> slice;
  std::uint64_t seed = 1;
  ShiftMode shiftMode = ShiftMode::PerK;
  bool noiseless = false;
  MeasureConfig measure;
  int projections = 3;

  /// Section to scan: the model, optionally restricted to the slice plane.
  Section section() const;
  GridSpec gridOr(int defaultPoints) const;
};

json toJson(const MeasureConfig& m);
json toJson(const RunConfig& c);
/// Accepts either a bare config object or a run manifest holding one under "config".
RunConfig configFromJson(const json& j);
json parseJsonText(const std::string& text, const std::string& source);

json toJson(const MeasurementBatch& b, const RunConfig& c);

/// Momenta for a measurement run plus the abscissa used for plotting.
struct MeasurePath {
  std::vector<Momentum> momenta;
  std::vector<double> parameter;
  std::string parameterName;
};
MeasurePath measurePath(const RunConfig& c);

std::string fieldGridCsv(const FieldGrid& f);
std::string curveCsv(const PolyCurve& c);
std::string fermiCsv(const FermiClassification& f);
std::string measurementCsv(const MeasurementBatch& b);

std::string dump(const json& j);
std::string readText(const std::filesystem::path& p);

}  // namespace nhm::io
