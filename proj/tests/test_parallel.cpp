#include <cstring>

#include <omp.h>

#include "doctest.h"
#include "nhmetal/el_extract.hpp"
#include "nhmetal/knot.hpp"
#include "nhmetal/measurement.hpp"

using namespace nhm;

namespace {

bool bitEqual(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("scanFields matches the serial reference") {
  Threads t(4);
  const Section s2(ModelSpec::h2(0.4));
  const GridSpec g2 = GridSpec::brillouin(2, 101);
  const FieldGrid a = scanFields(s2, g2), b = serial::scanFields(s2, g2);
  for (auto name : FieldGrid::latticeNames()) {
    CAPTURE(name);
    CHECK(bitEqual(a.lattice(name), b.lattice(name)));
  }
  const Section s3(ModelSpec::knot(3, 2));
  const GridSpec g3 = GridSpec::brillouin(3, 21);
  CHECK(bitEqual(scanFields(s3, g3).reE2, serial::scanFields(s3, g3).reE2));
}

TEST_CASE("double sign-change cells match the serial reference") {
  Threads t(4);
  const GridSpec g = GridSpec::brillouin(3, 31);
  const FieldGrid f = serial::scanFields(Section(ModelSpec::knot(3, 2)), g);
  const auto a = doubleSignChangeCells(g, f.reE2, f.imE2);
  const auto b = serial::doubleSignChangeCells(g, f.reE2, f.imE2);
  CHECK(a == b);
  CHECK(std::count(a.begin(), a.end(), 1) > 0);
}

TEST_CASE("fermi classification matches the serial reference") {
  Threads t(4);
  for (const auto& [s, g] : {std::pair{Section(ModelSpec::h1()), GridSpec::brillouin(2, 121)},
                             std::pair{Section(ModelSpec::knot(3, 2)), GridSpec::brillouin(3, 25)}}) {
    const FermiClassification a = fermiClassify(s, g), b = serial::fermiClassify(s, g);
    CHECK(a.labels == b.labels);
  }
}

TEST_CASE("bracket matches the serial reference") {
  Threads t(4);
  const std::vector<int> word{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  const knot::KnotDiagram d = knot::braidClosure(2, word);
  CHECK(knot::kauffmanBracket(d) == knot::serial::kauffmanBracket(d));
}

TEST_CASE("measurement and global lambda match the serial reference") {
  Threads t(4);
  std::vector<Momentum> ks;
  for (int i = 0; i < 30; ++i) ks.emplace_back(-3.0 + 0.2 * i, 1.0 - 0.07 * i, 0.05 * i);
  MeasureOptions opt;
  opt.trials = 4;
  opt.shiftMode = ShiftMode::Global;
  const ModelSpec m = ModelSpec::knot(2, 2);
  const MeasurementBatch a = measureBandStructure(m, ks, opt);
  const MeasurementBatch b = serial::measureBandStructure(m, ks, opt);
  CHECK(a.globalLogLambda == b.globalLogLambda);
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].flags == b.results[i].flags);
    CHECK(a.results[i].counts.nPlus == b.results[i].counts.nPlus);
    if (a.results[i].ok()) CHECK(a.results[i].ePrime == b.results[i].ePrime);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const Section s(ModelSpec::h2(1.42));
  const GridSpec g = GridSpec::brillouin(2, 151);
  FieldGrid one, many;
  {
    Threads t(1);
    one = scanFields(s, g);
  }
  {
    Threads t(8);
    many = scanFields(s, g);
  }
  CHECK(bitEqual(one.imGap, many.imGap));
}
