// Serial reference vs OpenMP kernels. Each pair runs on identical inputs.
#include <benchmark/benchmark.h>

#include "nhmetal/el_extract.hpp"
#include "nhmetal/knot.hpp"
#include "nhmetal/measurement.hpp"

using namespace nhm;

namespace {

const Section& knotSection() {
  static const Section s(ModelSpec::knot(3, 2));
  return s;
}

GridSpec grid3(const benchmark::State& st) { return GridSpec::brillouin(3, static_cast<int>(st.range(0))); }

void ScanFieldsSerial(benchmark::State& st) {
  const GridSpec g = grid3(st);
  for (auto _ : st) benchmark::DoNotOptimize(serial::scanFields(knotSection(), g));
}
void ScanFieldsOmp(benchmark::State& st) {
  const GridSpec g = grid3(st);
  for (auto _ : st) benchmark::DoNotOptimize(scanFields(knotSection(), g));
}

void SignCellsSerial(benchmark::State& st) {
  const GridSpec g = grid3(st);
  const FieldGrid f = scanFields(knotSection(), g);
  for (auto _ : st) benchmark::DoNotOptimize(serial::doubleSignChangeCells(g, f.reE2, f.imE2));
}
void SignCellsOmp(benchmark::State& st) {
  const GridSpec g = grid3(st);
  const FieldGrid f = scanFields(knotSection(), g);
  for (auto _ : st) benchmark::DoNotOptimize(doubleSignChangeCells(g, f.reE2, f.imE2));
}

void FermiSerial(benchmark::State& st) {
  const GridSpec g = grid3(st);
  for (auto _ : st) benchmark::DoNotOptimize(serial::fermiClassify(knotSection(), g));
}
void FermiOmp(benchmark::State& st) {
  const GridSpec g = grid3(st);
  for (auto _ : st) benchmark::DoNotOptimize(fermiClassify(knotSection(), g));
}

knot::KnotDiagram torusBraid(const benchmark::State& st) {
  return knot::braidClosure(2, std::vector<int>(static_cast<std::size_t>(st.range(0)), 1));
}

void BracketSerial(benchmark::State& st) {
  const knot::KnotDiagram d = torusBraid(st);
  for (auto _ : st) benchmark::DoNotOptimize(knot::serial::kauffmanBracket(d));
}
void BracketOmp(benchmark::State& st) {
  const knot::KnotDiagram d = torusBraid(st);
  for (auto _ : st) benchmark::DoNotOptimize(knot::kauffmanBracket(d));
}

std::vector<Momentum> path(const benchmark::State& st) {
  std::vector<Momentum> ks;
  const int n = static_cast<int>(st.range(0));
  for (int i = 0; i < n; ++i) ks.emplace_back(-kPi + kTwoPi * i / n, 0.3, 0.1);
  return ks;
}

MeasureOptions measureOptions() {
  MeasureOptions opt;
  opt.trials = 4;
  return opt;
}

void MeasureSerial(benchmark::State& st) {
  const auto ks = path(st);
  for (auto _ : st) benchmark::DoNotOptimize(serial::measureBandStructure(ModelSpec::knot(3, 2), ks, measureOptions()));
}
void MeasureOmp(benchmark::State& st) {
  const auto ks = path(st);
  for (auto _ : st) benchmark::DoNotOptimize(measureBandStructure(ModelSpec::knot(3, 2), ks, measureOptions()));
}

}  // namespace

BENCHMARK(ScanFieldsSerial)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);
BENCHMARK(ScanFieldsOmp)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(SignCellsSerial)->Arg(81)->Unit(benchmark::kMillisecond);
BENCHMARK(SignCellsOmp)->Arg(81)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(FermiSerial)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK(FermiOmp)->Arg(41)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BracketSerial)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);
BENCHMARK(BracketOmp)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(MeasureSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(MeasureOmp)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
