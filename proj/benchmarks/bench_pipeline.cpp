#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ppgauth/error.hpp"
#include "ppgauth/features.hpp"
#include "ppgauth/pipeline.hpp"
#include "ppgauth/synthgen.hpp"

using namespace ppgauth;

namespace {

std::vector<RawRecording> cohort(std::size_t subjects) {
  synth::DatasetSpec spec;
  spec.subjects = subjects;
  spec.noise_level = 0.1;
  std::vector<RawRecording> out;
  for (auto& s : synth::make_dataset(spec)) out.push_back(std::move(s.recording));
  return out;
}

void BM_Cwt(benchmark::State& state) {
  const features::MorseParams p;
  const auto grid = features::make_scale_grid(p);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(features::cwt(x, grid, p, 300.0));
}
BENCHMARK(BM_Cwt)->Arg(256)->Arg(961)->Unit(benchmark::kMicrosecond);

void BM_Enroll(benchmark::State& state) {
  set_warning_sink([](std::string_view) {});
  const auto recs = cohort(static_cast<std::size_t>(state.range(0)));
  const RunConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(pipeline::enroll(recs, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Enroll)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_VerifyTwoSegments(benchmark::State& state) {
  set_warning_sink([](std::string_view) {});
  const auto recs = cohort(10);
  const RunConfig cfg;
  const auto e = pipeline::enroll(recs, cfg);
  const auto& probe = recs[4];
  for (auto _ : state) {
    const auto p = pipeline::prepare(probe, e.config);
    const auto rows = pipeline::feature_rows(p, e.config, 0, probe.samples.size());
    const auto projected = pipeline::project_rows(e, std::span(rows).first(2));
    benchmark::DoNotOptimize(pipeline::score_claim(e, probe.subject_id, projected));
  }
}
BENCHMARK(BM_VerifyTwoSegments)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
