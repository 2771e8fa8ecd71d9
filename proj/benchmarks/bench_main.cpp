#include <benchmark/benchmark.h>

#include "tlsdyn/diffusion.hpp"
#include "tlsdyn/fitting.hpp"
#include "tlsdyn/spectra.hpp"

using namespace tlsdyn;

static void BM_RunTrajectory(benchmark::State& state) {
    diffusion::SimConfig cfg;
    cfg.tf_density = static_cast<double>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(diffusion::run_trajectory(cfg, seed++));
}
BENCHMARK(BM_RunTrajectory)->Arg(100)->Arg(1000)->Arg(10000)->Arg(50000);

static void BM_FitLorentzians(benchmark::State& state) {
    spectra::SpectrumModel model;
    model.background_rate_per_us = 0.02;
    for (int k = 0; k < state.range(0); ++k) {
        model.peaks.push_back({5.6 + 0.3 * (k + 0.5) / static_cast<double>(state.range(0)), 0.25, 5.0, std::nullopt, false});
    }
    const auto spectrum = spectra::synth_spectrum(model, spectra::linear_grid(5.55, 5.95, 0.001));
    for (auto _ : state) benchmark::DoNotOptimize(analysis::fit_lorentzians(spectrum));
}
BENCHMARK(BM_FitLorentzians)->Arg(1)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_FitDecay(benchmark::State& state) {
    const auto curve = spectra::synth_decay(20.0, {}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(analysis::fit_decay(curve));
}
BENCHMARK(BM_FitDecay)->Unit(benchmark::kMicrosecond);

static void BM_SynthDataset(benchmark::State& state) {
    spectra::SpectrumModel model;
    model.peaks = {{5.7, 0.25, 5.0, std::nullopt, true}, {5.85, 0.3, 4.0, std::nullopt, false}};
    const std::vector<Trajectory> trajs = {diffusion::run_trajectory({}, 1)};
    const auto grid = spectra::linear_grid(5.55, 5.95, 0.001);
    spectra::DatasetNoise noise;
    noise.shot_level = state.range(0) != 0;
    // Shot-level synthesis refits every decay curve, so time a single slice.
    const std::vector<double> times = noise.shot_level ? std::vector<double>{0.0} : trajs[0].times_hr;
    for (auto _ : state) benchmark::DoNotOptimize(spectra::synth_dataset(model, trajs, grid, times, noise, 3, 1));
}
BENCHMARK(BM_SynthDataset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
