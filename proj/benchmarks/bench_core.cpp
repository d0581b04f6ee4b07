#include <benchmark/benchmark.h>

#include "spdc/dispersion.hpp"
#include "spdc/gaussian_model.hpp"
#include "spdc/measurement.hpp"
#include "spdc/pump.hpp"
#include "spdc/schmidt.hpp"
#include "spdc/tpsa.hpp"
#include "spdc/units.hpp"

using namespace spdc;

namespace {

CrystalSpec crystal() {
    static const CrystalSpec c = make_phase_matched_crystal(load_material("kdp"), 20.0, units::nm_to_omega(532.0));
    return c;
}

GaussianPulse envelope() { return GaussianPulse::from_intensity_fwhm(units::nm_to_omega(532.0), 0.1); }

void BM_build_tpsa(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const PumpModel pump{ShapedPump{envelope(), FabryPerot{50.0, 0.64, 0.0}}};
    const FrequencyGrid g = default_grid(crystal(), envelope().sigma, n);
    for (auto _ : state) benchmark::DoNotOptimize(build_tpsa(crystal(), pump, g));
    state.SetComplexityN(n * n);
}
BENCHMARK(BM_build_tpsa)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_decompose(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DoubleGaussianPeak p{units::deg_to_rad(30.0), 0.7, 2.0};
    const TpsaGrid t = normalize(rasterize(p, FrequencyGrid::centered(0.0, 10.0, n, 0.0, 10.0, n)));
    for (auto _ : state) benchmark::DoNotOptimize(decompose(t));
}
BENCHMARK(BM_decompose)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_simulate_histogram(benchmark::State& state) {
    const FiberDispersion table = FiberDispersion::load(data_directory() / "fibers" / "nufern_780hp.csv");
    const FiberPair fibers{{1.0, table}, {1.0, table}};
    const double w = units::nm_to_omega(860.0);
    const DoubleGaussianPeak p{units::deg_to_rad(30.0), 0.0008, 0.002};
    TpsaGrid t = rasterize(p, FrequencyGrid::centered(0.0, 0.006, 256, 0.0, 0.006, 256));
    t.grid = FrequencyGrid::centered(w, 0.006, 256, w, 0.006, 256);
    t = normalize(t);
    DetectorChain chain;
    chain.jitter_ps = 50.0;
    chain.trigger_jitter_ps = 57.7;
    chain.total_pairs = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_histogram(t, fibers, chain, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_simulate_histogram)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
