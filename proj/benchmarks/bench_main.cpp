#include <benchmark/benchmark.h>

#include <random>

#include "cogdep/infotheory.hpp"
#include "cogdep/kinetics.hpp"
#include "cogdep/synth.hpp"

using namespace cogdep;

namespace {

SampleMatrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> cols(d, std::vector<double>(n));
    for (auto& c : cols) {
        for (auto& v : c) v = z(rng);
    }
    return SampleMatrix::from_columns(cols);
}

void BM_RenyiEntropy(benchmark::State& state) {
    const auto m = copula_transform(gaussian(static_cast<std::size_t>(state.range(0)), 5, 1));
    for (auto _ : state) benchmark::DoNotOptimize(renyi_entropy(m));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenyiEntropy)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_MutualInformation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = gaussian(n, 1, 2);
    const auto r = gaussian(n, 4, 3);
    for (auto _ : state) benchmark::DoNotOptimize(mutual_information(x, r).value);
}
BENCHMARK(BM_MutualInformation)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Trajectory(benchmark::State& state) {
    auto cfg = SynthConfig::depleting();
    cfg.n_users = 1;
    cfg.questions_per_user = static_cast<std::size_t>(state.range(0));
    const auto corpus = build_corpus(generate_cohort(cfg).records);
    const KineticParams p = TwoResourceParams::fitted();
    for (auto _ : state) {
        benchmark::DoNotOptimize(trajectory(corpus.timelines.front(), TrackParams{p, p}).entries.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Trajectory)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
