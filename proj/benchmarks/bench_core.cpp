#include "resv/dynamics.hpp"
#include "resv/embedding.hpp"
#include "resv/gs.hpp"
#include "resv/readout.hpp"
#include "resv/stochastic.hpp"

#include <benchmark/benchmark.h>

using namespace resv;

static void BM_LorenzIntegrate(benchmark::State& state) {
    const SourceSystem l = lorenz63();
    const Vec m0 = (Vec(3) << 1.0, 1.0, 1.0).finished();
    const double t1 = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(integrate(l, m0, 0.0, t1).back());
}
BENCHMARK(BM_LorenzIntegrate)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_GsIntegralCircle(benchmark::State& state) {
    const LinearReservoir res(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
    const Vec m = (Vec(2) << 0.0, 1.0).finished();
    for (auto _ : state) benchmark::DoNotOptimize(gs_integral(res, circle(), observe_component(0), m, 20.0, 0.01).value);
}
BENCHMARK(BM_GsIntegralCircle)->Unit(benchmark::kMillisecond);

static void BM_EmbeddingCheck(benchmark::State& state) {
    const Mat j = jacobian(lorenz63(), lorenz63().fixed_point("m_star"));
    const CVec eigs = check_distinct_eigs(j).eigenvalues;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const LinearReservoir res = generate_reservoir(RandomReservoirSpec{7, 30.0, seed++});
        benchmark::DoNotOptimize(check_independence(res, eigs).verdict);
    }
}
BENCHMARK(BM_EmbeddingCheck);

static void BM_ReadoutFit(benchmark::State& state) {
    const auto d = static_cast<int>(state.range(0));
    Rng rng(1);
    const FeatureBank bank = sample_features(d, 7, rng);
    Mat states(10001, 7);
    Vec y(10001);
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        for (Eigen::Index k = 0; k < 7; ++k) states(i, k) = rng.uniform(-5, 5);
        y[i] = std::sin(states(i, 0));
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_readout(bank, states, y).w);
}
BENCHMARK(BM_ReadoutFit)->Arg(30)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_OuExactSteps(benchmark::State& state) {
    const LinearReservoir res = generate_reservoir(RandomReservoirSpec{7, 30.0, 1});
    StreamingCovarianceOptions o;
    o.scheme = OuScheme::exact;
    o.dt = 0.1;
    o.burn_in = 0.1;
    o.duration = 1e4;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_stationary_covariance(res.A(), res.C(), 0.5, o).empirical);
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_OuExactSteps)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
