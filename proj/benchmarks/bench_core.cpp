#include <benchmark/benchmark.h>

#include "rwpm/contact_dist.hpp"
#include "rwpm/environment.hpp"
#include "rwpm/pinning.hpp"
#include "rwpm/pmf.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/tilt_kernel.hpp"
#include "rwpm/walk_model.hpp"

namespace {

using namespace rwpm;

const RenewalLaw& shared_law() {
    static RenewalLaw law = build_renewal(model_by_id("lazy3"), model_by_id("lazy3"), 20000);
    return law;
}

void BM_axis_convolve(benchmark::State& state) {
    WalkModel m = model_by_id("lazy3");
    WalkModel diff = difference_model(m, m);
    AxisTable t = axis_delta();
    int n = static_cast<int>(state.range(0));
    for (int i = 0; i < n; ++i) t = axis_convolve(t, diff.axis_pmf, diff.axis_radius);
    for (auto _ : state) {
        AxisTable next = axis_convolve(t, diff.axis_pmf, diff.axis_radius);
        benchmark::DoNotOptimize(next.v.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_axis_convolve)->Arg(256)->Arg(2048)->Arg(16384)->Complexity(benchmark::oN);

void BM_renewal_build(benchmark::State& state) {
    WalkModel m = model_by_id("lazy3");
    int n_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        RenewalLaw law = build_renewal(m, m, n_max);
        benchmark::DoNotOptimize(law.green);
    }
    state.SetComplexityN(n_max);
}
BENCHMARK(BM_renewal_build)->Arg(500)->Arg(2000)->Arg(8000)->Complexity();

void BM_quenched_dp(benchmark::State& state) {
    const RenewalLaw& law = shared_law();
    WalkModel m = model_by_id("lazy3");
    WeightEvaluator weights(m, law, 128);
    int N = static_cast<int>(state.range(0));
    RngStream rng(1);
    Environment env = sample_path(m, N, rng);
    CouplingParams params = CouplingParams::from_z(1.0, law.green);
    for (auto _ : state) {
        PartitionTable t = quenched_partition(params, env, law, weights);
        benchmark::DoNotOptimize(t.log_values.data());
    }
    state.SetComplexityN(N);
}
BENCHMARK(BM_quenched_dp)->Arg(128)->Arg(512)->Arg(2048)->Complexity(benchmark::oNSquared);

void BM_mass_sequence(benchmark::State& state) {
    const RenewalLaw& law = shared_law();
    int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        MassSequence mass = mass_sequence(law, N);
        benchmark::DoNotOptimize(mass.u.data());
    }
}
BENCHMARK(BM_mass_sequence)->Arg(2048)->Arg(8192);

void BM_contact_dist_direct(benchmark::State& state) {
    const RenewalLaw& law = shared_law();
    int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        std::vector<double> d = contact_count_dist_direct(law, N);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_contact_dist_direct)->Arg(512)->Arg(2048);

void BM_contact_dist_fft(benchmark::State& state) {
    const RenewalLaw& law = shared_law();
    int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        std::vector<double> d = contact_count_dist_fft(law, N);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_contact_dist_fft)->Arg(512)->Arg(2048)->Arg(8192);

void BM_penalty_dense(benchmark::State& state) {
    WalkModel m = model_by_id("lazy3");
    int L = static_cast<int>(state.range(0));
    RngStream rng(2);
    Environment env = sample_path(m, L, rng);
    TiltKernel k = TiltKernel::longrange(L, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(penalty(k, env.increments, 3));
    state.SetComplexityN(L);
}
BENCHMARK(BM_penalty_dense)->Arg(256)->Arg(1024)->Arg(4096)->Complexity(benchmark::oNSquared);

void BM_penalty_fft(benchmark::State& state) {
    WalkModel m = model_by_id("lazy3");
    int L = static_cast<int>(state.range(0));
    RngStream rng(2);
    Environment env = sample_path(m, L, rng);
    TiltKernel k = TiltKernel::longrange(L, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(penalty_fft(k, env.increments, 3));
    state.SetComplexityN(L);
}
BENCHMARK(BM_penalty_fft)->Arg(256)->Arg(1024)->Arg(4096)->Arg(16384)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
