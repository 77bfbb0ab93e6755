#include <benchmark/benchmark.h>

#include "eventchron/bayesnet.hpp"
#include "eventchron/discovery.hpp"
#include "eventchron/imputation.hpp"
#include "eventchron/pipeline.hpp"
#include "eventchron/stats.hpp"

using namespace eventchron;

namespace {

const data::EventMatrix& chain_sample() {
    static const auto m = bn::sample(pipeline::preset_network("chain"), 5000, 1);
    return m;
}

void BM_FisherExact(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const data::ContingencyTable t{"a", "b", n, n / 2, n / 3, n};
    for (auto _ : state) benchmark::DoNotOptimize(discovery::fisher_exact(t));
}
BENCHMARK(BM_FisherExact)->Arg(100)->Arg(10000);

void BM_HillClimbing(benchmark::State& state) {
    const auto net = pipeline::preset_network("random-" + std::to_string(state.range(0)) + "-0.2", 3);
    const auto m = bn::sample(net, 2000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(discovery::hc_learn(m));
}
BENCHMARK(BM_HillClimbing)->Arg(5)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Pc(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(discovery::pc_learn(chain_sample()));
}
BENCHMARK(BM_Pc)->Unit(benchmark::kMillisecond);

void BM_Notears(benchmark::State& state) {
    discovery::NotearsOptions opt;
    opt.lambda = 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(discovery::notears_learn(chain_sample(), opt));
}
BENCHMARK(BM_Notears)->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
    const auto net = pipeline::preset_network("random-" + std::to_string(state.range(0)) + "-0.2", 5);
    const bn::Evidence ev{{0, true}};
    for (auto _ : state) benchmark::DoNotOptimize(bn::query(net, net.dag().size() - 1, ev));
}
BENCHMARK(BM_Inference)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMicrosecond);

void BM_EmImpute(benchmark::State& state) {
    pipeline::ScenarioSpec spec;
    spec.missing_rate = 0.3;
    spec.rows = 2000;
    const auto observed = pipeline::simulate(spec).observed;
    const auto hc = discovery::make_learner(discovery::Algorithm::Hc);
    for (auto _ : state) benchmark::DoNotOptimize(imputation::em_impute(observed, hc));
}
BENCHMARK(BM_EmImpute)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
