#include <random>

#include <benchmark/benchmark.h>

#include "egoact/geometry.hpp"
#include "egoact/heatmap.hpp"
#include "egoact/net.hpp"
#include "egoact/train.hpp"

using namespace egoact;

namespace {

Matrix<float> random_sequence(const NetConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Matrix<float> x(cfg.seq_len, cfg.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    return x;
}

NetConfig config_for(int layout) { return layout == 0 ? NetConfig::h2o() : NetConfig::fpha(); }

void bm_forward_eval(benchmark::State& state) {
    const NetConfig cfg = config_for(static_cast<int>(state.range(0)));
    const auto params = init_params(cfg, 0);
    const auto x = random_sequence(cfg, 1);
    for (auto _ : state) benchmark::DoNotOptimize(forward(params, x).logits.data());
}
BENCHMARK(bm_forward_eval)->Arg(0)->Arg(1);

void bm_forward_backward(benchmark::State& state) {
    const NetConfig cfg = config_for(static_cast<int>(state.range(0)));
    const auto params = init_params(cfg, 0);
    const auto x = random_sequence(cfg, 2);
    std::uint64_t step = 0;
    for (auto _ : state) {
        const auto cache = forward(params, x, ForwardOptions{RunMode::Train, step++});
        const auto* d = cache.logits.data();
        const auto ce = cross_entropy<float>(std::span<const float>(d, static_cast<std::size_t>(cache.logits.size())), 0);
        benchmark::DoNotOptimize(backward(params, cache, ce.grad));
    }
}
BENCHMARK(bm_forward_backward)->Arg(0)->Arg(1);

void bm_decode(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Heatmap hm(kHandKeypoints, side, side);
    for (auto& v : hm.values) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(decode(hm, 1280, 720));
}
BENCHMARK(bm_decode)->Arg(32)->Arg(64)->Arg(128);

} // namespace
BENCHMARK_MAIN();
