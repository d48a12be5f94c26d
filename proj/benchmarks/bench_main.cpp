#include <benchmark/benchmark.h>

#include "stgcn/dhtcn.hpp"
#include "stgcn/graph.hpp"
#include "stgcn/model.hpp"
#include "stgcn/ops.hpp"
#include "stgcn/rng.hpp"

namespace {

using namespace stgcn;

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_ConvTemporalForward(benchmark::State& state) {
    const std::size_t c = static_cast<std::size_t>(state.range(0));
    Tensor input = random_tensor({c, 256}, 1);
    Tensor kernels = random_tensor({c, 9, c}, 2);
    for (auto _ : state) {
        Tensor out = conv_temporal(input, kernels, 2, Padding::kSymmetric);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_ConvTemporalForward)->Arg(8)->Arg(16)->Arg(64);

void BM_ConvTemporalBackward(benchmark::State& state) {
    const std::size_t c = static_cast<std::size_t>(state.range(0));
    Tensor input = random_tensor({c, 256}, 1);
    Tensor kernels = random_tensor({c, 9, c}, 2);
    Tensor upstream = random_tensor({c, 256}, 3);
    for (auto _ : state) {
        ConvGrads g = conv_temporal_backward(input, kernels, 2, Padding::kSymmetric, upstream);
        benchmark::DoNotOptimize(g.grad_input.data());
    }
}
BENCHMARK(BM_ConvTemporalBackward)->Arg(8)->Arg(16)->Arg(64);

void BM_NormalizeAdjacency(benchmark::State& state) {
    Tensor a = SkeletonGraph::from_template("ntu25").adjacency();
    for (auto _ : state) {
        Tensor n = normalize_adjacency(a);
        benchmark::DoNotOptimize(n.data());
    }
}
BENCHMARK(BM_NormalizeAdjacency);

void BM_ModelForward(benchmark::State& state) {
    ModelConfig config;
    config.template_name = "chain7";
    config.blocks = {16, 16};
    Model model = build_model(config);
    Tensor input = random_tensor({3, 7, 64}, 4);
    for (auto _ : state) {
        Tensor logits = model_forward(model, input, Mode::kEval);
        benchmark::DoNotOptimize(logits.data());
    }
}
BENCHMARK(BM_ModelForward);

void BM_TrainStep(benchmark::State& state) {
    ModelConfig config;
    config.template_name = "chain7";
    config.blocks = {16, 16};
    Model model = build_model(config);
    Tensor input = random_tensor({8, 3, 7, 64}, 5);
    Tensor grad_logits = random_tensor({8, config.num_classes}, 6);
    for (auto _ : state) {
        ForwardTrace trace;
        Tensor logits = forward_batch(model, input, Mode::kTrain, &trace);
        benchmark::DoNotOptimize(logits.data());
        Tensor g = backward_batch(model, trace, grad_logits);
        benchmark::DoNotOptimize(g.data());
        model.store.zero_gradients();
    }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
