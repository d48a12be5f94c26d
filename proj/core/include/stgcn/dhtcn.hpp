#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stgcn/ops.hpp"
#include "stgcn/param_store.hpp"
#include "stgcn/tensor.hpp"

namespace stgcn {

/// Dilated hierarchical temporal block: `layers` stacked temporal
/// convolutions sharing the channel extent, layer n dilated by 2^n, each
/// followed by ReLU and batch normalization, plus a residual connection from
/// the block input to the final sum.
struct DhtcnConfig {
    std::size_t channels = 0;
    std::size_t layers = 2;
    std::size_t temporal_window = 9;
    bool bias = false;
    double eps = 1e-5;
    double momentum = 0.1;
};

struct DhtcnLayer {
    std::size_t kernel = 0;  // store index of the (C, T_w1, C) filter tensor
    std::size_t bias = 0;    // only meaningful when config.bias
    std::size_t gamma = 0;
    std::size_t beta = 0;
    std::size_t dilation = 1;
    RunningStats stats;  // batch-norm buffers, not trainable
};

struct DhtcnParams {
    DhtcnConfig config;
    std::vector<DhtcnLayer> layers;
};

/// Registers kernels/gamma/beta under "{prefix}.layer{n}.{kernel|gamma|beta}"
/// with dilations fixed to [1, 2, 4, ...]. Kernels are fan-in initialized.
DhtcnParams dhtcn_init(ParameterStore& store, const std::string& prefix,
                       const DhtcnConfig& config, std::uint64_t seed);

struct DhtcnLayerTrace {
    Tensor conv_out;
    Tensor relu_out;
    BnVars bn;
    Tensor out;
};

struct DhtcnTrace {
    Mode mode = Mode::kTrain;
    std::vector<DhtcnLayerTrace> layers;
};

/// (C, J, T) -> (C, J, T). Convolutions are symmetric (centered), applied
/// independently at every joint; the input is added back after the last layer
/// with no extra activation, so zero kernels and beta give the identity map.
/// Train mode updates the per-layer running statistics.
Tensor dhtcn_forward(const Tensor& input, DhtcnParams& params, const ParameterStore& store,
                     Mode mode);

/// Batched form over (B, C, J, T); `trace`, when non-null, captures what the
/// backward pass needs.
Tensor dhtcn_forward_batched(const Tensor& input, DhtcnParams& params,
                             const ParameterStore& store, Mode mode, DhtcnTrace* trace);

/// Accumulates parameter gradients into the store; returns grad wrt the block
/// input, including the residual term.
Tensor dhtcn_backward_batched(const Tensor& input, const Tensor& upstream_grad,
                              const DhtcnTrace& trace, const DhtcnParams& params,
                              ParameterStore& store);

/// Span of input time steps that can influence one output step:
/// 1 + (T_w1 - 1) * (2^layers - 1). The window must be odd.
std::size_t receptive_field(std::size_t layers, std::size_t temporal_window);

}  // namespace stgcn
