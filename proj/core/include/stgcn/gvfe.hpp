#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stgcn/ops.hpp"
#include "stgcn/param_store.hpp"
#include "stgcn/tensor.hpp"

namespace stgcn {

/// Vertex feature encoder configuration: raw 3D joint coordinates are lifted
/// to `out_channels` learned features by one causal temporal convolution per
/// joint, identity activation, no cross-joint mixing.
struct GvfeConfig {
    std::size_t in_channels = 3;
    std::size_t out_channels = 8;
    std::size_t temporal_window = 9;
    bool bias = false;
};

/// Per-joint kernels registered in a ParameterStore under
/// "gvfe.joint{i}.kernel" (and ".bias" when enabled). Each joint owns a
/// distinct (C_out, T_w, C_in) tensor; there is no weight sharing.
struct GvfeParams {
    GvfeConfig config;
    std::vector<std::size_t> kernels;  // store indices, one per joint
    std::vector<std::size_t> biases;   // empty unless config.bias
    std::size_t joint_count() const { return kernels.size(); }
};

/// Fan-in uniform init, deterministic per seed: each weight is drawn from
/// [-b, b] with b = sqrt(1 / (C_in * T_w)).
GvfeParams gvfe_init(ParameterStore& store, std::size_t joint_count, const GvfeConfig& config,
                     std::uint64_t seed);

/// Encodes a (3, J, T) coordinate tensor into (C_out, J, T) vertex features.
/// Joint i is convolved with its own kernel, causally, dilation 1; the time
/// extent is preserved and no value at time t depends on inputs after t.
Tensor gvfe_forward(const Tensor& coords, const GvfeParams& params, const ParameterStore& store);

/// Batched (B, 3, J, T) -> (B, C_out, J, T) used by the network path.
Tensor gvfe_forward_batched(const Tensor& coords, const GvfeParams& params,
                            const ParameterStore& store);

/// Accumulates kernel (and bias) gradients into the store; returns grad wrt
/// the coordinates, same shape as `coords` (batched or not, matching forward).
Tensor gvfe_backward_batched(const Tensor& coords, const Tensor& upstream_grad,
                             const GvfeParams& params, ParameterStore& store);

}  // namespace stgcn
