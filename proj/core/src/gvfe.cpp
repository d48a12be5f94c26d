#include "stgcn/gvfe.hpp"

#include <cmath>
#include <stdexcept>

#include "stgcn/rng.hpp"

namespace stgcn {

GvfeParams gvfe_init(ParameterStore& store, std::size_t joint_count, const GvfeConfig& config,
                     std::uint64_t seed) {
    if (joint_count == 0 || config.in_channels == 0 || config.out_channels == 0 ||
        config.temporal_window == 0) {
        throw std::invalid_argument("gvfe_init: all extents must be positive");
    }
    GvfeParams params;
    params.config = config;
    double bound = std::sqrt(1.0 / static_cast<double>(config.in_channels * config.temporal_window));
    Rng rng(derive_seed(seed, 0x67766665ULL));
    for (std::size_t i = 0; i < joint_count; ++i) {
        Tensor kernel({config.out_channels, config.temporal_window, config.in_channels});
        for (std::size_t k = 0; k < kernel.size(); ++k) kernel[k] = rng.uniform(-bound, bound);
        params.kernels.push_back(
            store.add("gvfe.joint" + std::to_string(i) + ".kernel", std::move(kernel)));
        if (config.bias) {
            params.biases.push_back(
                store.add("gvfe.joint" + std::to_string(i) + ".bias", Tensor({config.out_channels})));
        }
    }
    return params;
}

namespace {

void check_coords(const Tensor& coords, const GvfeParams& params, std::size_t joint_axis) {
    if (coords.extent(joint_axis - 1) != params.config.in_channels) {
        throw std::invalid_argument("gvfe_forward: coordinate channel extent must be " +
                                    std::to_string(params.config.in_channels) + ", got " +
                                    shape_string(coords));
    }
    if (coords.extent(joint_axis) != params.joint_count()) {
        throw std::invalid_argument("gvfe_forward: joint count mismatch, input " +
                                    shape_string(coords) + " vs " +
                                    std::to_string(params.joint_count()) + " per-joint kernels");
    }
}

}  // namespace

Tensor gvfe_forward_batched(const Tensor& coords, const GvfeParams& params,
                            const ParameterStore& store) {
    if (coords.rank() != 4) {
        throw std::invalid_argument("gvfe_forward_batched: input must be (B, C, J, T)");
    }
    check_coords(coords, params, 2);
    const std::size_t b_n = coords.extent(0), c_in = coords.extent(1), j_n = coords.extent(2),
                      t_n = coords.extent(3);
    const std::size_t c_out = params.config.out_channels;
    Tensor out({b_n, c_out, j_n, t_n});
    detail::ConvSpec spec{c_in, c_out, t_n, params.config.temporal_window, 1, Padding::kCausal};
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* x = coords.data() + (b * c_in * j_n + j) * t_n;
            double* y = out.data() + (b * c_out * j_n + j) * t_n;
            const Tensor& kernel = store.value(params.kernels[j]);
            const double* bias =
                params.config.bias ? store.value(params.biases[j]).data() : nullptr;
            detail::conv_line_forward(x, j_n * t_n, kernel.data(), bias, y, j_n * t_n, spec);
        }
    }
    return out;
}

Tensor gvfe_forward(const Tensor& coords, const GvfeParams& params, const ParameterStore& store) {
    if (coords.rank() != 3) {
        throw std::invalid_argument("gvfe_forward: input must be (C, J, T), got " +
                                    shape_string(coords));
    }
    Tensor batched({1, coords.extent(0), coords.extent(1), coords.extent(2)}, coords.values());
    Tensor out = gvfe_forward_batched(batched, params, store);
    return Tensor({out.extent(1), out.extent(2), out.extent(3)}, std::move(out.values()));
}

Tensor gvfe_backward_batched(const Tensor& coords, const Tensor& upstream_grad,
                             const GvfeParams& params, ParameterStore& store) {
    check_coords(coords, params, 2);
    const std::size_t b_n = coords.extent(0), c_in = coords.extent(1), j_n = coords.extent(2),
                      t_n = coords.extent(3);
    const std::size_t c_out = params.config.out_channels;
    Tensor grad_coords(coords.shape());
    detail::ConvSpec spec{c_in, c_out, t_n, params.config.temporal_window, 1, Padding::kCausal};
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* x = coords.data() + (b * c_in * j_n + j) * t_n;
            const double* gy = upstream_grad.data() + (b * c_out * j_n + j) * t_n;
            double* gx = grad_coords.data() + (b * c_in * j_n + j) * t_n;
            const Tensor& kernel = store.value(params.kernels[j]);
            detail::conv_line_backward_input(kernel.data(), gy, j_n * t_n, gx, j_n * t_n, spec);
            double* gbias = params.config.bias ? store.grad(params.biases[j]).data() : nullptr;
            detail::conv_line_backward_kernel(x, j_n * t_n, gy, j_n * t_n,
                                              store.grad(params.kernels[j]).data(), gbias, spec);
        }
    }
    return grad_coords;
}

}  // namespace stgcn
