#include "stgcn/dhtcn.hpp"

#include <cmath>
#include <stdexcept>

#include "stgcn/rng.hpp"

namespace stgcn {

DhtcnParams dhtcn_init(ParameterStore& store, const std::string& prefix,
                       const DhtcnConfig& config, std::uint64_t seed) {
    if (config.channels == 0 || config.layers == 0 || config.temporal_window == 0) {
        throw std::invalid_argument("dhtcn_init: all extents must be positive");
    }
    if (config.temporal_window % 2 == 0) {
        throw std::invalid_argument("dhtcn_init: temporal window must be odd, got " +
                                    std::to_string(config.temporal_window));
    }
    DhtcnParams params;
    params.config = config;
    const std::size_t c = config.channels;
    double bound = std::sqrt(1.0 / static_cast<double>(c * config.temporal_window));
    Rng rng(derive_seed(seed, 0x64687463ULL));
    for (std::size_t n = 0; n < config.layers; ++n) {
        DhtcnLayer layer;
        layer.dilation = std::size_t{1} << n;
        std::string base = prefix + ".layer" + std::to_string(n);
        Tensor kernel({c, config.temporal_window, c});
        for (std::size_t k = 0; k < kernel.size(); ++k) kernel[k] = rng.uniform(-bound, bound);
        layer.kernel = store.add(base + ".kernel", std::move(kernel));
        if (config.bias) layer.bias = store.add(base + ".bias", Tensor({c}));
        layer.gamma = store.add(base + ".gamma", Tensor::ones({c}));
        layer.beta = store.add(base + ".beta", Tensor({c}));
        layer.stats = make_running_stats(c, config.momentum);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

namespace {

void check_input(const Tensor& input, const DhtcnParams& params, std::size_t channel_axis) {
    if (input.extent(channel_axis) != params.config.channels) {
        throw std::invalid_argument("dhtcn_forward: channel extent mismatch, input " +
                                    shape_string(input) + " vs configured " +
                                    std::to_string(params.config.channels) + " channels");
    }
}

// Applies one layer's dilated convolution jointwise over a (B, C, J, T) map.
Tensor conv_all_joints(const Tensor& x, const Tensor& kernel, const double* bias,
                       std::size_t dilation) {
    const std::size_t b_n = x.extent(0), c = x.extent(1), j_n = x.extent(2), t_n = x.extent(3);
    Tensor y(x.shape());
    detail::ConvSpec spec{c, c, t_n, kernel.extent(1), dilation, Padding::kSymmetric};
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* xs = x.data() + (b * c * j_n + j) * t_n;
            double* ys = y.data() + (b * c * j_n + j) * t_n;
            detail::conv_line_forward(xs, j_n * t_n, kernel.data(), bias, ys, j_n * t_n, spec);
        }
    }
    return y;
}

}  // namespace

Tensor dhtcn_forward_batched(const Tensor& input, DhtcnParams& params,
                             const ParameterStore& store, Mode mode, DhtcnTrace* trace) {
    if (input.rank() != 4) {
        throw std::invalid_argument("dhtcn_forward_batched: input must be (B, C, J, T)");
    }
    check_input(input, params, 1);
    if (trace) {
        trace->mode = mode;
        trace->layers.clear();
    }
    const Tensor* current = &input;
    Tensor held;
    for (auto& layer : params.layers) {
        const Tensor& kernel = store.value(layer.kernel);
        const double* bias = params.config.bias ? store.value(layer.bias).data() : nullptr;
        Tensor conv_out = conv_all_joints(*current, kernel, bias, layer.dilation);
        Tensor relu_out = relu(conv_out);
        BnVars vars;
        Tensor bn_out = batch_norm_forward(relu_out, store.value(layer.gamma),
                                           store.value(layer.beta), params.config.eps, mode,
                                           layer.stats, &vars);
        if (trace) {
            DhtcnLayerTrace lt;
            lt.conv_out = std::move(conv_out);
            lt.relu_out = std::move(relu_out);
            lt.bn = std::move(vars);
            lt.out = bn_out;
            trace->layers.push_back(std::move(lt));
        }
        held = std::move(bn_out);
        current = &held;
    }
    // Residual from the block input, no activation after the sum.
    Tensor out = std::move(held);
    axpy(1.0, input, out);
    return out;
}

Tensor dhtcn_forward(const Tensor& input, DhtcnParams& params, const ParameterStore& store,
                     Mode mode) {
    if (input.rank() != 3) {
        throw std::invalid_argument("dhtcn_forward: input must be (C, J, T), got " +
                                    shape_string(input));
    }
    Tensor batched({1, input.extent(0), input.extent(1), input.extent(2)}, input.values());
    Tensor out = dhtcn_forward_batched(batched, params, store, mode, nullptr);
    return Tensor(input.shape(), std::move(out.values()));
}

Tensor dhtcn_backward_batched(const Tensor& input, const Tensor& upstream_grad,
                              const DhtcnTrace& trace, const DhtcnParams& params,
                              ParameterStore& store) {
    require_same_shape(input, upstream_grad, "dhtcn_backward_batched");
    const std::size_t b_n = input.extent(0), c = input.extent(1), j_n = input.extent(2),
                      t_n = input.extent(3);
    Tensor g = upstream_grad;  // grad wrt the last layer's output
    for (std::size_t n = params.layers.size(); n-- > 0;) {
        const DhtcnLayer& layer = params.layers[n];
        const DhtcnLayerTrace& lt = trace.layers[n];
        Tensor g_relu = batch_norm_backward(lt.relu_out, store.value(layer.gamma),
                                            params.config.eps, trace.mode, layer.stats, lt.bn, g,
                                            store.grad(layer.gamma), store.grad(layer.beta));
        Tensor g_conv = relu_backward(lt.conv_out, g_relu);
        const Tensor& layer_in = n == 0 ? input : trace.layers[n - 1].out;
        const Tensor& kernel = store.value(layer.kernel);
        Tensor g_in(layer_in.shape());
        detail::ConvSpec spec{c, c, t_n, kernel.extent(1), layer.dilation, Padding::kSymmetric};
        double* gbias = params.config.bias ? store.grad(layer.bias).data() : nullptr;
        for (std::size_t b = 0; b < b_n; ++b) {
            for (std::size_t j = 0; j < j_n; ++j) {
                std::size_t base = (b * c * j_n + j) * t_n;
                detail::conv_line_backward_input(kernel.data(), g_conv.data() + base, j_n * t_n,
                                                 g_in.data() + base, j_n * t_n, spec);
                detail::conv_line_backward_kernel(layer_in.data() + base, j_n * t_n,
                                                  g_conv.data() + base, j_n * t_n,
                                                  store.grad(layer.kernel).data(), gbias, spec);
            }
        }
        g = std::move(g_in);
    }
    // Residual path adds the upstream gradient straight to the input.
    axpy(1.0, upstream_grad, g);
    return g;
}

std::size_t receptive_field(std::size_t layers, std::size_t temporal_window) {
    if (layers < 1) {
        throw std::invalid_argument("receptive_field: need at least one layer");
    }
    if (temporal_window % 2 == 0) {
        throw std::invalid_argument("receptive_field: temporal window must be odd, got " +
                                    std::to_string(temporal_window));
    }
    return 1 + (temporal_window - 1) * ((std::size_t{1} << layers) - 1);
}

}  // namespace stgcn
