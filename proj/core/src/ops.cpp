#include "stgcn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stgcn {

namespace detail {

namespace {

// x-index offset of tap w relative to the output time index.
inline std::ptrdiff_t tap_offset(const ConvSpec& s, std::size_t w) {
    if (s.padding == Padding::kCausal) {
        return -static_cast<std::ptrdiff_t>((s.t_w - 1 - w) * s.dilation);
    }
    std::ptrdiff_t half = static_cast<std::ptrdiff_t>((s.t_w - 1) / 2);
    return (static_cast<std::ptrdiff_t>(w) - half) * static_cast<std::ptrdiff_t>(s.dilation);
}

inline void tap_range(std::ptrdiff_t off, std::size_t t, std::size_t& lo, std::size_t& hi) {
    std::ptrdiff_t tlo = std::max<std::ptrdiff_t>(0, -off);
    std::ptrdiff_t thi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(t),
                                                  static_cast<std::ptrdiff_t>(t) - off);
    lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(tlo, 0));
    hi = static_cast<std::size_t>(std::max<std::ptrdiff_t>(thi, 0));
}

}  // namespace

void conv_line_forward(const double* x, std::size_t x_cstride, const double* kernel,
                       const double* bias, double* y, std::size_t y_cstride, const ConvSpec& s) {
    for (std::size_t co = 0; co < s.c_out; ++co) {
        double* yr = y + co * y_cstride;
        double b = bias ? bias[co] : 0.0;
        std::fill(yr, yr + s.t, b);
        for (std::size_t w = 0; w < s.t_w; ++w) {
            std::ptrdiff_t off = tap_offset(s, w);
            std::size_t lo, hi;
            tap_range(off, s.t, lo, hi);
            const double* krow = kernel + (co * s.t_w + w) * s.c_in;
            for (std::size_t ci = 0; ci < s.c_in; ++ci) {
                double c = krow[ci];
                if (c == 0.0) continue;
                const double* xr = x + ci * x_cstride + off;
                for (std::size_t t = lo; t < hi; ++t) yr[t] += c * xr[t];
            }
        }
    }
}

void conv_line_backward_input(const double* kernel, const double* gy, std::size_t gy_cstride,
                              double* gx, std::size_t gx_cstride, const ConvSpec& s) {
    for (std::size_t co = 0; co < s.c_out; ++co) {
        const double* gyr = gy + co * gy_cstride;
        for (std::size_t w = 0; w < s.t_w; ++w) {
            std::ptrdiff_t off = tap_offset(s, w);
            std::size_t lo, hi;
            tap_range(off, s.t, lo, hi);
            const double* krow = kernel + (co * s.t_w + w) * s.c_in;
            for (std::size_t ci = 0; ci < s.c_in; ++ci) {
                double c = krow[ci];
                if (c == 0.0) continue;
                double* gxr = gx + ci * gx_cstride + off;
                for (std::size_t t = lo; t < hi; ++t) gxr[t] += c * gyr[t];
            }
        }
    }
}

void conv_line_backward_kernel(const double* x, std::size_t x_cstride, const double* gy,
                               std::size_t gy_cstride, double* gk, double* gbias,
                               const ConvSpec& s) {
    for (std::size_t co = 0; co < s.c_out; ++co) {
        const double* gyr = gy + co * gy_cstride;
        if (gbias) {
            double acc = 0.0;
            for (std::size_t t = 0; t < s.t; ++t) acc += gyr[t];
            gbias[co] += acc;
        }
        for (std::size_t w = 0; w < s.t_w; ++w) {
            std::ptrdiff_t off = tap_offset(s, w);
            std::size_t lo, hi;
            tap_range(off, s.t, lo, hi);
            double* gkrow = gk + (co * s.t_w + w) * s.c_in;
            for (std::size_t ci = 0; ci < s.c_in; ++ci) {
                const double* xr = x + ci * x_cstride + off;
                double acc = 0.0;
                for (std::size_t t = lo; t < hi; ++t) acc += gyr[t] * xr[t];
                gkrow[ci] += acc;
            }
        }
    }
}

}  // namespace detail

namespace {

detail::ConvSpec check_conv_args(const Tensor& input, const Tensor& kernels, std::size_t dilation,
                                 Padding padding, const Tensor* bias) {
    if (input.rank() != 2) {
        throw std::invalid_argument("conv_temporal: input must be (C_in, T), got " +
                                    shape_string(input));
    }
    if (kernels.rank() != 3) {
        throw std::invalid_argument("conv_temporal: kernels must be (C_out, T_w, C_in), got " +
                                    shape_string(kernels));
    }
    if (kernels.extent(2) != input.extent(0)) {
        throw std::invalid_argument("conv_temporal: kernel channel extent mismatch, input " +
                                    shape_string(input) + " vs kernels " + shape_string(kernels));
    }
    if (dilation < 1) {
        throw std::invalid_argument("conv_temporal: dilation must be >= 1");
    }
    if (padding == Padding::kSymmetric && kernels.extent(1) % 2 == 0) {
        throw std::invalid_argument(
            "conv_temporal: symmetric padding requires an odd temporal window, got T_w = " +
            std::to_string(kernels.extent(1)));
    }
    if (bias && (bias->rank() != 1 || bias->extent(0) != kernels.extent(0))) {
        throw std::invalid_argument("conv_temporal: bias extent must equal C_out");
    }
    return detail::ConvSpec{input.extent(0), kernels.extent(0), input.extent(1),
                            kernels.extent(1), dilation, padding};
}

}  // namespace

Tensor conv_temporal(const Tensor& input, const Tensor& kernels, std::size_t dilation,
                     Padding padding, const Tensor* bias) {
    detail::ConvSpec s = check_conv_args(input, kernels, dilation, padding, bias);
    Tensor out({s.c_out, s.t});
    detail::conv_line_forward(input.data(), s.t, kernels.data(), bias ? bias->data() : nullptr,
                              out.data(), s.t, s);
    return out;
}

ConvGrads conv_temporal_backward(const Tensor& input, const Tensor& kernels, std::size_t dilation,
                                 Padding padding, const Tensor& upstream_grad,
                                 const Tensor* bias) {
    detail::ConvSpec s = check_conv_args(input, kernels, dilation, padding, bias);
    if (upstream_grad.rank() != 2 || upstream_grad.extent(0) != s.c_out ||
        upstream_grad.extent(1) != s.t) {
        throw std::invalid_argument("conv_temporal_backward: upstream grad shape " +
                                    shape_string(upstream_grad) + " does not match output (" +
                                    std::to_string(s.c_out) + ", " + std::to_string(s.t) + ")");
    }
    ConvGrads g;
    g.grad_input = Tensor(input.shape());
    g.grad_kernels = Tensor(kernels.shape());
    if (bias) g.grad_bias = Tensor(bias->shape());
    detail::conv_line_backward_input(kernels.data(), upstream_grad.data(), s.t,
                                     g.grad_input.data(), s.t, s);
    detail::conv_line_backward_kernel(input.data(), s.t, upstream_grad.data(), s.t,
                                      g.grad_kernels.data(), bias ? g.grad_bias.data() : nullptr,
                                      s);
    return g;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    const double* x = input.data();
    double* y = out.data();
    for (std::size_t i = 0; i < input.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& preactivation, const Tensor& upstream_grad) {
    require_same_shape(preactivation, upstream_grad, "relu_backward");
    Tensor out(upstream_grad.shape());
    const double* x = preactivation.data();
    const double* g = upstream_grad.data();
    double* y = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) y[i] = x[i] > 0.0 ? g[i] : 0.0;
    return out;
}

RunningStats make_running_stats(std::size_t channels, double momentum) {
    RunningStats r;
    r.mean = Tensor::zeros({channels});
    r.var = Tensor::ones({channels});
    r.momentum = momentum;
    return r;
}

namespace {

void check_bn_args(const Tensor& input, const Tensor& gamma, const Tensor& beta, double eps,
                   std::size_t channel_axis) {
    if (eps <= 0.0) {
        throw std::invalid_argument("batch_norm: eps must be positive");
    }
    std::size_t c = input.extent(channel_axis);
    if (gamma.rank() != 1 || gamma.extent(0) != c || beta.rank() != 1 || beta.extent(0) != c) {
        throw std::invalid_argument("batch_norm: gamma/beta extents must equal channel extent " +
                                    std::to_string(c));
    }
}

}  // namespace

Tensor batch_norm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                          double eps, Mode mode, RunningStats& running, BnVars* vars) {
    if (input.rank() != 4) {
        throw std::invalid_argument("batch_norm_forward: input must be (B, C, J, T), got " +
                                    shape_string(input));
    }
    check_bn_args(input, gamma, beta, eps, 1);
    const std::size_t b_n = input.extent(0), c_n = input.extent(1);
    const std::size_t plane = input.extent(2) * input.extent(3);
    const double m = static_cast<double>(b_n * plane);
    Tensor out(input.shape());
    const double* x = input.data();
    double* y = out.data();
    if (vars) {
        vars->mean = Tensor({c_n});
        vars->inv_std = Tensor({c_n});
    }
    for (std::size_t c = 0; c < c_n; ++c) {
        double mean, inv_std;
        if (mode == Mode::kTrain) {
            double sum = 0.0;
            for (std::size_t b = 0; b < b_n; ++b) {
                const double* xp = x + (b * c_n + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) sum += xp[i];
            }
            mean = sum / m;
            double sq = 0.0;
            for (std::size_t b = 0; b < b_n; ++b) {
                const double* xp = x + (b * c_n + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    double d = xp[i] - mean;
                    sq += d * d;
                }
            }
            double var = sq / m;
            inv_std = 1.0 / std::sqrt(var + eps);
            double mom = running.momentum;
            running.mean[c] = (1.0 - mom) * running.mean[c] + mom * mean;
            running.var[c] = (1.0 - mom) * running.var[c] + mom * var;
        } else {
            mean = running.mean[c];
            inv_std = 1.0 / std::sqrt(running.var[c] + eps);
        }
        if (vars) {
            vars->mean[c] = mean;
            vars->inv_std[c] = inv_std;
        }
        double g = gamma[c], bt = beta[c];
        double scale = g * inv_std;
        double shift = bt - mean * scale;
        for (std::size_t b = 0; b < b_n; ++b) {
            const double* xp = x + (b * c_n + c) * plane;
            double* yp = y + (b * c_n + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) yp[i] = xp[i] * scale + shift;
        }
    }
    return out;
}

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, double eps,
                  Mode mode, RunningStats& running) {
    if (input.rank() != 3) {
        throw std::invalid_argument("batch_norm: input must be (C, J, T), got " +
                                    shape_string(input));
    }
    Tensor batched({1, input.extent(0), input.extent(1), input.extent(2)}, input.values());
    Tensor out = batch_norm_forward(batched, gamma, beta, eps, mode, running, nullptr);
    return Tensor(input.shape(), std::move(out.values()));
}

Tensor batch_norm_backward(const Tensor& input, const Tensor& gamma, double eps, Mode mode,
                           const RunningStats& running, const BnVars& vars,
                           const Tensor& upstream_grad, Tensor& grad_gamma, Tensor& grad_beta) {
    require_same_shape(input, upstream_grad, "batch_norm_backward");
    const std::size_t b_n = input.extent(0), c_n = input.extent(1);
    const std::size_t plane = input.extent(2) * input.extent(3);
    const double m = static_cast<double>(b_n * plane);
    Tensor gx(input.shape());
    const double* x = input.data();
    const double* gy = upstream_grad.data();
    double* out = gx.data();
    for (std::size_t c = 0; c < c_n; ++c) {
        double mean, inv_std;
        if (mode == Mode::kTrain) {
            mean = vars.mean[c];
            inv_std = vars.inv_std[c];
        } else {
            mean = running.mean[c];
            inv_std = 1.0 / std::sqrt(running.var[c] + eps);
        }
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t b = 0; b < b_n; ++b) {
            const double* xp = x + (b * c_n + c) * plane;
            const double* gp = gy + (b * c_n + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_gy += gp[i];
                sum_gy_xhat += gp[i] * (xp[i] - mean) * inv_std;
            }
        }
        grad_beta[c] += sum_gy;
        grad_gamma[c] += sum_gy_xhat;
        double g = gamma[c];
        if (mode == Mode::kTrain) {
            // dL/dx = gamma * inv_std * (gy - mean(gy) - xhat * mean(gy * xhat))
            double mean_gy = sum_gy / m;
            double mean_gy_xhat = sum_gy_xhat / m;
            for (std::size_t b = 0; b < b_n; ++b) {
                const double* xp = x + (b * c_n + c) * plane;
                const double* gp = gy + (b * c_n + c) * plane;
                double* op = out + (b * c_n + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    double xhat = (xp[i] - mean) * inv_std;
                    op[i] = g * inv_std * (gp[i] - mean_gy - xhat * mean_gy_xhat);
                }
            }
        } else {
            double scale = g * inv_std;
            for (std::size_t b = 0; b < b_n; ++b) {
                const double* gp = gy + (b * c_n + c) * plane;
                double* op = out + (b * c_n + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) op[i] = gp[i] * scale;
            }
        }
    }
    return gx;
}

SoftmaxResult softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    if (logits.rank() != 1) {
        throw std::invalid_argument("softmax_cross_entropy: logits must be rank 1, got " +
                                    shape_string(logits));
    }
    std::size_t k = logits.extent(0);
    if (label >= k) {
        throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(k) + " classes");
    }
    SoftmaxResult r;
    r.probabilities = Tensor({k});
    const double* z = logits.data();
    double zmax = z[0];
    for (std::size_t i = 1; i < k; ++i) zmax = std::max(zmax, z[i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double e = std::exp(z[i] - zmax);
        r.probabilities[i] = e;
        denom += e;
    }
    for (std::size_t i = 0; i < k; ++i) r.probabilities[i] /= denom;
    r.loss = std::log(denom) - (z[label] - zmax);
    return r;
}

Tensor softmax_cross_entropy_backward(const SoftmaxResult& result, std::size_t label,
                                      double upstream) {
    Tensor g(result.probabilities.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = upstream * result.probabilities[i];
    g[label] -= upstream;
    return g;
}

}  // namespace stgcn
